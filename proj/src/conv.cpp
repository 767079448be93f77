#include "trc/conv.hpp"

#include <stdexcept>
#include <string>

namespace trc {

std::size_t conv_output_size(std::size_t in, std::size_t kernel, const ConvGeometry& g) {
  if (g.stride == 0) throw std::invalid_argument("convolution stride must be positive");
  if (in + 2 * g.pad < kernel) {
    throw std::invalid_argument("kernel extent " + std::to_string(kernel) + " exceeds padded input " +
                                std::to_string(in + 2 * g.pad));
  }
  return (in + 2 * g.pad - kernel) / g.stride + 1;
}

template <class Scalar>
Tensor<Scalar> conv2d_direct(const Tensor<Scalar>& x, const Tensor<Scalar>& w, const ConvGeometry& g,
                             kernels::Exec exec) {
  if (x.order() != 3) throw std::invalid_argument("conv2d: input must be I1×I2×C, got " + shape_string(x.dims()));
  if (w.order() != 4) throw std::invalid_argument("conv2d: kernel must be T×C×D1×D2, got " + shape_string(w.dims()));
  if (x.dim(2) != w.dim(1)) {
    throw std::invalid_argument("conv2d: input has " + std::to_string(x.dim(2)) + " channels, kernel expects " +
                                std::to_string(w.dim(1)));
  }
  kernels::Conv2dShape s{};
  s.in_h = x.dim(0);
  s.in_w = x.dim(1);
  s.channels = x.dim(2);
  s.filters = w.dim(0);
  s.kern_h = w.dim(2);
  s.kern_w = w.dim(3);
  s.out_h = conv_output_size(s.in_h, s.kern_h, g);
  s.out_w = conv_output_size(s.in_w, s.kern_w, g);
  s.stride = g.stride;
  s.pad = g.pad;

  Tensor<Scalar> y({s.out_h, s.out_w, s.filters});
  if (exec == kernels::Exec::serial) {
    kernels::serial::conv2d(x.data().data(), w.data().data(), y.data().data(), s);
  } else {
    kernels::conv2d(x.data().data(), w.data().data(), y.data().data(), s);
  }
  return y;
}

template Tensor<float> conv2d_direct<float>(const Tensor<float>&, const Tensor<float>&, const ConvGeometry&,
                                            kernels::Exec);
template Tensor<double> conv2d_direct<double>(const Tensor<double>&, const Tensor<double>&, const ConvGeometry&,
                                              kernels::Exec);

}  // namespace trc
