#include "trc/tr_conv.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace trc {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

/// Zero-pads `pad` entries on both ends of `mode` (0 or 1) of a 4-way tensor.
template <class Scalar>
Tensor<Scalar> pad_spatial(const Tensor<Scalar>& z, std::size_t mode, std::size_t pad) {
  if (pad == 0) return z;
  Shape dims = z.dims();
  dims[mode] += 2 * pad;
  Tensor<Scalar> out(dims);
  const std::size_t h = z.dim(0), w = z.dim(1), inner = z.dim(2) * z.dim(3);
  const std::size_t oh = mode == 0 ? pad : 0, ow = mode == 1 ? pad : 0;
  const std::size_t out_w = dims[1];
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const Scalar* src = z.data().data() + (i * w + j) * inner;
      Scalar* dst = out.data().data() + ((i + oh) * out_w + (j + ow)) * inner;
      std::copy(src, src + inner, dst);
    }
  }
  return out;
}

void record(std::uint64_t* counter, std::uint64_t v) {
  if (counter) *counter = v;
}

}  // namespace

CoreRoles core_roles(std::size_t shift) {
  if (shift >= 4) throw std::out_of_range("core_roles: shift must be < 4");
  auto at = [shift](std::size_t mode) { return (mode + 4 - shift) % 4; };
  return {at(0), at(1), at(2), at(3)};
}

TRConvLayer::TRConvLayer(TRCores cores, ConvGeometry geometry)
    : cores_(std::move(cores)), geometry_(geometry), roles_{} {
  cores_.validate();
  require(cores_.order() == 4, "TRConvLayer: kernel cores must be 4, got " + std::to_string(cores_.order()));
  roles_ = core_roles(cores_.shift);
  require(geometry_.stride > 0, "TRConvLayer: stride must be positive");
}

template <class Scalar>
Tensor<Scalar> stage_contract_in(const Tensor<Scalar>& x, const Tensor<Scalar>& core, std::uint64_t* macs,
                                 kernels::Exec exec) {
  require(x.order() == 3, "stage_contract_in: input must be I1×I2×C, got " + shape_string(x.dims()));
  require(core.order() == 3, "stage_contract_in: core must be 3-way");
  require(x.dim(2) == core.dim(1), "stage_contract_in: input has " + std::to_string(x.dim(2)) +
                                        " channels, core expects " + std::to_string(core.dim(1)));
  const std::size_t pixels = x.dim(0) * x.dim(1), a = core.dim(0), b = core.dim(2);
  Tensor<Scalar> z({x.dim(0), x.dim(1), a, b});
  const auto fn = exec == kernels::Exec::serial ? &kernels::serial::contract_in<Scalar> : &kernels::contract_in<Scalar>;
  record(macs, fn(x.data().data(), core.data().data(), z.data().data(), pixels, x.dim(2), a, b));
  return z;
}

template <class Scalar>
Tensor<Scalar> stage_conv_vertical(const Tensor<Scalar>& z, const Tensor<Scalar>& core, const ConvGeometry& g,
                                   std::uint64_t* macs, kernels::Exec exec) {
  require(z.order() == 4, "stage_conv_vertical: activation must be 4-way, got " + shape_string(z.dims()));
  require(core.order() == 3, "stage_conv_vertical: core must be 3-way");
  require(z.dim(3) == core.dim(0), "stage_conv_vertical: activation rank " + std::to_string(z.dim(3)) +
                                       " != core rank " + std::to_string(core.dim(0)));
  const std::size_t out_h = conv_output_size(z.dim(0), core.dim(1), g);
  const Tensor<Scalar> padded = pad_spatial(z, 0, g.pad);
  kernels::Conv1dShape s{padded.dim(0), padded.dim(1), z.dim(2), core.dim(0), core.dim(1), core.dim(2), g.stride};
  Tensor<Scalar> out({out_h, z.dim(1), z.dim(2), core.dim(2)});
  const auto fn = exec == kernels::Exec::serial ? &kernels::serial::conv_rows<Scalar> : &kernels::conv_rows<Scalar>;
  record(macs, fn(padded.data().data(), core.data().data(), out.data().data(), s));
  return out;
}

template <class Scalar>
Tensor<Scalar> stage_conv_horizontal(const Tensor<Scalar>& z, const Tensor<Scalar>& core, const ConvGeometry& g,
                                     std::uint64_t* macs, kernels::Exec exec) {
  require(z.order() == 4, "stage_conv_horizontal: activation must be 4-way, got " + shape_string(z.dims()));
  require(core.order() == 3, "stage_conv_horizontal: core must be 3-way");
  require(z.dim(3) == core.dim(0), "stage_conv_horizontal: activation rank " + std::to_string(z.dim(3)) +
                                       " != core rank " + std::to_string(core.dim(0)));
  const std::size_t out_w = conv_output_size(z.dim(1), core.dim(1), g);
  const Tensor<Scalar> padded = pad_spatial(z, 1, g.pad);
  kernels::Conv1dShape s{padded.dim(0), padded.dim(1), z.dim(2), core.dim(0), core.dim(1), core.dim(2), g.stride};
  Tensor<Scalar> out({z.dim(0), out_w, z.dim(2), core.dim(2)});
  const auto fn = exec == kernels::Exec::serial ? &kernels::serial::conv_cols<Scalar> : &kernels::conv_cols<Scalar>;
  record(macs, fn(padded.data().data(), core.data().data(), out.data().data(), s));
  return out;
}

template <class Scalar>
Tensor<Scalar> stage_contract_out(const Tensor<Scalar>& z, const Tensor<Scalar>& core, std::uint64_t* macs,
                                  kernels::Exec exec) {
  require(z.order() == 4, "stage_contract_out: activation must be 4-way, got " + shape_string(z.dims()));
  require(core.order() == 3, "stage_contract_out: core must be 3-way");
  require(z.dim(3) == core.dim(0) && z.dim(2) == core.dim(2),
          "stage_contract_out: activation ranks " + shape_string(std::vector{z.dim(2), z.dim(3)}) +
              " do not close the ring with core " + shape_string(core.dims()));
  const std::size_t pixels = z.dim(0) * z.dim(1);
  Tensor<Scalar> y({z.dim(0), z.dim(1), core.dim(1)});
  const auto fn = exec == kernels::Exec::serial ? &kernels::serial::contract_out<Scalar> : &kernels::contract_out<Scalar>;
  record(macs, fn(z.data().data(), core.data().data(), y.data().data(), pixels, z.dim(2), z.dim(3), core.dim(1)));
  return y;
}

template <class Scalar>
TRConvResult<Scalar> tr_convolution(const Tensor<Scalar>& x, const TRConvLayer& layer, kernels::Exec exec) {
  require(x.order() == 3, "tr_convolution: input must be I1×I2×C, got " + shape_string(x.dims()));
  require(x.dim(2) == layer.channels(), "tr_convolution: input has " + std::to_string(x.dim(2)) +
                                            " channels, layer expects " + std::to_string(layer.channels()));
  const auto in = layer.input_core().template cast<Scalar>();
  const auto ver = layer.vertical_core().template cast<Scalar>();
  const auto hor = layer.horizontal_core().template cast<Scalar>();
  const auto out = layer.output_core().template cast<Scalar>();

  TRConvResult<Scalar> r;
  const auto z = stage_contract_in(x, in, &r.flops.stage[0], exec);
  const auto zv = stage_conv_vertical(z, ver, layer.geometry(), &r.flops.stage[1], exec);
  const auto zvh = stage_conv_horizontal(zv, hor, layer.geometry(), &r.flops.stage[2], exec);
  r.output = stage_contract_out(zvh, out, &r.flops.stage[3], exec);
  return r;
}

#define TRC_INSTANTIATE(S)                                                                                     \
  template Tensor<S> stage_contract_in<S>(const Tensor<S>&, const Tensor<S>&, std::uint64_t*, kernels::Exec);  \
  template Tensor<S> stage_conv_vertical<S>(const Tensor<S>&, const Tensor<S>&, const ConvGeometry&,           \
                                            std::uint64_t*, kernels::Exec);                                    \
  template Tensor<S> stage_conv_horizontal<S>(const Tensor<S>&, const Tensor<S>&, const ConvGeometry&,         \
                                              std::uint64_t*, kernels::Exec);                                  \
  template Tensor<S> stage_contract_out<S>(const Tensor<S>&, const Tensor<S>&, std::uint64_t*, kernels::Exec); \
  template TRConvResult<S> tr_convolution<S>(const Tensor<S>&, const TRConvLayer&, kernels::Exec);

TRC_INSTANTIATE(float)
TRC_INSTANTIATE(double)
#undef TRC_INSTANTIATE

}  // namespace trc
