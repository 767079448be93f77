#pragma once

#include <cstddef>

#include "trc/kernels.hpp"
#include "trc/tensor.hpp"

namespace trc {

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t pad = 0;
};

/// floor((in + 2·pad − kernel) / stride) + 1. Throws when the padded input is
/// shorter than the kernel or the stride is zero.
std::size_t conv_output_size(std::size_t in, std::size_t kernel, const ConvGeometry& g);

/// Direct 2D cross-correlation: x is I1×I2×C, w is T×C×D1×D2, result Ĩ1×Ĩ2×T.
/// y[o1,o2,t] = Σ_{c,d1,d2} w[t,c,d1,d2] · x[o1·Δ + d1 − P, o2·Δ + d2 − P, c]
/// with zero padding. This is the reference every pipeline test compares to.
template <class Scalar>
Tensor<Scalar> conv2d_direct(const Tensor<Scalar>& x, const Tensor<Scalar>& w, const ConvGeometry& g,
                             kernels::Exec exec = kernels::Exec::parallel);

}  // namespace trc
