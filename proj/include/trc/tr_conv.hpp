#pragma once

#include <array>
#include <cstdint>

#include "trc/conv.hpp"
#include "trc/kernels.hpp"
#include "trc/tensor.hpp"
#include "trc/tr_model.hpp"

namespace trc {

/// Multiply–accumulate counts of the four sublayers.
struct FlopCounter {
  std::array<std::uint64_t, 4> stage{};
  std::uint64_t total() const noexcept { return stage[0] + stage[1] + stage[2] + stage[3]; }
};

/// Positions of the kernel's T, C, D1, D2 cores inside a shifted core list.
/// The original kernel mode m sits at core (m − shift) mod 4.
struct CoreRoles {
  std::size_t output, input, vertical, horizontal;
};
CoreRoles core_roles(std::size_t shift);

/// A convolution replaced by TR cores of its T×C×D1×D2 kernel.
class TRConvLayer {
 public:
  TRConvLayer(TRCores cores, ConvGeometry geometry);

  const TRCores& cores() const noexcept { return cores_; }
  const ConvGeometry& geometry() const noexcept { return geometry_; }
  std::size_t filters() const noexcept { return cores_.orig_dims[0]; }
  std::size_t channels() const noexcept { return cores_.orig_dims[1]; }

  const Tensor64& output_core() const { return cores_.cores[roles_.output]; }
  const Tensor64& input_core() const { return cores_.cores[roles_.input]; }
  const Tensor64& vertical_core() const { return cores_.cores[roles_.vertical]; }
  const Tensor64& horizontal_core() const { return cores_.cores[roles_.horizontal]; }

 private:
  TRCores cores_;
  ConvGeometry geometry_;
  CoreRoles roles_;
};

/// Z = X ×₃² core: (I1×I2×C, a×C×b) → I1×I2×a×b.
template <class Scalar>
Tensor<Scalar> stage_contract_in(const Tensor<Scalar>& x, const Tensor<Scalar>& core, std::uint64_t* macs = nullptr,
                                 kernels::Exec exec = kernels::Exec::parallel);

/// 1D convolution along mode 0 with rank mixing:
/// (I1×I2×a×b, b×D1×c) → Ĩ1×I2×a×c, zero padding and stride from `g`.
template <class Scalar>
Tensor<Scalar> stage_conv_vertical(const Tensor<Scalar>& z, const Tensor<Scalar>& core, const ConvGeometry& g,
                                   std::uint64_t* macs = nullptr, kernels::Exec exec = kernels::Exec::parallel);

/// Mirror of the vertical stage along mode 1: (Ĩ1×I2×a×c, c×D2×d) → Ĩ1×Ĩ2×a×d.
template <class Scalar>
Tensor<Scalar> stage_conv_horizontal(const Tensor<Scalar>& z, const Tensor<Scalar>& core, const ConvGeometry& g,
                                     std::uint64_t* macs = nullptr, kernels::Exec exec = kernels::Exec::parallel);

/// Two-mode contraction with the output core: (Ĩ1×Ĩ2×a×d, d×T×a) → Ĩ1×Ĩ2×T.
template <class Scalar>
Tensor<Scalar> stage_contract_out(const Tensor<Scalar>& z, const Tensor<Scalar>& core, std::uint64_t* macs = nullptr,
                                  kernels::Exec exec = kernels::Exec::parallel);

template <class Scalar>
struct TRConvResult {
  Tensor<Scalar> output;
  FlopCounter flops;
};

/// The four-sublayer pipeline; equals conv2d_direct with the reconstructed kernel.
template <class Scalar>
TRConvResult<Scalar> tr_convolution(const Tensor<Scalar>& x, const TRConvLayer& layer,
                                    kernels::Exec exec = kernels::Exec::parallel);

}  // namespace trc
