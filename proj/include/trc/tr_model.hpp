#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "trc/archive.hpp"
#include "trc/kernels.hpp"
#include "trc/tensor.hpp"

namespace trc {

/// A core list whose ranks do not close into a ring, or whose mode sizes
/// disagree with the recorded shift.
class RankChainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor-ring representation of the circularly shifted tensor W^{τ_shift}.
/// Core n has dims (R_n, I_n, R_{n+1}) where I_n is the n-th mode of the
/// shifted tensor, and R_{N+1} wraps to R_1.
struct TRCores {
  std::vector<Tensor64> cores;
  std::size_t shift = 0;
  Shape orig_dims;

  std::size_t order() const noexcept { return cores.size(); }
  /// (R_1, ..., R_N)
  Shape ranks() const;
  /// Mode sizes of the shifted tensor.
  Shape dims() const;
  void validate() const;
};

/// Σ_{r} Π_n G_n[r_n, i_n, r_{n+1}] in the shifted orientation, computed by
/// chaining slice products left to right.
Tensor64 tr_reconstruct(const TRCores& c, kernels::Exec exec = kernels::Exec::parallel);

/// Reconstruction rotated back to orig_dims orientation.
Tensor64 tr_reconstruct_original(const TRCores& c, kernels::Exec exec = kernels::Exec::parallel);

/// Cores rotated left by k; represents circular_shift(tr_reconstruct(c), k).
TRCores rotate_cores(const TRCores& c, std::size_t k);

/// Σ_n R_n · I_n · R_{n+1}
std::uint64_t param_count(const TRCores& c);

/// Stores cores as "<prefix>core0".."<prefix>core{N-1}" plus "<prefix>meta",
/// a binary64 vector (N, shift, R_1, ..., R_N).
void write_cores(TensorArchive& ar, const TRCores& c, std::string_view prefix = "");
TRCores read_cores(const TensorArchive& ar, std::string_view prefix = "");

}  // namespace trc
