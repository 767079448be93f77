#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "trc/svd.hpp"
#include "trc/tensor.hpp"
#include "trc/tr_model.hpp"

namespace trc {

class DecompositionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DecompositionConfig {
  double eps_p = 0.0;      // prescribed relative error, in [0, 1)
  std::size_t shift = 0;   // circular shift τ_k applied before decomposing
  std::size_t r1 = 1;      // first TR rank; must divide the δ_1-rank
};

/// Truncation thresholds for the N−1 sequential SVDs:
/// δ_1 = sqrt(2/N)·ε·‖W‖, δ_k = sqrt(1/N)·ε·‖W‖ for k ≥ 2.
/// Their squares sum to (ε·‖W‖)².
std::vector<double> delta_schedule(double eps_p, double fro_norm, std::size_t order);

/// All divisors of r in ascending order.
std::vector<std::uint64_t> divisors(std::uint64_t r);

/// δ_1-rank of the mode-0 unfolding of circular_shift(w, shift).
std::size_t leading_rank(const Tensor64& w, double eps_p, std::size_t shift);

/// Sequential truncated-SVD tensor-ring decomposition of a 4-way kernel at a
/// fixed (shift, R_1). Resulting cores reconstruct circular_shift(w, shift).
TRCores tr_svd(const Tensor64& w, const DecompositionConfig& cfg);

struct Candidate {
  std::size_t shift = 0;
  std::size_t r1 = 0;
  Shape ranks;
  std::uint64_t storage = 0;
  double predicted_rel_error = 0.0;  // sqrt(Σ discarded energy) / ‖W‖
};

struct SearchResult {
  TRCores cores;
  std::size_t shift = 0;
  std::size_t r1 = 0;
  std::uint64_t storage = 0;
  double achieved_rel_error = 0.0;  // measured by reconstruction
  std::size_t candidates_evaluated = 0;
  std::size_t leading_rank = 0;     // δ_1-rank at the selected shift
  std::vector<Candidate> candidates;  // ordered by (shift, r1)
};

struct SearchOptions {
  /// Evaluate candidates in a pseudo-random order; the selection must not
  /// depend on it.
  std::optional<std::uint64_t> shuffle_seed;
  bool parallel = true;
};

/// Exhaustive search over every circular shift and every divisor R_1 of the
/// δ_1-rank for the minimum-storage TR representation. Ties go to the smaller
/// shift, then the smaller R_1.
SearchResult rsdtr_search(const Tensor64& w, double eps_p, const SearchOptions& opts = {});

}  // namespace trc
