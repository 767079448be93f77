#include "trc/tr_svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

namespace trc {
namespace {

using ConstMap = Eigen::Map<const Matrix>;

void check_eps(double eps_p) {
  if (!(eps_p >= 0.0 && eps_p < 1.0)) throw DecompositionError("eps_p must lie in [0, 1), got " + std::to_string(eps_p));
}

void check_kernel(const Tensor64& w) {
  if (w.order() != 4) throw DecompositionError("expected a 4-way kernel, got " + shape_string(w.dims()));
}

Tensor64 to_tensor(const Matrix& m, Shape dims) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return Tensor64(std::move(dims), std::move(data));
}

struct Decomposed {
  TRCores cores;
  double discarded = 0.0;
};

/// Runs steps 2.. of TR-SVD given the (already truncated) SVD of the leading
/// unfolding of the shifted tensor.
Decomposed decompose_from_leading(const Shape& dims, const TruncatedSVD& first, std::size_t r1,
                                  std::span<const double> deltas) {
  const std::size_t order = dims.size();
  const std::size_t r = static_cast<std::size_t>(first.rank());
  if (r1 == 0 || r % r1 != 0) {
    throw DecompositionError("r1=" + std::to_string(r1) + " does not divide the leading rank " + std::to_string(r));
  }
  const std::size_t r2 = r / r1;

  Decomposed out;
  out.discarded = first.discarded_energy;
  out.cores.cores.reserve(order);

  // G1[a, i, b] = U[i, a·R2 + b]
  Tensor64 g1({r1, dims[0], r2});
  for (std::size_t a = 0; a < r1; ++a)
    for (std::size_t i = 0; i < dims[0]; ++i)
      for (std::size_t b = 0; b < r2; ++b) g1(a, i, b) = first.u(Eigen::Index(i), Eigen::Index(a * r2 + b));
  out.cores.cores.push_back(std::move(g1));

  // diag(S)·Vt is (R1·R2) × rest; viewed as R1 × (R2·rest), its transpose is
  // row-major (R2, I2, ..., IN, R1).
  const Matrix sv = first.s.asDiagonal() * first.vt;
  const std::size_t rest = static_cast<std::size_t>(sv.cols());
  Matrix carry = ConstMap(sv.data(), Eigen::Index(r1), Eigen::Index(r2 * rest)).transpose();

  std::size_t rank_in = r2;
  std::size_t remaining = rest * r1;  // elements per rank row: I_n ... I_N · R1
  for (std::size_t n = 1; n + 1 < order; ++n) {
    const std::size_t rows = rank_in * dims[n];
    const std::size_t cols = remaining / dims[n];
    const ConstMap mat(carry.data(), Eigen::Index(rows), Eigen::Index(cols));
    TruncatedSVD step = truncated_svd(mat, deltas[n]);
    out.discarded += step.discarded_energy;
    const std::size_t rank_out = static_cast<std::size_t>(step.rank());
    out.cores.cores.push_back(to_tensor(step.u, {rank_in, dims[n], rank_out}));
    carry = step.s.asDiagonal() * step.vt;
    rank_in = rank_out;
    remaining = cols;
  }
  out.cores.cores.push_back(to_tensor(carry, {rank_in, dims[order - 1], r1}));
  return out;
}

Matrix leading_unfolding(const Tensor64& shifted) {
  const std::size_t rows = shifted.dim(0);
  return ConstMap(shifted.data().data(), Eigen::Index(rows), Eigen::Index(shifted.size() / rows));
}

}  // namespace

std::vector<double> delta_schedule(double eps_p, double fro_norm, std::size_t order) {
  if (order < 3) throw DecompositionError("delta_schedule needs order >= 3");
  if (!(eps_p >= 0.0)) throw DecompositionError("eps_p must be >= 0");
  const double scale = eps_p * fro_norm;
  std::vector<double> deltas(order - 1, std::sqrt(1.0 / double(order)) * scale);
  deltas[0] = std::sqrt(2.0 / double(order)) * scale;
  return deltas;
}

std::vector<std::uint64_t> divisors(std::uint64_t r) {
  if (r == 0) throw std::invalid_argument("divisors: r must be positive");
  std::vector<std::uint64_t> small, large;
  for (std::uint64_t d = 1; d * d <= r; ++d) {
    if (r % d != 0) continue;
    small.push_back(d);
    if (d != r / d) large.push_back(r / d);
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

std::size_t leading_rank(const Tensor64& w, double eps_p, std::size_t shift) {
  check_kernel(w);
  check_eps(eps_p);
  const Tensor64 shifted = circular_shift(w, shift);
  const auto deltas = delta_schedule(eps_p, frobenius_norm(w), w.order());
  return static_cast<std::size_t>(truncated_svd(leading_unfolding(shifted), deltas[0]).rank());
}

TRCores tr_svd(const Tensor64& w, const DecompositionConfig& cfg) {
  check_kernel(w);
  check_eps(cfg.eps_p);
  const Tensor64 shifted = circular_shift(w, cfg.shift);
  const auto deltas = delta_schedule(cfg.eps_p, frobenius_norm(w), w.order());
  const TruncatedSVD first = truncated_svd(leading_unfolding(shifted), deltas[0]);
  Decomposed d = decompose_from_leading(shifted.dims(), first, cfg.r1, deltas);
  d.cores.shift = cfg.shift;
  d.cores.orig_dims = w.dims();
  return std::move(d.cores);
}

SearchResult rsdtr_search(const Tensor64& w, double eps_p, const SearchOptions& opts) {
  check_kernel(w);
  check_eps(eps_p);
  const std::size_t order = w.order();
  const double norm = frobenius_norm(w);
  const auto deltas = delta_schedule(eps_p, norm, order);

  std::vector<Tensor64> shifted;
  std::vector<TruncatedSVD> leading;
  struct Job {
    std::size_t shift, r1;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < order; ++k) {
    shifted.push_back(circular_shift(w, k));
    leading.push_back(truncated_svd(leading_unfolding(shifted.back()), deltas[0]));
    for (auto d : divisors(static_cast<std::uint64_t>(leading.back().rank()))) jobs.push_back({k, std::size_t(d)});
  }
  if (opts.shuffle_seed) {
    std::mt19937_64 rng(*opts.shuffle_seed);
    std::shuffle(jobs.begin(), jobs.end(), rng);
  }

  std::vector<Candidate> evaluated(jobs.size());
  std::optional<TRCores> best;
  auto key = [](const Candidate& c) { return std::make_tuple(c.storage, c.shift, c.r1); };
  std::optional<Candidate> best_key;

  const auto count = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    const Job job = jobs[std::size_t(j)];
    Decomposed d = decompose_from_leading(shifted[job.shift].dims(), leading[job.shift], job.r1, deltas);
    d.cores.shift = job.shift;
    d.cores.orig_dims = w.dims();
    Candidate c{job.shift, job.r1, d.cores.ranks(), param_count(d.cores),
                norm > 0.0 ? std::sqrt(d.discarded) / norm : 0.0};
#pragma omp critical(trc_rsdtr_select)
    {
      if (!best_key || key(c) < key(*best_key)) {
        best_key = c;
        best = std::move(d.cores);
      }
    }
    evaluated[std::size_t(j)] = std::move(c);
  }

  std::sort(evaluated.begin(), evaluated.end(),
            [](const Candidate& a, const Candidate& b) { return std::tie(a.shift, a.r1) < std::tie(b.shift, b.r1); });

  SearchResult res;
  res.cores = std::move(*best);
  res.shift = best_key->shift;
  res.r1 = best_key->r1;
  res.storage = best_key->storage;
  res.candidates_evaluated = evaluated.size();
  res.leading_rank = static_cast<std::size_t>(leading[res.shift].rank());
  res.candidates = std::move(evaluated);
  res.achieved_rel_error = relative_error(tr_reconstruct_original(res.cores), w);
  return res;
}

}  // namespace trc
