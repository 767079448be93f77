#pragma once

// Naive reference computations used only by tests. Each one walks the defining
// index sums directly and shares no code with the library paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "trc/tensor.hpp"
#include "trc/tr_model.hpp"

namespace trc::testing {

template <class Scalar = double>
Tensor<Scalar> random_tensor(Shape dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor<Scalar> t(std::move(dims));
  for (auto& v : t.data()) v = static_cast<Scalar>(normal(rng));
  return t;
}

inline std::vector<std::size_t> unravel(std::size_t flat, const Shape& dims) {
  std::vector<std::size_t> idx(dims.size());
  for (std::size_t n = dims.size(); n-- > 0;) {
    idx[n] = flat % dims[n];
    flat /= dims[n];
  }
  return idx;
}

inline std::size_t ravel(const std::vector<std::size_t>& idx, const Shape& dims) {
  std::size_t flat = 0;
  for (std::size_t n = 0; n < dims.size(); ++n) flat = flat * dims[n] + idx[n];
  return flat;
}

/// Σ over the paired modes by enumerating every output index and every
/// contracted index tuple.
inline Tensor64 naive_multi_contract(const Tensor64& x, const Tensor64& y, const std::vector<std::size_t>& mx,
                                     const std::vector<std::size_t>& my) {
  Shape out_dims, sum_dims;
  std::vector<std::size_t> free_x, free_y;
  for (std::size_t n = 0; n < x.order(); ++n) {
    if (std::find(mx.begin(), mx.end(), n) == mx.end()) {
      free_x.push_back(n);
      out_dims.push_back(x.dim(n));
    }
  }
  for (std::size_t n = 0; n < y.order(); ++n) {
    if (std::find(my.begin(), my.end(), n) == my.end()) {
      free_y.push_back(n);
      out_dims.push_back(y.dim(n));
    }
  }
  for (auto m : mx) sum_dims.push_back(x.dim(m));
  if (out_dims.empty()) out_dims.push_back(1);
  Tensor64 out(out_dims);
  const std::size_t sum_size = shape_size(sum_dims);
  for (std::size_t o = 0; o < out.size(); ++o) {
    const auto oi = unravel(o, out_dims);
    double acc = 0.0;
    for (std::size_t s = 0; s < sum_size; ++s) {
      const auto si = unravel(s, sum_dims);
      std::vector<std::size_t> ix(x.order()), iy(y.order());
      std::size_t p = 0;
      for (auto n : free_x) ix[n] = oi[p++];
      for (auto n : free_y) iy[n] = oi[p++];
      for (std::size_t l = 0; l < mx.size(); ++l) {
        ix[mx[l]] = si[l];
        iy[my[l]] = si[l];
      }
      acc += x[ravel(ix, x.dims())] * y[ravel(iy, y.dims())];
    }
    out[o] = acc;
  }
  return out;
}

/// Element-wise TR model: Σ over every rank tuple of Π_k G_k[r_k, i_k, r_{k+1}].
inline Tensor64 naive_tr_reconstruct(const TRCores& c) {
  const std::size_t n = c.order();
  Shape dims, ranks;
  for (const auto& g : c.cores) {
    dims.push_back(g.dim(1));
    ranks.push_back(g.dim(0));
  }
  Tensor64 out(dims);
  const std::size_t rank_tuples = shape_size(ranks);
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto idx = unravel(e, dims);
    double acc = 0.0;
    for (std::size_t rt = 0; rt < rank_tuples; ++rt) {
      const auto r = unravel(rt, ranks);
      double prod = 1.0;
      for (std::size_t k = 0; k < n; ++k) prod *= c.cores[k](r[k], idx[k], r[(k + 1) % n]);
      acc += prod;
    }
    out[e] = acc;
  }
  return out;
}

/// Direct 1D convolution along `mode` (0 or 1) with zero padding, rank mixing
/// through core (in_rank × taps × out_rank): z is H×W×L×in_rank.
inline Tensor64 naive_conv1d(const Tensor64& z, const Tensor64& core, std::size_t mode, std::size_t stride,
                             std::size_t pad) {
  const std::size_t h = z.dim(0), w = z.dim(1), lead = z.dim(2), rin = z.dim(3);
  const std::size_t taps = core.dim(1), rout = core.dim(2);
  const std::size_t len = mode == 0 ? h : w;
  const std::size_t out_len = (len + 2 * pad - taps) / stride + 1;
  Tensor64 out({mode == 0 ? out_len : h, mode == 0 ? w : out_len, lead, rout});
  for (std::size_t i = 0; i < out.dim(0); ++i)
    for (std::size_t j = 0; j < out.dim(1); ++j)
      for (std::size_t l = 0; l < lead; ++l)
        for (std::size_t q = 0; q < rout; ++q) {
          double acc = 0.0;
          for (std::size_t t = 0; t < taps; ++t) {
            const long pos = long((mode == 0 ? i : j) * stride + t) - long(pad);
            if (pos < 0 || pos >= long(len)) continue;
            const std::size_t si = mode == 0 ? std::size_t(pos) : i;
            const std::size_t sj = mode == 0 ? j : std::size_t(pos);
            for (std::size_t r = 0; r < rin; ++r) acc += z(si, sj, l, r) * core(r, t, q);
          }
          out(i, j, l, q) = acc;
        }
  return out;
}

inline double max_abs_diff(const Tensor64& a, const Tensor64& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Outer product of four vectors as a T×C×D1×D2 tensor.
inline Tensor64 rank_one_kernel(Shape dims, std::uint64_t seed) {
  std::vector<Tensor64> v;
  for (std::size_t k = 0; k < dims.size(); ++k) v.push_back(random_tensor<double>({dims[k]}, seed + 17 * k));
  Tensor64 out(dims);
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto idx = unravel(e, dims);
    double p = 1.0;
    for (std::size_t k = 0; k < dims.size(); ++k) p *= v[k][idx[k]];
    out[e] = p;
  }
  return out;
}

}  // namespace trc::testing
