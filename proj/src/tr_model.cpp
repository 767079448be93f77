#include "trc/tr_model.hpp"

#include <cmath>
#include <string>

namespace trc {

Shape TRCores::ranks() const {
  Shape r;
  r.reserve(cores.size());
  for (const auto& g : cores) r.push_back(g.dim(0));
  return r;
}

Shape TRCores::dims() const {
  Shape d;
  d.reserve(cores.size());
  for (const auto& g : cores) d.push_back(g.dim(1));
  return d;
}

void TRCores::validate() const {
  const std::size_t n = cores.size();
  if (n == 0) throw RankChainError("rank-chain: no cores");
  for (std::size_t k = 0; k < n; ++k) {
    if (cores[k].order() != 3) {
      throw RankChainError("rank-chain: core " + std::to_string(k) + " is not 3-way " + shape_string(cores[k].dims()));
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t next = (k + 1) % n;
    if (cores[k].dim(2) != cores[next].dim(0)) {
      throw RankChainError("rank-chain: core " + std::to_string(k) + " trailing rank " +
                           std::to_string(cores[k].dim(2)) + " != core " + std::to_string(next) + " leading rank " +
                           std::to_string(cores[next].dim(0)));
    }
  }
  if (shift >= n) throw RankChainError("rank-chain: shift " + std::to_string(shift) + " out of range");
  if (orig_dims.size() != n) throw RankChainError("rank-chain: orig_dims order differs from core count");
  for (std::size_t k = 0; k < n; ++k) {
    if (cores[k].dim(1) != orig_dims[(k + shift) % n]) {
      throw RankChainError("rank-chain: core " + std::to_string(k) + " mode size " + std::to_string(cores[k].dim(1)) +
                           " disagrees with shift " + std::to_string(shift) + " of " + shape_string(orig_dims));
    }
  }
}

Tensor64 tr_reconstruct(const TRCores& c, kernels::Exec exec) {
  c.validate();
  const std::size_t r1 = c.cores.front().dim(0);
  // acc holds (R_1, M, R_{n+1}) with M the product of the modes consumed so far
  Tensor64 acc = c.cores.front();
  std::size_t m = c.cores.front().dim(1);
  for (std::size_t n = 1; n < c.order(); ++n) {
    const auto& g = c.cores[n];
    const std::size_t rin = g.dim(0), in = g.dim(1), rout = g.dim(2);
    Tensor64 next({r1, m * in, rout});
    if (exec == kernels::Exec::serial) {
      kernels::serial::gemm(acc.data().data(), g.data().data(), next.data().data(), r1 * m, in * rout, rin);
    } else {
      kernels::gemm(acc.data().data(), g.data().data(), next.data().data(), r1 * m, in * rout, rin);
    }
    acc = std::move(next);
    m *= in;
  }
  Tensor64 y(c.dims());
  auto out = y.data();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < r1; ++r) s += acc[(r * m + i) * r1 + r];
    out[i] = s;
  }
  return y;
}

Tensor64 tr_reconstruct_original(const TRCores& c, kernels::Exec exec) {
  const Tensor64 y = tr_reconstruct(c, exec);
  return circular_shift(y, (c.order() - c.shift) % c.order());
}

TRCores rotate_cores(const TRCores& c, std::size_t k) {
  const std::size_t n = c.order();
  if (k >= n) throw std::out_of_range("rotate_cores: k=" + std::to_string(k) + " must be < " + std::to_string(n));
  TRCores out;
  out.cores.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.cores.push_back(c.cores[(i + k) % n]);
  out.shift = (c.shift + k) % n;
  out.orig_dims = c.orig_dims;
  return out;
}

std::uint64_t param_count(const TRCores& c) {
  std::uint64_t total = 0;
  for (const auto& g : c.cores) total += g.size();
  return total;
}

void write_cores(TensorArchive& ar, const TRCores& c, std::string_view prefix) {
  c.validate();
  const std::string p(prefix);
  for (std::size_t n = 0; n < c.order(); ++n) ar.put(p + "core" + std::to_string(n), c.cores[n]);
  std::vector<double> meta{double(c.order()), double(c.shift)};
  for (auto r : c.ranks()) meta.push_back(double(r));
  const std::size_t len = meta.size();
  ar.put(p + "meta", Tensor64({len}, std::move(meta)));
}

TRCores read_cores(const TensorArchive& ar, std::string_view prefix) {
  const std::string p(prefix);
  const auto meta = as<double>(ar.at(p + "meta"));
  if (meta.size() < 2) throw RankChainError("rank-chain: meta tensor too short");
  auto as_count = [](double v, const char* what) {
    if (!(v >= 0.0) || v != std::floor(v)) throw RankChainError(std::string("rank-chain: bad ") + what + " in meta");
    return static_cast<std::size_t>(v);
  };
  const std::size_t n = as_count(meta[0], "order");
  if (n == 0 || meta.size() != 2 + n) throw RankChainError("rank-chain: meta length does not match order");

  TRCores c;
  c.shift = as_count(meta[1], "shift");
  for (std::size_t k = 0; k < n; ++k) {
    c.cores.push_back(as<double>(ar.at(p + "core" + std::to_string(k))));
    if (c.cores.back().order() != 3) throw RankChainError("rank-chain: core " + std::to_string(k) + " is not 3-way");
    if (c.cores.back().dim(0) != as_count(meta[2 + k], "rank")) {
      throw RankChainError("rank-chain: core " + std::to_string(k) + " leading rank disagrees with meta");
    }
  }
  if (c.shift >= n) throw RankChainError("rank-chain: shift out of range in meta");
  c.orig_dims.resize(n);
  for (std::size_t k = 0; k < n; ++k) c.orig_dims[(k + c.shift) % n] = c.cores[k].dim(1);
  c.validate();
  return c;
}

}  // namespace trc
