#pragma once

// Data-parallel inner loops. Every kernel exists twice: the OpenMP version in
// trc::kernels and a plain sequential reference in trc::kernels::serial. Both
// visit each output element's summands in the same order and accumulate in
// double, so their results are bit-identical; tests hold them to that.
//
// Kernels take raw row-major buffers and trust their extents. Callers in the
// tensor/tr_conv layers validate shapes first.

#include <cstddef>
#include <cstdint>

namespace trc::kernels {

enum class Exec { serial, parallel };

struct Conv2dShape {
  std::size_t in_h, in_w, channels;      // x: in_h × in_w × channels
  std::size_t filters, kern_h, kern_w;   // w: filters × channels × kern_h × kern_w
  std::size_t out_h, out_w;              // y: out_h × out_w × filters
  std::size_t stride, pad;
};

/// Rank-mixing 1D convolution along one spatial mode of a 4-way activation
/// z: h × w × lead × in_rank, core: in_rank × taps × out_rank. No padding;
/// callers pad explicitly.
struct Conv1dShape {
  std::size_t h, w, lead, in_rank, taps, out_rank, stride;
};

// ---------------------------------------------------------------- parallel

/// c(m×n) = a(m×k) · b(k×n).
template <class S>
void gemm(const S* a, const S* b, S* c, std::size_t m, std::size_t n, std::size_t k);

template <class S>
void conv2d(const S* x, const S* w, S* y, const Conv2dShape& s);

/// z[p, a, b] = Σ_c x[p, c] · core[a, c, b]. Returns MACs performed.
template <class S>
std::uint64_t contract_in(const S* x, const S* core, S* z, std::size_t pixels, std::size_t channels,
                          std::size_t rank_a, std::size_t rank_b);

/// Along mode 0: out is ((h - taps)/stride + 1) × w × lead × out_rank.
template <class S>
std::uint64_t conv_rows(const S* z, const S* core, S* out, const Conv1dShape& s);

/// Along mode 1: out is h × ((w - taps)/stride + 1) × lead × out_rank.
template <class S>
std::uint64_t conv_cols(const S* z, const S* core, S* out, const Conv1dShape& s);

/// y[p, t] = Σ_a Σ_d z[p, a, d] · core[d, t, a].
template <class S>
std::uint64_t contract_out(const S* z, const S* core, S* y, std::size_t pixels, std::size_t rank_a,
                           std::size_t rank_d, std::size_t filters);

// ---------------------------------------------------------------- reference

namespace serial {

template <class S>
void gemm(const S* a, const S* b, S* c, std::size_t m, std::size_t n, std::size_t k);

template <class S>
void conv2d(const S* x, const S* w, S* y, const Conv2dShape& s);

template <class S>
std::uint64_t contract_in(const S* x, const S* core, S* z, std::size_t pixels, std::size_t channels,
                          std::size_t rank_a, std::size_t rank_b);

template <class S>
std::uint64_t conv_rows(const S* z, const S* core, S* out, const Conv1dShape& s);

template <class S>
std::uint64_t conv_cols(const S* z, const S* core, S* out, const Conv1dShape& s);

template <class S>
std::uint64_t contract_out(const S* z, const S* core, S* y, std::size_t pixels, std::size_t rank_a,
                           std::size_t rank_d, std::size_t filters);

}  // namespace serial

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace trc::kernels
