#include "trc/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace trc::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

template <class S>
void gemm(const S* a, const S* b, S* c, std::size_t m, std::size_t n, std::size_t k) {
#pragma omp parallel
  {
    std::vector<double> acc(n);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < m; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = a[i * k + p];
        const S* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) acc[j] += aip * double(brow[j]);
      }
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] = static_cast<S>(acc[j]);
    }
  }
}

template <class S>
void conv2d(const S* x, const S* w, S* y, const Conv2dShape& s) {
  const auto in_h = static_cast<std::ptrdiff_t>(s.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(s.in_w);
  const auto pad = static_cast<std::ptrdiff_t>(s.pad);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t o1 = 0; o1 < s.out_h; ++o1) {
    for (std::size_t o2 = 0; o2 < s.out_w; ++o2) {
      S* yp = y + (o1 * s.out_w + o2) * s.filters;
      for (std::size_t f = 0; f < s.filters; ++f) {
        double acc = 0.0;
        const S* wf = w + f * s.channels * s.kern_h * s.kern_w;
        for (std::size_t c = 0; c < s.channels; ++c) {
          for (std::size_t d1 = 0; d1 < s.kern_h; ++d1) {
            const auto ih = static_cast<std::ptrdiff_t>(o1 * s.stride + d1) - pad;
            if (ih < 0 || ih >= in_h) continue;
            for (std::size_t d2 = 0; d2 < s.kern_w; ++d2) {
              const auto iw = static_cast<std::ptrdiff_t>(o2 * s.stride + d2) - pad;
              if (iw < 0 || iw >= in_w) continue;
              const double xv = x[(static_cast<std::size_t>(ih) * s.in_w + static_cast<std::size_t>(iw)) * s.channels + c];
              acc += double(wf[(c * s.kern_h + d1) * s.kern_w + d2]) * xv;
            }
          }
        }
        yp[f] = static_cast<S>(acc);
      }
    }
  }
}

template <class S>
std::uint64_t contract_in(const S* x, const S* core, S* z, std::size_t pixels, std::size_t channels,
                          std::size_t rank_a, std::size_t rank_b) {
  std::uint64_t macs = 0;
#pragma omp parallel for schedule(static) reduction(+ : macs)
  for (std::size_t p = 0; p < pixels; ++p) {
    const S* xp = x + p * channels;
    S* zp = z + p * rank_a * rank_b;
    for (std::size_t a = 0; a < rank_a; ++a) {
      for (std::size_t b = 0; b < rank_b; ++b) {
        double acc = 0.0;
        const S* col = core + a * channels * rank_b + b;
        for (std::size_t c = 0; c < channels; ++c) acc += double(xp[c]) * double(col[c * rank_b]);
        zp[a * rank_b + b] = static_cast<S>(acc);
      }
    }
    macs += rank_a * rank_b * channels;
  }
  return macs;
}

template <class S>
std::uint64_t conv_rows(const S* z, const S* core, S* out, const Conv1dShape& s) {
  const std::size_t out_h = (s.h - s.taps) / s.stride + 1;
  std::uint64_t macs = 0;
#pragma omp parallel for collapse(2) schedule(static) reduction(+ : macs)
  for (std::size_t o = 0; o < out_h; ++o) {
    for (std::size_t j = 0; j < s.w; ++j) {
      for (std::size_t l = 0; l < s.lead; ++l) {
        for (std::size_t q = 0; q < s.out_rank; ++q) {
          double acc = 0.0;
          for (std::size_t t = 0; t < s.taps; ++t) {
            const S* zr = z + (((o * s.stride + t) * s.w + j) * s.lead + l) * s.in_rank;
            const S* cr = core + t * s.out_rank + q;
            for (std::size_t r = 0; r < s.in_rank; ++r) acc += double(zr[r]) * double(cr[r * s.taps * s.out_rank]);
          }
          out[((o * s.w + j) * s.lead + l) * s.out_rank + q] = static_cast<S>(acc);
        }
      }
      macs += s.lead * s.out_rank * s.taps * s.in_rank;
    }
  }
  return macs;
}

template <class S>
std::uint64_t conv_cols(const S* z, const S* core, S* out, const Conv1dShape& s) {
  const std::size_t out_w = (s.w - s.taps) / s.stride + 1;
  std::uint64_t macs = 0;
#pragma omp parallel for collapse(2) schedule(static) reduction(+ : macs)
  for (std::size_t i = 0; i < s.h; ++i) {
    for (std::size_t o = 0; o < out_w; ++o) {
      for (std::size_t l = 0; l < s.lead; ++l) {
        for (std::size_t q = 0; q < s.out_rank; ++q) {
          double acc = 0.0;
          for (std::size_t t = 0; t < s.taps; ++t) {
            const S* zr = z + ((i * s.w + o * s.stride + t) * s.lead + l) * s.in_rank;
            const S* cr = core + t * s.out_rank + q;
            for (std::size_t r = 0; r < s.in_rank; ++r) acc += double(zr[r]) * double(cr[r * s.taps * s.out_rank]);
          }
          out[((i * out_w + o) * s.lead + l) * s.out_rank + q] = static_cast<S>(acc);
        }
      }
      macs += s.lead * s.out_rank * s.taps * s.in_rank;
    }
  }
  return macs;
}

template <class S>
std::uint64_t contract_out(const S* z, const S* core, S* y, std::size_t pixels, std::size_t rank_a,
                           std::size_t rank_d, std::size_t filters) {
  std::uint64_t macs = 0;
#pragma omp parallel for schedule(static) reduction(+ : macs)
  for (std::size_t p = 0; p < pixels; ++p) {
    const S* zp = z + p * rank_a * rank_d;
    for (std::size_t t = 0; t < filters; ++t) {
      double acc = 0.0;
      for (std::size_t a = 0; a < rank_a; ++a) {
        for (std::size_t d = 0; d < rank_d; ++d) acc += double(zp[a * rank_d + d]) * double(core[(d * filters + t) * rank_a + a]);
      }
      y[p * filters + t] = static_cast<S>(acc);
    }
    macs += filters * rank_a * rank_d;
  }
  return macs;
}

#define TRC_INSTANTIATE(S)                                                                              \
  template void gemm<S>(const S*, const S*, S*, std::size_t, std::size_t, std::size_t);                 \
  template void conv2d<S>(const S*, const S*, S*, const Conv2dShape&);                                  \
  template std::uint64_t contract_in<S>(const S*, const S*, S*, std::size_t, std::size_t, std::size_t,  \
                                        std::size_t);                                                   \
  template std::uint64_t conv_rows<S>(const S*, const S*, S*, const Conv1dShape&);                      \
  template std::uint64_t conv_cols<S>(const S*, const S*, S*, const Conv1dShape&);                      \
  template std::uint64_t contract_out<S>(const S*, const S*, S*, std::size_t, std::size_t, std::size_t, \
                                         std::size_t);

TRC_INSTANTIATE(float)
TRC_INSTANTIATE(double)
#undef TRC_INSTANTIATE

}  // namespace trc::kernels
