#include "trc/kernels.hpp"

#include <vector>

namespace trc::kernels::serial {

template <class S>
void gemm(const S* a, const S* b, S* c, std::size_t m, std::size_t n, std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += double(a[i * k + p]) * double(b[p * n + j]);
      c[i * n + j] = static_cast<S>(acc);
    }
  }
}

template <class S>
void conv2d(const S* x, const S* w, S* y, const Conv2dShape& s) {
  for (std::size_t o1 = 0; o1 < s.out_h; ++o1) {
    for (std::size_t o2 = 0; o2 < s.out_w; ++o2) {
      for (std::size_t f = 0; f < s.filters; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < s.channels; ++c) {
          for (std::size_t d1 = 0; d1 < s.kern_h; ++d1) {
            const auto ih = static_cast<std::ptrdiff_t>(o1 * s.stride + d1) - static_cast<std::ptrdiff_t>(s.pad);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(s.in_h)) continue;
            for (std::size_t d2 = 0; d2 < s.kern_w; ++d2) {
              const auto iw = static_cast<std::ptrdiff_t>(o2 * s.stride + d2) - static_cast<std::ptrdiff_t>(s.pad);
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(s.in_w)) continue;
              const double xv = x[(static_cast<std::size_t>(ih) * s.in_w + static_cast<std::size_t>(iw)) * s.channels + c];
              const double wv = w[((f * s.channels + c) * s.kern_h + d1) * s.kern_w + d2];
              acc += wv * xv;
            }
          }
        }
        y[(o1 * s.out_w + o2) * s.filters + f] = static_cast<S>(acc);
      }
    }
  }
}

template <class S>
std::uint64_t contract_in(const S* x, const S* core, S* z, std::size_t pixels, std::size_t channels,
                          std::size_t rank_a, std::size_t rank_b) {
  std::uint64_t macs = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t a = 0; a < rank_a; ++a) {
      for (std::size_t b = 0; b < rank_b; ++b) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          acc += double(x[p * channels + c]) * double(core[(a * channels + c) * rank_b + b]);
          ++macs;
        }
        z[(p * rank_a + a) * rank_b + b] = static_cast<S>(acc);
      }
    }
  }
  return macs;
}

template <class S>
std::uint64_t conv_rows(const S* z, const S* core, S* out, const Conv1dShape& s) {
  const std::size_t out_h = (s.h - s.taps) / s.stride + 1;
  std::uint64_t macs = 0;
  for (std::size_t o = 0; o < out_h; ++o) {
    for (std::size_t j = 0; j < s.w; ++j) {
      for (std::size_t l = 0; l < s.lead; ++l) {
        for (std::size_t q = 0; q < s.out_rank; ++q) {
          double acc = 0.0;
          for (std::size_t t = 0; t < s.taps; ++t) {
            const std::size_t row = o * s.stride + t;
            for (std::size_t r = 0; r < s.in_rank; ++r) {
              acc += double(z[((row * s.w + j) * s.lead + l) * s.in_rank + r]) *
                     double(core[(r * s.taps + t) * s.out_rank + q]);
              ++macs;
            }
          }
          out[((o * s.w + j) * s.lead + l) * s.out_rank + q] = static_cast<S>(acc);
        }
      }
    }
  }
  return macs;
}

template <class S>
std::uint64_t conv_cols(const S* z, const S* core, S* out, const Conv1dShape& s) {
  const std::size_t out_w = (s.w - s.taps) / s.stride + 1;
  std::uint64_t macs = 0;
  for (std::size_t i = 0; i < s.h; ++i) {
    for (std::size_t o = 0; o < out_w; ++o) {
      for (std::size_t l = 0; l < s.lead; ++l) {
        for (std::size_t q = 0; q < s.out_rank; ++q) {
          double acc = 0.0;
          for (std::size_t t = 0; t < s.taps; ++t) {
            const std::size_t col = o * s.stride + t;
            for (std::size_t r = 0; r < s.in_rank; ++r) {
              acc += double(z[((i * s.w + col) * s.lead + l) * s.in_rank + r]) *
                     double(core[(r * s.taps + t) * s.out_rank + q]);
              ++macs;
            }
          }
          out[((i * out_w + o) * s.lead + l) * s.out_rank + q] = static_cast<S>(acc);
        }
      }
    }
  }
  return macs;
}

template <class S>
std::uint64_t contract_out(const S* z, const S* core, S* y, std::size_t pixels, std::size_t rank_a,
                           std::size_t rank_d, std::size_t filters) {
  std::uint64_t macs = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t t = 0; t < filters; ++t) {
      double acc = 0.0;
      for (std::size_t a = 0; a < rank_a; ++a) {
        for (std::size_t d = 0; d < rank_d; ++d) {
          acc += double(z[(p * rank_a + a) * rank_d + d]) * double(core[(d * filters + t) * rank_a + a]);
          ++macs;
        }
      }
      y[p * filters + t] = static_cast<S>(acc);
    }
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

}  // namespace trc::kernels::serial
