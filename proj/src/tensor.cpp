#include "trc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trc/kernels.hpp"

namespace trc {

std::string shape_string(std::span<const std::size_t> dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "×" : "") << dims[i];
  os << ')';
  return os.str();
}

Shape row_major_strides(std::span<const std::size_t> dims) {
  Shape strides(dims.size(), 1);
  for (std::size_t n = dims.size(); n-- > 1;) strides[n - 1] = strides[n] * dims[n];
  return strides;
}

template <class Scalar>
Tensor<Scalar> permute(const Tensor<Scalar>& t, std::span<const std::size_t> perm) {
  const std::size_t order = t.order();
  if (perm.size() != order) throw std::invalid_argument("permutation length does not match tensor order");
  std::vector<bool> seen(order, false);
  for (auto p : perm) {
    if (p >= order || seen[p]) throw std::invalid_argument("invalid mode permutation");
    seen[p] = true;
  }

  Shape out_dims(order);
  Shape src_strides(order);
  const Shape in_strides = row_major_strides(t.dims());
  for (std::size_t p = 0; p < order; ++p) {
    out_dims[p] = t.dim(perm[p]);
    src_strides[p] = in_strides[perm[p]];
  }

  Tensor<Scalar> out(out_dims);
  std::vector<std::size_t> idx(order, 0);
  std::size_t src = 0;
  const auto in = t.data();
  auto dst = out.data();
  for (std::size_t flat = 0; flat < dst.size(); ++flat) {
    dst[flat] = in[src];
    // odometer increment over the output index, tracking the source offset
    for (std::size_t p = order; p-- > 0;) {
      if (++idx[p] < out_dims[p]) {
        src += src_strides[p];
        break;
      }
      src -= src_strides[p] * (out_dims[p] - 1);
      idx[p] = 0;
    }
  }
  return out;
}

template <class Scalar>
Tensor<Scalar> unfold(const Tensor<Scalar>& t, std::size_t mode) {
  if (mode >= t.order()) {
    throw std::out_of_range("unfold: mode " + std::to_string(mode) + " out of range for order " +
                            std::to_string(t.order()));
  }
  std::vector<std::size_t> perm{mode};
  for (std::size_t n = 0; n < t.order(); ++n) {
    if (n != mode) perm.push_back(n);
  }
  const std::size_t rows = t.dim(mode);
  return permute(t, perm).reshaped({rows, t.size() / rows});
}

template <class Scalar>
Tensor<Scalar> fold(const Tensor<Scalar>& m, std::size_t mode, const Shape& dims) {
  if (mode >= dims.size()) throw std::out_of_range("fold: mode out of range");
  if (m.order() != 2 || m.dim(0) != dims[mode] || m.size() != shape_size(dims)) {
    throw std::invalid_argument("fold: matrix " + shape_string(m.dims()) + " incompatible with " +
                                shape_string(dims) + " at mode " + std::to_string(mode));
  }
  Shape permuted{dims[mode]};
  for (std::size_t n = 0; n < dims.size(); ++n) {
    if (n != mode) permuted.push_back(dims[n]);
  }
  // inverse of [mode, 0, 1, ..., mode-1, mode+1, ...]
  std::vector<std::size_t> inv(dims.size());
  for (std::size_t n = 0; n < dims.size(); ++n) inv[n] = n < mode ? n + 1 : (n == mode ? 0 : n);
  return permute(m.reshaped(permuted), inv);
}

template <class Scalar>
Tensor<Scalar> circular_shift(const Tensor<Scalar>& t, std::size_t k) {
  const std::size_t order = t.order();
  if (k >= order) {
    throw std::out_of_range("circular_shift: k=" + std::to_string(k) + " must be < order " + std::to_string(order));
  }
  if (k == 0) return t;
  std::vector<std::size_t> perm(order);
  for (std::size_t p = 0; p < order; ++p) perm[p] = (p + k) % order;
  return permute(t, perm);
}

template <class Scalar>
Tensor<Scalar> multi_contract(const Tensor<Scalar>& x, const Tensor<Scalar>& y,
                              std::span<const std::size_t> modes_x, std::span<const std::size_t> modes_y) {
  if (modes_x.size() != modes_y.size()) throw std::invalid_argument("contract: mode lists differ in length");
  if (modes_x.empty()) throw std::invalid_argument("contract: no modes to contract");

  auto check = [](std::span<const std::size_t> modes, std::size_t order, const char* which) {
    std::vector<bool> seen(order, false);
    for (auto m : modes) {
      if (m >= order) throw std::out_of_range(std::string("contract: mode out of range for ") + which);
      if (seen[m]) throw std::invalid_argument(std::string("contract: repeated mode in ") + which);
      seen[m] = true;
    }
    return seen;
  };
  const auto used_x = check(modes_x, x.order(), "x");
  const auto used_y = check(modes_y, y.order(), "y");

  std::size_t inner = 1;
  for (std::size_t l = 0; l < modes_x.size(); ++l) {
    if (x.dim(modes_x[l]) != y.dim(modes_y[l])) {
      throw std::invalid_argument("contract: size mismatch, x mode " + std::to_string(modes_x[l]) + " has " +
                                  std::to_string(x.dim(modes_x[l])) + ", y mode " + std::to_string(modes_y[l]) +
                                  " has " + std::to_string(y.dim(modes_y[l])));
    }
    inner *= x.dim(modes_x[l]);
  }

  std::vector<std::size_t> perm_x, perm_y(modes_y.begin(), modes_y.end());
  Shape out_dims;
  for (std::size_t n = 0; n < x.order(); ++n) {
    if (!used_x[n]) {
      perm_x.push_back(n);
      out_dims.push_back(x.dim(n));
    }
  }
  perm_x.insert(perm_x.end(), modes_x.begin(), modes_x.end());
  for (std::size_t n = 0; n < y.order(); ++n) {
    if (!used_y[n]) {
      perm_y.push_back(n);
      out_dims.push_back(y.dim(n));
    }
  }

  const Tensor<Scalar> xm = permute(x, perm_x);
  const Tensor<Scalar> ym = permute(y, perm_y);
  const std::size_t rows = x.size() / inner;
  const std::size_t cols = y.size() / inner;
  if (out_dims.empty()) out_dims.push_back(1);
  Tensor<Scalar> out(out_dims);
  kernels::gemm(xm.data().data(), ym.data().data(), out.data().data(), rows, cols, inner);
  return out;
}

template <class Scalar>
Tensor<Scalar> contract(const Tensor<Scalar>& x, const Tensor<Scalar>& y, std::size_t n, std::size_t m) {
  const std::size_t mx[] = {n};
  const std::size_t my[] = {m};
  return multi_contract(x, y, mx, my);
}

template <class Scalar>
double frobenius_norm(const Tensor<Scalar>& t) {
  double s = 0.0;
  for (auto v : t.data()) s += double(v) * double(v);
  return std::sqrt(s);
}

template <class Scalar>
double relative_error(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.dims() != b.dims()) {
    throw std::invalid_argument("relative_error: dims " + shape_string(a.dims()) + " vs " + shape_string(b.dims()));
  }
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    diff += d * d;
    ref += double(b[i]) * double(b[i]);
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

#define TRC_INSTANTIATE(S)                                                                                  \
  template Tensor<S> permute<S>(const Tensor<S>&, std::span<const std::size_t>);                            \
  template Tensor<S> unfold<S>(const Tensor<S>&, std::size_t);                                              \
  template Tensor<S> fold<S>(const Tensor<S>&, std::size_t, const Shape&);                                  \
  template Tensor<S> circular_shift<S>(const Tensor<S>&, std::size_t);                                      \
  template Tensor<S> contract<S>(const Tensor<S>&, const Tensor<S>&, std::size_t, std::size_t);             \
  template Tensor<S> multi_contract<S>(const Tensor<S>&, const Tensor<S>&, std::span<const std::size_t>,    \
                                       std::span<const std::size_t>);                                       \
  template double frobenius_norm<S>(const Tensor<S>&);                                                      \
  template double relative_error<S>(const Tensor<S>&, const Tensor<S>&);

TRC_INSTANTIATE(float)
TRC_INSTANTIATE(double)
#undef TRC_INSTANTIATE

}  // namespace trc
