#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace trc {

using Shape = std::vector<std::size_t>;

enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

template <class Scalar>
constexpr Dtype dtype_of() {
  static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>,
                "only binary32 and binary64 tensors are supported");
  return std::is_same_v<Scalar, float> ? Dtype::f32 : Dtype::f64;
}

inline std::size_t shape_size(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(std::span<const std::size_t> dims);

/// Row-major strides (last index fastest).
Shape row_major_strides(std::span<const std::size_t> dims);

/// Dense N-way array, row-major. Modes are 0-based throughout the API.
template <class Scalar>
class Tensor {
 public:
  using value_type = Scalar;

  Tensor() = default;

  explicit Tensor(Shape dims) : dims_(std::move(dims)) {
    check_dims();
    data_.assign(shape_size(dims_), Scalar{0});
  }

  Tensor(Shape dims, std::vector<Scalar> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims();
    if (data_.size() != shape_size(dims_)) {
      throw std::invalid_argument("tensor payload has " + std::to_string(data_.size()) +
                                  " elements, dims " + shape_string(dims_) + " need " +
                                  std::to_string(shape_size(dims_)));
    }
  }

  const Shape& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> data() const noexcept { return data_; }

  Scalar& operator[](std::size_t flat) { return data_[flat]; }
  const Scalar& operator[](std::size_t flat) const { return data_[flat]; }

  std::size_t offset(std::span<const std::size_t> idx) const {
    std::size_t off = 0;
    for (std::size_t n = 0; n < dims_.size(); ++n) off = off * dims_[n] + idx[n];
    return off;
  }

  template <class... I>
  Scalar& operator()(I... idx) {
    const std::size_t ix[] = {static_cast<std::size_t>(idx)...};
    return data_[offset(ix)];
  }
  template <class... I>
  const Scalar& operator()(I... idx) const {
    const std::size_t ix[] = {static_cast<std::size_t>(idx)...};
    return data_[offset(ix)];
  }

  /// Same payload, new dims; element count must match.
  Tensor reshaped(Shape dims) const { return Tensor(std::move(dims), data_); }

  template <class To>
  Tensor<To> cast() const {
    std::vector<To> out(data_.begin(), data_.end());
    return Tensor<To>(dims_, std::move(out));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  void check_dims() const {
    if (dims_.empty()) throw std::invalid_argument("tensor must have at least one mode");
    for (auto d : dims_) {
      if (d == 0) throw std::invalid_argument("tensor dims must be positive, got " + shape_string(dims_));
    }
  }

  Shape dims_;
  std::vector<Scalar> data_;
};

using Tensor32 = Tensor<float>;
using Tensor64 = Tensor<double>;

/// Mode-`mode` unfolding: rows = dims[mode], columns run lexicographically over
/// the remaining modes in ascending order. Returned as a 2-way tensor.
template <class Scalar>
Tensor<Scalar> unfold(const Tensor<Scalar>& t, std::size_t mode);

/// Inverse of unfold for a tensor of shape `dims`.
template <class Scalar>
Tensor<Scalar> fold(const Tensor<Scalar>& m, std::size_t mode, const Shape& dims);

/// General mode permutation: result mode p is input mode perm[p].
template <class Scalar>
Tensor<Scalar> permute(const Tensor<Scalar>& t, std::span<const std::size_t> perm);

/// Left circular shift by k: dims become (I_{k+1},...,I_N,I_1,...,I_k).
template <class Scalar>
Tensor<Scalar> circular_shift(const Tensor<Scalar>& t, std::size_t k);

/// Contract mode n of x with mode m of y. Result modes: x's remaining modes
/// followed by y's remaining modes. Contracting every mode yields a 1-element
/// tensor of dims {1}.
template <class Scalar>
Tensor<Scalar> contract(const Tensor<Scalar>& x, const Tensor<Scalar>& y, std::size_t n, std::size_t m);

template <class Scalar>
Tensor<Scalar> multi_contract(const Tensor<Scalar>& x, const Tensor<Scalar>& y,
                              std::span<const std::size_t> modes_x, std::span<const std::size_t> modes_y);

template <class Scalar>
double frobenius_norm(const Tensor<Scalar>& t);

/// ||a - b||_F / ||b||_F (or the absolute norm when b is zero).
template <class Scalar>
double relative_error(const Tensor<Scalar>& a, const Tensor<Scalar>& b);

}  // namespace trc
