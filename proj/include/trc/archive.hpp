#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trc/tensor.hpp"

namespace trc {

/// Raised for malformed or truncated archive files.
class ArchiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyTensor = std::variant<Tensor32, Tensor64>;

Dtype dtype_of(const AnyTensor& t);
const Shape& dims_of(const AnyTensor& t);

template <class Scalar>
Tensor<Scalar> as(const AnyTensor& t) {
  return std::visit([](const auto& v) { return v.template cast<Scalar>(); }, t);
}

/// Ordered named-tensor container with the TARC on-disk layout:
///
///   "TARC" | version u32 | count u32 |
///   per tensor: name_len u32 | name (UTF-8) | dtype u8 (0=f32, 1=f64) |
///               ndim u8 | dims u64 × ndim | row-major payload
///
/// All integers and floats little-endian.
class TensorArchive {
 public:
  static constexpr std::uint32_t kVersion = 1;

  struct Entry {
    std::string name;
    AnyTensor tensor;
  };

  void add(std::string name, AnyTensor tensor);
  /// Replace if present, otherwise append.
  void put(std::string name, AnyTensor tensor);

  bool contains(std::string_view name) const { return find(name) != nullptr; }
  const AnyTensor* find(std::string_view name) const;
  const AnyTensor& at(std::string_view name) const;

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  void write(std::ostream& os) const;
  void save(const std::filesystem::path& path) const;

  static TensorArchive read(std::istream& is);
  static TensorArchive load(const std::filesystem::path& path);

 private:
  std::vector<Entry> entries_;
};

}  // namespace trc
