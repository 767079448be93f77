#include "trc/archive.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace trc {
namespace {

constexpr std::array<char, 4> kMagic{'T', 'A', 'R', 'C'};

template <class U>
void put_le(std::ostream& os, U v) {
  static_assert(std::is_unsigned_v<U>);
  std::array<char, sizeof(U)> buf;
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(buf.data(), buf.size());
}

template <class U>
U get_le(std::istream& is, const char* what) {
  std::array<unsigned char, sizeof(U)> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    throw ArchiveError(std::string("truncated archive while reading ") + what);
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

template <class Scalar>
void write_payload(std::ostream& os, const Tensor<Scalar>& t) {
  using Bits = std::conditional_t<sizeof(Scalar) == 4, std::uint32_t, std::uint64_t>;
  for (auto v : t.data()) put_le<Bits>(os, std::bit_cast<Bits>(v));
}

template <class Scalar>
Tensor<Scalar> read_payload(std::istream& is, Shape dims) {
  using Bits = std::conditional_t<sizeof(Scalar) == 4, std::uint32_t, std::uint64_t>;
  std::vector<Scalar> data(shape_size(dims));
  for (auto& v : data) v = std::bit_cast<Scalar>(get_le<Bits>(is, "tensor payload"));
  return Tensor<Scalar>(std::move(dims), std::move(data));
}

}  // namespace

Dtype dtype_of(const AnyTensor& t) {
  return std::holds_alternative<Tensor32>(t) ? Dtype::f32 : Dtype::f64;
}

const Shape& dims_of(const AnyTensor& t) {
  return std::visit([](const auto& v) -> const Shape& { return v.dims(); }, t);
}

void TensorArchive::add(std::string name, AnyTensor tensor) {
  if (contains(name)) throw ArchiveError("duplicate tensor name '" + name + "'");
  entries_.push_back({std::move(name), std::move(tensor)});
}

void TensorArchive::put(std::string name, AnyTensor tensor) {
  for (auto& e : entries_) {
    if (e.name == name) {
      e.tensor = std::move(tensor);
      return;
    }
  }
  entries_.push_back({std::move(name), std::move(tensor)});
}

const AnyTensor* TensorArchive::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

const AnyTensor& TensorArchive::at(std::string_view name) const {
  if (const auto* t = find(name)) return *t;
  throw ArchiveError("archive has no tensor named '" + std::string(name) + "'");
}

void TensorArchive::write(std::ostream& os) const {
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    const auto& dims = dims_of(e.tensor);
    if (dims.size() > 255) throw ArchiveError("tensor '" + e.name + "' has more than 255 modes");
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(dtype_of(e.tensor)));
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) put_le<std::uint64_t>(os, d);
    std::visit([&](const auto& t) { write_payload(os, t); }, e.tensor);
  }
  if (!os) throw ArchiveError("failed writing archive");
}

void TensorArchive::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArchiveError("cannot open '" + path.string() + "' for writing");
  write(os);
}

TensorArchive TensorArchive::read(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw ArchiveError("not a TARC archive (bad magic)");
  const auto version = get_le<std::uint32_t>(is, "version");
  if (version != kVersion) throw ArchiveError("unsupported TARC version " + std::to_string(version));
  const auto count = get_le<std::uint32_t>(is, "tensor count");

  TensorArchive ar;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get_le<std::uint32_t>(is, "name length");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw ArchiveError("truncated archive while reading tensor name");
    const auto dtype = get_le<std::uint8_t>(is, "dtype");
    const auto ndim = get_le<std::uint8_t>(is, "ndim");
    if (ndim == 0) throw ArchiveError("tensor '" + name + "' has zero modes");
    Shape dims(ndim);
    for (auto& d : dims) {
      d = get_le<std::uint64_t>(is, "dims");
      if (d == 0) throw ArchiveError("tensor '" + name + "' has a zero-sized mode");
    }
    switch (dtype) {
      case 0: ar.add(std::move(name), read_payload<float>(is, std::move(dims))); break;
      case 1: ar.add(std::move(name), read_payload<double>(is, std::move(dims))); break;
      default: throw ArchiveError("tensor '" + name + "' has unknown dtype byte " + std::to_string(dtype));
    }
  }
  return ar;
}

TensorArchive TensorArchive::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArchiveError("cannot open '" + path.string() + "'");
  return read(is);
}

}  // namespace trc
