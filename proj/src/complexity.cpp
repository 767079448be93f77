#include "trc/complexity.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace trc {
namespace {

void check_shift(std::size_t shift) {
  if (shift >= 4) throw std::out_of_range("permutation index must be 0..3, got " + std::to_string(shift));
}

BoundValue num(std::uint64_t v) { return BoundValue::integer(static_cast<std::int64_t>(v)); }
BoundValue sq(const BoundValue& v) { return v * v; }

std::array<std::uint64_t, 4> shifted_kernel_dims(std::size_t shift, std::uint64_t T, std::uint64_t C,
                                                  std::uint64_t D) {
  const std::array<std::uint64_t, 4> dims{T, C, D, D};
  return {dims[shift % 4], dims[(shift + 1) % 4], dims[(shift + 2) % 4], dims[(shift + 3) % 4]};
}

}  // namespace

BoundValue operator+(const BoundValue& a, const BoundValue& b) {
  if (a.exact && b.exact) return BoundValue::integer(*a.exact + *b.exact);
  return BoundValue::real(a.value + b.value);
}

BoundValue operator*(const BoundValue& a, const BoundValue& b) {
  if (a.exact && b.exact) return BoundValue::integer(*a.exact * *b.exact);
  return BoundValue::real(a.value * b.value);
}

BoundValue operator/(const BoundValue& a, const BoundValue& b) {
  if (a.exact && b.exact && *b.exact != 0 && *a.exact % *b.exact == 0) return BoundValue::integer(*a.exact / *b.exact);
  return BoundValue::real(a.value / b.value);
}

BoundValue min(const BoundValue& a, const BoundValue& b) { return a.value <= b.value ? a : b; }

std::uint64_t storage_tr(const Ranks4& r, const LayerDims& d, std::size_t shift) {
  check_shift(shift);
  const auto [R1, R2, R3, R4] = r;
  switch (shift) {
    case 0: return R2 * d.C * R3 + R3 * d.D1 * R4 + R4 * d.D2 * R1 + R1 * d.T * R2;
    case 1: return R1 * d.C * R2 + R2 * d.D1 * R3 + R3 * d.D2 * R4 + R4 * d.T * R1;
    // output core here is R3×T×R4
    case 2: return R4 * d.C * R1 + R1 * d.D1 * R2 + R2 * d.D2 * R3 + R3 * d.T * R4;
    default: return R3 * d.C * R4 + R4 * d.D1 * R1 + R1 * d.D2 * R2 + R2 * d.T * R3;
  }
}

std::uint64_t flops_tr(const Ranks4& r, const LayerDims& d, std::size_t shift) {
  check_shift(shift);
  const auto [R1, R2, R3, R4] = r;
  const std::uint64_t in = d.I1 * d.I2, mid = d.out1 * d.I2, out = d.out1 * d.out2;
  switch (shift) {
    case 0: return R2 * d.C * R3 * in + R3 * d.D1 * R4 * R2 * mid + R4 * d.D2 * R1 * R2 * out + R1 * d.T * R2 * out;
    case 1: return R1 * d.C * R2 * in + R2 * d.D1 * R3 * R1 * mid + R3 * d.D2 * R4 * R1 * out + R4 * d.T * R1 * out;
    case 2: return R4 * d.C * R1 * in + R1 * d.D1 * R2 * R4 * mid + R2 * d.D2 * R3 * R4 * out + R3 * d.T * R4 * out;
    default: return R3 * d.C * R4 * in + R4 * d.D1 * R1 * R3 * mid + R1 * d.D2 * R2 * R3 * out + R2 * d.T * R3 * out;
  }
}

std::vector<std::uint64_t> bound_r1_values(std::size_t shift, std::uint64_t T, std::uint64_t C, std::uint64_t D) {
  check_shift(shift);
  std::vector<std::uint64_t> out;
  if (shift >= 2) {
    out = {1};
    if (D != 1) out.push_back(D);
    return out;
  }
  const std::uint64_t top = shift == 0 ? T : C;
  for (std::uint64_t r = 1; r <= top; ++r) out.push_back(r);
  return out;
}

BoundValue storage_bound(std::size_t shift, std::uint64_t r1, std::uint64_t T, std::uint64_t C, std::uint64_t D) {
  check_shift(shift);
  const auto t = num(T), c = num(C), d = num(D), r = num(r1);
  const auto ctd2 = c * t * sq(d);
  switch (shift) {
    case 0: {
      if (r1 < 1 || r1 > T) throw std::out_of_range("τ0 bound needs R1 in [1, T]");
      if (r1 * r1 * D * D <= T * C) return sq(t) + t * sq(d) * c + (sq(sq(d)) + sq(d)) * sq(r);  // R1 ≤ √(TC)/D
      if (r1 * r1 < T * C) return sq(t) + sq(t * c / r) + ctd2 + sq(d * r);                       // R1 < √(TC)
      return sq(t) + sq(t * c / r) + sq(t * c * d / r) + ctd2;
    }
    case 1: {
      if (r1 < 1 || r1 > C) throw std::out_of_range("τ1 bound needs R1 in [1, C]");
      if (r1 * r1 * T <= D * D * C) return sq(c) + sq(c * d / r) + ctd2 + sq(t * r);  // R1 ≤ D·√(C/T)
      return sq(c) + sq(c * d / r) + sq(c * sq(d) / r) + ctd2;
    }
    case 2: {
      if (r1 == 1) return sq(d) + sq(sq(d)) + ctd2 + sq(c);
      if (r1 == D) return num(2) * sq(d) + ctd2 + sq(d * c);
      throw std::out_of_range("τ2 bound needs R1 in {1, D}");
    }
    default: {
      if (r1 == 1) return num(2) * sq(d) + ctd2 + sq(d * c);
      if (r1 == D) return sq(d) + sq(sq(d)) + ctd2 + sq(t);
      throw std::out_of_range("τ3 bound needs R1 in {1, D}");
    }
  }
}

RankChain rank_bounds(std::size_t shift, std::uint64_t r1, std::uint64_t T, std::uint64_t C, std::uint64_t D) {
  check_shift(shift);
  if (r1 == 0) throw std::out_of_range("R1 must be positive");
  const auto I = shifted_kernel_dims(shift, T, C, D);
  const auto r = num(r1);
  RankChain chain;
  chain.r2 = min(num(I[0]), num(I[1] * I[2] * I[3])) / r;
  chain.r3 = min(chain.r2 * num(I[1]), num(I[2] * I[3]) * r);
  chain.r4 = min(chain.r3 * num(I[2]), num(I[3]) * r);
  return chain;
}

std::uint64_t flops_tensorized_tr(const TensorizedTRSpec& s, const LayerDims& d) {
  if (s.J1 * s.J2 * s.J3 != d.C) throw std::invalid_argument("tensorized TR: J1·J2·J3 must equal C");
  if (s.O1 * s.O2 * s.O3 != d.T) throw std::invalid_argument("tensorized TR: O1·O2·O3 must equal T");
  const std::uint64_t R = s.R;
  return R * R * R * (s.J1 * s.J2 + d.C + d.T + s.O1 * s.O2) +
         R * R * (d.C * d.I1 * d.I2 + d.D1 * d.D2 * d.I1 * d.I2 + d.T * d.out1 * d.out2);
}

const std::array<RhoLayer, 5>& resnet32_rho_layers() {
  static const std::array<RhoLayer, 5> layers{{
      {"L1", 32, 32, 32, 16, 16, 3, 4, 2, 4, 2},
      {"L2", 32, 32, 16, 16, 32, 3, 4, 4, 4, 4},
      {"L3", 16, 16, 16, 32, 32, 3, 4, 4, 4, 4},
      {"L4", 16, 16, 8, 32, 64, 3, 4, 4, 4, 4},
      {"L5", 8, 8, 8, 64, 64, 3, 4, 4, 4, 4},
  }};
  return layers;
}

double rho(double R, const RhoLayer& l) {
  if (!(R >= 1.0)) throw std::invalid_argument("rho: rank must be >= 1");
  const double D = double(l.D);
  const double num = R * D * double(l.I1 * l.I2) + R * D * double(l.out1 * l.I2);
  const double den = R * double(l.J1 * l.J2 + l.C + l.T + l.O1 * l.O2) + D * D * double(l.I1 * l.I2);
  return num / den;
}

std::vector<CurvePoint> storage_curves(std::uint64_t T, std::uint64_t C, std::uint64_t D) {
  std::vector<CurvePoint> points;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto r1s = bound_r1_values(k, T, C, D);
    const double top = double(r1s.back());
    for (auto r1 : r1s) points.push_back({k, r1, double(r1) / top, storage_bound(k, r1, T, C, D)});
  }
  return points;
}

void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& points) {
  os << "permutation,R1,normalized_R1,bound\n";
  for (const auto& p : points) {
    os << "tau" << p.shift << ',' << p.r1 << ',' << std::setprecision(10) << p.normalized_r1 << ',';
    if (p.bound.exact) {
      os << *p.bound.exact;
    } else {
      os << std::setprecision(17) << static_cast<double>(p.bound.value);
    }
    os << '\n';
  }
}

}  // namespace trc
