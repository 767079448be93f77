#pragma once

// Closed-form storage and FLOPS models of the TR-convolution layer: exact
// per-permutation counts, full-rank storage upper bounds, and the FLOPS ratio
// against a tensorized-TR layer with uniform rank.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace trc {

struct LayerDims {
  std::uint64_t T = 1, C = 1, D1 = 1, D2 = 1;  // kernel
  std::uint64_t I1 = 1, I2 = 1;                // input spatial
  std::uint64_t out1 = 1, out2 = 1;            // output spatial Ĩ1, Ĩ2
};

/// TR ranks (R1, R2, R3, R4) of the shifted kernel.
using Ranks4 = std::array<std::uint64_t, 4>;

/// Σ of core sizes for the shifted kernel:
///   τ0: R2·C·R3 + R3·D1·R4 + R4·D2·R1 + R1·T·R2
///   τ1: R1·C·R2 + R2·D1·R3 + R3·D2·R4 + R4·T·R1
///   τ2: R4·C·R1 + R1·D1·R2 + R2·D2·R3 + R3·T·R4
///   τ3: R3·C·R4 + R4·D1·R1 + R1·D2·R2 + R2·T·R3
std::uint64_t storage_tr(const Ranks4& r, const LayerDims& d, std::size_t shift);

/// MACs of the four sublayers. With (a, b) the ranks flanking C, c between D1
/// and D2, and d between D2 and T:
///   a·C·b·I1·I2 + b·D1·c·a·Ĩ1·I2 + c·D2·d·a·Ĩ1·Ĩ2 + d·T·a·Ĩ1·Ĩ2
std::uint64_t flops_tr(const Ranks4& r, const LayerDims& d, std::size_t shift);

/// Real-valued bound that remembers whether it is an exact integer.
struct BoundValue {
  long double value = 0;
  std::optional<std::int64_t> exact;

  static BoundValue integer(std::int64_t v) { return {static_cast<long double>(v), v}; }
  static BoundValue real(long double v) { return {v, std::nullopt}; }
  bool integral() const noexcept { return exact.has_value(); }
};

BoundValue operator+(const BoundValue& a, const BoundValue& b);
BoundValue operator*(const BoundValue& a, const BoundValue& b);
BoundValue operator/(const BoundValue& a, const BoundValue& b);
BoundValue min(const BoundValue& a, const BoundValue& b);

/// Valid R1 range for a permutation: τ0 → [1, T], τ1 → [1, C], τ2/τ3 → {1, D}.
std::vector<std::uint64_t> bound_r1_values(std::size_t shift, std::uint64_t T, std::uint64_t C, std::uint64_t D);

/// Piecewise full-rank storage upper bound for a square D×D kernel. Throws
/// std::out_of_range when r1 is outside bound_r1_values(shift, ...).
BoundValue storage_bound(std::size_t shift, std::uint64_t r1, std::uint64_t T, std::uint64_t C, std::uint64_t D);

struct RankChain {
  BoundValue r2, r3, r4;
};

/// Maximal (R2, R3, R4) given R1 when every unfolding has full rank:
/// R1·R2 = min(I1, I2·I3·I4), R3 = min(R2·I2, I3·I4·R1), R4 = min(R3·I3, I4·R1)
/// over the modes of the shifted kernel.
RankChain rank_bounds(std::size_t shift, std::uint64_t r1, std::uint64_t T, std::uint64_t C, std::uint64_t D);

struct TensorizedTRSpec {
  std::uint64_t J1 = 1, J2 = 1, J3 = 1;  // C = J1·J2·J3
  std::uint64_t O1 = 1, O2 = 1, O3 = 1;  // T = O1·O2·O3
  std::uint64_t R = 1;
};

/// R³(J1J2 + C + T + O1O2) + R²(C·I1·I2 + D1·D2·I1·I2 + T·Ĩ1·Ĩ2)
std::uint64_t flops_tensorized_tr(const TensorizedTRSpec& spec, const LayerDims& d);

/// One column of the ResNet-32 layer table used for the FLOPS ratio.
struct RhoLayer {
  std::string name;
  std::uint64_t I1, I2, out1, C, T, D, J1, J2, O1, O2;
};

const std::array<RhoLayer, 5>& resnet32_rho_layers();

/// ρ = (R·D·I1·I2 + R·D·Ĩ1·I2) / (R·(J1J2 + C + T + O1O2) + D²·I1·I2)
double rho(double R, const RhoLayer& layer);

struct CurvePoint {
  std::size_t shift = 0;
  std::uint64_t r1 = 0;
  double normalized_r1 = 0;
  BoundValue bound;
};

/// storage_bound over every valid R1 of every permutation, R1 normalized by
/// its per-permutation maximum.
std::vector<CurvePoint> storage_curves(std::uint64_t T, std::uint64_t C, std::uint64_t D);

/// Columns: permutation,R1,normalized_R1,bound
void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& points);

}  // namespace trc
