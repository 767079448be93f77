#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trc/archive.hpp"
#include "trc/complexity.hpp"
#include "trc/conv.hpp"

namespace trc {

class NetSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class LayerKind { conv, fc, pool };

std::string_view to_string(LayerKind k);
LayerKind layer_kind_from_string(std::string_view s);

/// One layer. For conv: T×C×D1×D2 kernel. For fc: C inputs, T outputs. For
/// pool: T == C == channels and D1×D2 the window. `from` names the layer whose
/// output feeds this one; empty means the previous layer (or the network input).
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv;
  std::uint64_t T = 1, C = 1, D1 = 1, D2 = 1;
  ConvGeometry geometry;
  bool compress = false;
  std::string from;
};

struct NetworkSpec {
  std::string name;
  std::uint64_t in_h = 1, in_w = 1, in_c = 1;
  std::vector<LayerSpec> layers;
};

/// Checks the spatial/channel chain and the first-convolution exemption, and
/// returns each layer's LayerDims (input and output spatial extents filled in).
std::vector<LayerDims> resolve(const NetworkSpec& net);

std::vector<std::string> builtin_network_names();
/// resnet20, resnet32, resnet56, vgg19-cifar, resnet18, resnet34
NetworkSpec builtin_network(std::string_view name);

NetworkSpec network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkSpec& net);

struct LayerCounts {
  std::uint64_t weight_params = 0;  // kernel / matrix entries
  std::uint64_t aux_params = 0;     // batch-norm scale+shift (conv) or bias (fc)
  std::uint64_t flops = 0;          // MACs
  std::uint64_t params() const noexcept { return weight_params + aux_params; }
};

LayerCounts layer_counts(const LayerSpec& layer, const LayerDims& dims);

struct NetworkCounts {
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
};

NetworkCounts baseline_counts(const NetworkSpec& net);

double pcr(std::uint64_t baseline_params, std::uint64_t compressed_params);
double fcr(std::uint64_t baseline_flops, std::uint64_t compressed_flops);

struct LayerReport {
  std::string name;
  LayerKind kind = LayerKind::conv;
  bool compressed = false;
  LayerCounts original;
  std::uint64_t compressed_weight_params = 0;
  std::uint64_t compressed_flops = 0;
  std::size_t shift = 0;
  std::size_t r1 = 0;
  std::size_t leading_rank = 0;
  Ranks4 ranks{};
  double achieved_rel_error = 0.0;
  std::size_t candidates = 0;
  double seconds = 0.0;

  std::uint64_t compressed_params() const noexcept { return compressed_weight_params + original.aux_params; }
};

struct CompressionReport {
  std::string network;
  double eps_p = 0.0;
  std::vector<LayerReport> layers;
  std::uint64_t baseline_params = 0, baseline_flops = 0;
  std::uint64_t compressed_params = 0, compressed_flops = 0;
  double pcr = 1.0, fcr = 1.0;
};

struct CompressOptions {
  double eps_p = 0.0;
  bool include_1x1 = false;
  bool time = false;
};

/// Whether compress_network will decompose this layer.
bool is_compressible(const NetworkSpec& net, std::size_t layer_index, const CompressOptions& opts);

/// Decomposes every eligible convolution kernel with rsdtr_search. Eligible
/// layers are written as "<layer>/core0..3" + "<layer>/meta"; every other
/// archive tensor is copied through unchanged.
std::pair<TensorArchive, CompressionReport> compress_network(const TensorArchive& weights, const NetworkSpec& net,
                                                             const CompressOptions& opts);

/// Seeded He-normal weights for every conv (T×C×D1×D2) and fc (T×C) layer.
TensorArchive synthetic_weights(const NetworkSpec& net, std::uint64_t seed, Dtype dtype = Dtype::f64);

/// Element count of all tensors except TR metadata entries.
std::uint64_t archive_parameter_count(const TensorArchive& ar);

nlohmann::json to_json(const CompressionReport& report);
std::string format_table(const CompressionReport& report);

/// Frequency of selected (permutation, R1 regime) pairs over compressed
/// layers. Regime is "R1=1", "R1=rank" (R1 equals the δ1-rank) or "1<R1<rank".
struct SelectionBin {
  std::size_t shift = 0;
  std::string regime;
  std::size_t count = 0;
  double frequency = 0.0;
};
std::vector<SelectionBin> selection_histogram(const CompressionReport& report);

}  // namespace trc
