#include "trc/netspec.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "trc/tr_svd.hpp"

namespace trc {
namespace {

struct Activation {
  std::uint64_t h, w, c;
};

void add_conv(NetworkSpec& net, std::string name, std::uint64_t T, std::uint64_t C, std::uint64_t D,
              std::size_t stride, std::size_t pad, bool compress, std::string from = {}) {
  net.layers.push_back({std::move(name), LayerKind::conv, T, C, D, D, {stride, pad}, compress, std::move(from)});
}

void add_pool(NetworkSpec& net, std::string name, std::uint64_t channels, std::uint64_t D, std::size_t stride,
              std::size_t pad) {
  net.layers.push_back({std::move(name), LayerKind::pool, channels, channels, D, D, {stride, pad}, false, {}});
}

void add_fc(NetworkSpec& net, std::string name, std::uint64_t in, std::uint64_t out) {
  net.layers.push_back({std::move(name), LayerKind::fc, out, in, 1, 1, {1, 0}, false, {}});
}

// CIFAR ResNets with parameter-free (identity / zero-pad) shortcuts.
NetworkSpec cifar_resnet(std::string name, std::size_t blocks) {
  NetworkSpec net{std::move(name), 32, 32, 3, {}};
  add_conv(net, "conv1", 16, 3, 3, 1, 1, false);
  std::uint64_t channels = 16;
  for (std::size_t stage = 1; stage <= 3; ++stage) {
    const std::uint64_t width = 16u << (stage - 1);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::string prefix = "layer" + std::to_string(stage) + "." + std::to_string(b);
      const std::size_t stride = (stage > 1 && b == 0) ? 2 : 1;
      add_conv(net, prefix + ".conv1", width, channels, 3, stride, 1, true);
      add_conv(net, prefix + ".conv2", width, width, 3, 1, 1, true);
      channels = width;
    }
  }
  add_pool(net, "avgpool", 64, 8, 1, 0);
  add_fc(net, "fc", 64, 10);
  return net;
}

NetworkSpec imagenet_resnet(std::string name, std::array<std::size_t, 4> blocks) {
  NetworkSpec net{std::move(name), 224, 224, 3, {}};
  add_conv(net, "conv1", 64, 3, 7, 2, 3, false);
  add_pool(net, "maxpool", 64, 3, 2, 1);
  std::uint64_t channels = 64;
  std::string block_input = "maxpool";
  for (std::size_t stage = 1; stage <= 4; ++stage) {
    const std::uint64_t width = 64u << (stage - 1);
    for (std::size_t b = 0; b < blocks[stage - 1]; ++b) {
      const std::string prefix = "layer" + std::to_string(stage) + "." + std::to_string(b);
      const std::size_t stride = (stage > 1 && b == 0) ? 2 : 1;
      const std::string input = block_input;
      add_conv(net, prefix + ".conv1", width, channels, 3, stride, 1, true, input);
      add_conv(net, prefix + ".conv2", width, width, 3, 1, 1, true);
      block_input = prefix + ".conv2";
      if (stride != 1 || channels != width) {
        add_conv(net, prefix + ".downsample.0", width, channels, 1, stride, 0, true, input);
        block_input = prefix + ".downsample.0";
      }
      channels = width;
    }
  }
  add_pool(net, "avgpool", 512, 7, 1, 0);
  net.layers.back().from = block_input;
  add_fc(net, "fc", 512, 1000);
  return net;
}

NetworkSpec vgg19_cifar() {
  NetworkSpec net{"vgg19-cifar", 32, 32, 3, {}};
  const int cfg[] = {64, 64, 0, 128, 128, 0, 256, 256, 256, 256, 0, 512, 512, 512, 512, 0, 512, 512, 512, 512, 0};
  std::uint64_t channels = 3;
  std::size_t idx = 0;  // torch Sequential index: conv, bn, relu / pool
  bool first = true;
  for (int v : cfg) {
    const std::string name = "features." + std::to_string(idx);
    if (v == 0) {
      add_pool(net, name, channels, 2, 2, 0);
      idx += 1;
    } else {
      add_conv(net, name, std::uint64_t(v), channels, 3, 1, 1, !first);
      first = false;
      channels = std::uint64_t(v);
      idx += 3;
    }
  }
  add_fc(net, "classifier", 512, 10);
  return net;
}

std::string fmt_count(std::uint64_t v) {
  std::ostringstream os;
  if (v >= 1'000'000'000) {
    os << std::fixed << std::setprecision(2) << double(v) / 1e9 << "G";
  } else if (v >= 1'000'000) {
    os << std::fixed << std::setprecision(2) << double(v) / 1e6 << "M";
  } else if (v >= 1'000) {
    os << std::fixed << std::setprecision(1) << double(v) / 1e3 << "K";
  } else {
    os << v;
  }
  return os.str();
}

}  // namespace

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::fc: return "fc";
    case LayerKind::pool: return "pool";
  }
  return "?";
}

LayerKind layer_kind_from_string(std::string_view s) {
  if (s == "conv") return LayerKind::conv;
  if (s == "fc") return LayerKind::fc;
  if (s == "pool" || s == "maxpool" || s == "avgpool") return LayerKind::pool;
  throw NetSpecError("unknown layer kind '" + std::string(s) + "'");
}

std::vector<LayerDims> resolve(const NetworkSpec& net) {
  if (net.in_h == 0 || net.in_w == 0 || net.in_c == 0) throw NetSpecError(net.name + ": input shape must be positive");
  std::map<std::string, Activation> outputs;
  std::vector<LayerDims> dims;
  Activation prev{net.in_h, net.in_w, net.in_c};
  bool seen_conv = false;

  for (const auto& l : net.layers) {
    if (l.name.empty()) throw NetSpecError(net.name + ": layer without a name");
    if (outputs.count(l.name)) throw NetSpecError(net.name + ": duplicate layer name '" + l.name + "'");
    Activation in = prev;
    if (!l.from.empty()) {
      auto it = outputs.find(l.from);
      if (it == outputs.end()) throw NetSpecError(l.name + ": source layer '" + l.from + "' is not defined earlier");
      in = it->second;
    }

    LayerDims d;
    d.T = l.T;
    d.C = l.C;
    d.D1 = l.D1;
    d.D2 = l.D2;
    d.I1 = in.h;
    d.I2 = in.w;
    Activation out{};
    try {
      switch (l.kind) {
        case LayerKind::conv:
          if (l.C != in.c) {
            throw NetSpecError(l.name + ": expects " + std::to_string(l.C) + " input channels, source provides " +
                               std::to_string(in.c));
          }
          if (!seen_conv && l.compress) throw NetSpecError(l.name + ": the first convolution must not be compressed");
          seen_conv = true;
          d.out1 = conv_output_size(in.h, l.D1, l.geometry);
          d.out2 = conv_output_size(in.w, l.D2, l.geometry);
          out = {d.out1, d.out2, l.T};
          break;
        case LayerKind::pool:
          if (l.C != in.c || l.T != in.c) throw NetSpecError(l.name + ": pool channels must match its source");
          d.out1 = conv_output_size(in.h, l.D1, l.geometry);
          d.out2 = conv_output_size(in.w, l.D2, l.geometry);
          out = {d.out1, d.out2, in.c};
          break;
        case LayerKind::fc:
          if (l.C != in.c * in.h * in.w) {
            throw NetSpecError(l.name + ": expects " + std::to_string(l.C) + " inputs, source provides " +
                               std::to_string(in.c * in.h * in.w));
          }
          d.out1 = d.out2 = 1;
          out = {1, 1, l.T};
          break;
      }
    } catch (const NetSpecError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw NetSpecError(l.name + ": " + e.what());
    }
    if (l.T == 0 || l.C == 0 || l.D1 == 0 || l.D2 == 0) throw NetSpecError(l.name + ": dims must be positive");
    outputs[l.name] = out;
    prev = out;
    dims.push_back(d);
  }
  return dims;
}

std::vector<std::string> builtin_network_names() {
  return {"resnet20", "resnet32", "resnet56", "vgg19-cifar", "resnet18", "resnet34"};
}

NetworkSpec builtin_network(std::string_view name) {
  if (name == "resnet20") return cifar_resnet("resnet20", 3);
  if (name == "resnet32") return cifar_resnet("resnet32", 5);
  if (name == "resnet56") return cifar_resnet("resnet56", 9);
  if (name == "vgg19-cifar" || name == "vgg19") return vgg19_cifar();
  if (name == "resnet18") return imagenet_resnet("resnet18", {2, 2, 2, 2});
  if (name == "resnet34") return imagenet_resnet("resnet34", {3, 4, 6, 3});
  throw NetSpecError("unknown network '" + std::string(name) + "'");
}

NetworkSpec network_from_json(const nlohmann::json& j) {
  try {
    NetworkSpec net;
    net.name = j.at("name").get<std::string>();
    const auto& in = j.at("input");
    if (!in.is_array() || in.size() != 3) throw NetSpecError("'input' must be [H, W, C]");
    net.in_h = in[0].get<std::uint64_t>();
    net.in_w = in[1].get<std::uint64_t>();
    net.in_c = in[2].get<std::uint64_t>();
    for (const auto& lj : j.at("layers")) {
      LayerSpec l;
      l.name = lj.at("name").get<std::string>();
      l.kind = layer_kind_from_string(lj.at("kind").get<std::string>());
      l.T = lj.value("T", std::uint64_t{1});
      l.C = lj.value("C", std::uint64_t{1});
      l.D1 = lj.value("D1", std::uint64_t{1});
      l.D2 = lj.value("D2", l.D1);
      l.geometry.stride = lj.value("stride", std::size_t{1});
      l.geometry.pad = lj.value("padding", std::size_t{0});
      l.compress = lj.value("compress", false);
      l.from = lj.value("from", std::string{});
      net.layers.push_back(std::move(l));
    }
    resolve(net);
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw NetSpecError(std::string("malformed network JSON: ") + e.what());
  }
}

nlohmann::json to_json(const NetworkSpec& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    nlohmann::json lj{{"name", l.name}, {"kind", to_string(l.kind)}, {"T", l.T}, {"C", l.C}, {"D1", l.D1},
                      {"D2", l.D2},     {"stride", l.geometry.stride}, {"padding", l.geometry.pad},
                      {"compress", l.compress}};
    if (!l.from.empty()) lj["from"] = l.from;
    layers.push_back(std::move(lj));
  }
  return {{"name", net.name}, {"input", {net.in_h, net.in_w, net.in_c}}, {"layers", std::move(layers)}};
}

LayerCounts layer_counts(const LayerSpec& l, const LayerDims& d) {
  LayerCounts c;
  switch (l.kind) {
    case LayerKind::conv:
      c.weight_params = l.T * l.C * l.D1 * l.D2;
      c.aux_params = 2 * l.T;
      c.flops = c.weight_params * d.out1 * d.out2;
      break;
    case LayerKind::fc:
      c.weight_params = l.T * l.C;
      c.aux_params = l.T;
      c.flops = l.T * l.C;
      break;
    case LayerKind::pool:
      break;
  }
  return c;
}

NetworkCounts baseline_counts(const NetworkSpec& net) {
  const auto dims = resolve(net);
  NetworkCounts total;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto c = layer_counts(net.layers[i], dims[i]);
    total.params += c.params();
    total.flops += c.flops;
  }
  return total;
}

double pcr(std::uint64_t baseline_params, std::uint64_t compressed_params) {
  if (compressed_params == 0) throw std::invalid_argument("pcr: compressed parameter count is zero");
  return double(baseline_params) / double(compressed_params);
}

double fcr(std::uint64_t baseline_flops, std::uint64_t compressed_flops) {
  if (compressed_flops == 0) throw std::invalid_argument("fcr: compressed FLOPS count is zero");
  return double(baseline_flops) / double(compressed_flops);
}

bool is_compressible(const NetworkSpec& net, std::size_t i, const CompressOptions& opts) {
  const auto& l = net.layers.at(i);
  if (l.kind != LayerKind::conv || !l.compress) return false;
  for (std::size_t j = 0; j < i; ++j) {
    if (net.layers[j].kind == LayerKind::conv) return l.D1 * l.D2 > 1 || opts.include_1x1;
  }
  return false;  // first convolution
}

std::pair<TensorArchive, CompressionReport> compress_network(const TensorArchive& weights, const NetworkSpec& net,
                                                             const CompressOptions& opts) {
  const auto dims = resolve(net);
  TensorArchive out;
  CompressionReport report;
  report.network = net.name;
  report.eps_p = opts.eps_p;

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    if (l.kind == LayerKind::pool) continue;
    LayerReport row;
    row.name = l.name;
    row.kind = l.kind;
    row.original = layer_counts(l, dims[i]);
    row.compressed_weight_params = row.original.weight_params;
    row.compressed_flops = row.original.flops;

    const AnyTensor* w = weights.find(l.name);
    if (is_compressible(net, i, opts)) {
      if (!w) throw NetSpecError("weights archive has no tensor for layer '" + l.name + "'");
      const Shape expect{l.T, l.C, l.D1, l.D2};
      if (dims_of(*w) != expect) {
        throw NetSpecError("tensor '" + l.name + "' has dims " + shape_string(dims_of(*w)) + ", layer expects " +
                           shape_string(expect));
      }
      const auto start = std::chrono::steady_clock::now();
      const SearchResult sr = rsdtr_search(as<double>(*w), opts.eps_p);
      if (opts.time) row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      const auto r = sr.cores.ranks();
      row.compressed = true;
      row.shift = sr.shift;
      row.r1 = sr.r1;
      row.leading_rank = sr.leading_rank;
      row.ranks = {r[0], r[1], r[2], r[3]};
      row.achieved_rel_error = sr.achieved_rel_error;
      row.candidates = sr.candidates_evaluated;
      row.compressed_weight_params = storage_tr(row.ranks, dims[i], sr.shift);
      row.compressed_flops = flops_tr(row.ranks, dims[i], sr.shift);
      write_cores(out, sr.cores, l.name + "/");
    } else if (w) {
      out.add(l.name, *w);
    }
    report.layers.push_back(std::move(row));
  }

  for (const auto& row : report.layers) {
    report.baseline_params += row.original.params();
    report.baseline_flops += row.original.flops;
    report.compressed_params += row.compressed_params();
    report.compressed_flops += row.compressed_flops;
  }
  report.pcr = pcr(report.baseline_params, report.compressed_params);
  report.fcr = fcr(report.baseline_flops, report.compressed_flops);
  return {std::move(out), std::move(report)};
}

TensorArchive synthetic_weights(const NetworkSpec& net, std::uint64_t seed, Dtype dtype) {
  resolve(net);
  std::mt19937_64 rng(seed);
  TensorArchive ar;
  for (const auto& l : net.layers) {
    if (l.kind == LayerKind::pool) continue;
    const Shape dims = l.kind == LayerKind::conv ? Shape{l.T, l.C, l.D1, l.D2} : Shape{l.T, l.C};
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / double(l.C * l.D1 * l.D2)));
    Tensor64 t(dims);
    for (auto& v : t.data()) v = normal(rng);
    if (dtype == Dtype::f32) {
      ar.add(l.name, t.cast<float>());
    } else {
      ar.add(l.name, std::move(t));
    }
  }
  return ar;
}

std::uint64_t archive_parameter_count(const TensorArchive& ar) {
  std::uint64_t total = 0;
  for (const auto& e : ar.entries()) {
    const bool meta = e.name == "meta" || (e.name.size() > 5 && e.name.ends_with("/meta"));
    if (!meta) total += shape_size(dims_of(e.tensor));
  }
  return total;
}

nlohmann::json to_json(const CompressionReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& row : r.layers) {
    nlohmann::json lj{{"name", row.name},
                      {"kind", to_string(row.kind)},
                      {"compressed", row.compressed},
                      {"original_params", row.original.params()},
                      {"original_weight_params", row.original.weight_params},
                      {"original_flops", row.original.flops},
                      {"compressed_params", row.compressed_params()},
                      {"compressed_weight_params", row.compressed_weight_params},
                      {"compressed_flops", row.compressed_flops}};
    if (row.compressed) {
      lj["shift"] = row.shift;
      lj["r1"] = row.r1;
      lj["leading_rank"] = row.leading_rank;
      lj["ranks"] = row.ranks;
      lj["achieved_rel_error"] = row.achieved_rel_error;
      lj["candidates"] = row.candidates;
      if (row.seconds > 0) lj["seconds"] = row.seconds;
    }
    layers.push_back(std::move(lj));
  }
  return {{"network", r.network},
          {"eps_p", r.eps_p},
          {"layers", std::move(layers)},
          {"totals",
           {{"baseline_params", r.baseline_params},
            {"baseline_flops", r.baseline_flops},
            {"compressed_params", r.compressed_params},
            {"compressed_flops", r.compressed_flops}}},
          {"pcr", r.pcr},
          {"fcr", r.fcr}};
}

std::string format_table(const CompressionReport& r) {
  std::ostringstream os;
  os << r.network << "  eps_p=" << r.eps_p << "\n";
  os << std::left << std::setw(24) << "layer" << std::right << std::setw(10) << "params" << std::setw(12) << "flops"
     << std::setw(6) << "perm" << std::setw(6) << "R1" << std::setw(20) << "ranks" << std::setw(10) << "params'"
     << std::setw(12) << "flops'" << std::setw(10) << "rel.err";
  const bool timed = std::any_of(r.layers.begin(), r.layers.end(), [](const auto& l) { return l.seconds > 0; });
  if (timed) os << std::setw(9) << "sec";
  os << "\n";
  for (const auto& l : r.layers) {
    os << std::left << std::setw(24) << l.name << std::right << std::setw(10) << fmt_count(l.original.params())
       << std::setw(12) << fmt_count(l.original.flops);
    if (l.compressed) {
      std::ostringstream ranks;
      ranks << l.ranks[0] << ',' << l.ranks[1] << ',' << l.ranks[2] << ',' << l.ranks[3];
      os << std::setw(6) << ("t" + std::to_string(l.shift)) << std::setw(6) << l.r1 << std::setw(20) << ranks.str();
    } else {
      os << std::setw(6) << "-" << std::setw(6) << "-" << std::setw(20) << "-";
    }
    os << std::setw(10) << fmt_count(l.compressed_params()) << std::setw(12) << fmt_count(l.compressed_flops);
    if (l.compressed) {
      os << std::setw(10) << std::fixed << std::setprecision(4) << l.achieved_rel_error << std::defaultfloat;
    } else {
      os << std::setw(10) << "-";
    }
    if (timed) os << std::setw(9) << std::fixed << std::setprecision(3) << l.seconds << std::defaultfloat;
    os << "\n";
  }
  os << std::left << std::setw(24) << "total" << std::right << std::setw(10) << fmt_count(r.baseline_params)
     << std::setw(12) << fmt_count(r.baseline_flops) << std::setw(32) << "" << std::setw(10)
     << fmt_count(r.compressed_params) << std::setw(12) << fmt_count(r.compressed_flops) << "\n";
  os << "PCR " << std::fixed << std::setprecision(3) << r.pcr << "  FCR " << r.fcr << "\n";
  return os.str();
}

std::vector<SelectionBin> selection_histogram(const CompressionReport& report) {
  std::map<std::pair<std::size_t, std::string>, std::size_t> bins;
  std::size_t total = 0;
  for (const auto& l : report.layers) {
    if (!l.compressed) continue;
    const std::string regime = l.r1 == 1 ? "R1=1" : (l.r1 == l.leading_rank ? "R1=rank" : "1<R1<rank");
    ++bins[{l.shift, regime}];
    ++total;
  }
  std::vector<SelectionBin> out;
  for (const auto& [k, n] : bins) out.push_back({k.first, k.second, n, total ? double(n) / double(total) : 0.0});
  return out;
}

}  // namespace trc
