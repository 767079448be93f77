// trcomp: decompose kernels, compress networks, and audit the TR-convolution
// models from the command line.
//
// Exit codes: 0 ok, 1 usage, 2 data/contract error, 3 verification failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trc/archive.hpp"
#include "trc/complexity.hpp"
#include "trc/conv.hpp"
#include "trc/kernels.hpp"
#include "trc/netspec.hpp"
#include "trc/tensor.hpp"
#include "trc/tr_conv.hpp"
#include "trc/tr_model.hpp"
#include "trc/tr_svd.hpp"

namespace {

using nlohmann::json;
using namespace trc;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kVerifyFailed = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  double eps = 0.1;
  std::string network;
  std::string spec;
  std::string weights;
  std::string out;
  std::string report;
  std::string dtype = "f64";
  std::uint64_t seed = 0;
  bool include_1x1 = false;
  int threads = 0;
  bool time = false;
};

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw UsageError("--eps must lie in [0, 1), got " + std::to_string(eps));
}

void check_readable(const std::string& path, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError(std::string(what) + " not readable: " + path);
}

void check_writable(const std::string& path) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::app);
  if (!f) throw UsageError("cannot write " + path);
}

Dtype parse_dtype(const std::string& s) { return s == "f32" ? Dtype::f32 : Dtype::f64; }

NetworkSpec load_network(const Common& c) {
  if (!c.spec.empty()) {
    check_readable(c.spec, "--spec");
    std::ifstream f(c.spec);
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw NetSpecError(std::string("malformed spec JSON: ") + e.what());
    }
    return network_from_json(j);
  }
  if (c.network.empty()) throw UsageError("one of --network or --spec is required");
  return builtin_network(c.network);
}

TensorArchive load_or_synthesize(const Common& c, const NetworkSpec& net) {
  if (!c.weights.empty()) {
    check_readable(c.weights, "--weights");
    return TensorArchive::load(c.weights);
  }
  return synthetic_weights(net, c.seed, parse_dtype(c.dtype));
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

json ranks_json(const Shape& r) { return json(std::vector<std::size_t>(r.begin(), r.end())); }

// ------------------------------------------------------------------ decompose

struct DecomposeArgs {
  std::string tensor;
  std::vector<std::size_t> shape{16, 16, 3, 3};
};

int cmd_decompose(const Common& c, const DecomposeArgs& a) {
  check_eps(c.eps);
  check_writable(c.out);
  Tensor64 w;
  std::string source;
  if (!c.weights.empty()) {
    if (a.tensor.empty()) throw UsageError("--tensor is required with --weights");
    check_readable(c.weights, "--weights");
    const auto ar = TensorArchive::load(c.weights);
    const auto* t = ar.find(a.tensor);
    if (!t) throw ArchiveError("no tensor named '" + a.tensor + "' in " + c.weights);
    w = as<double>(*t);
    source = c.weights + ":" + a.tensor;
  } else {
    if (a.shape.size() != 4) throw UsageError("--shape needs four extents T,C,D1,D2");
    w = Tensor64(Shape(a.shape.begin(), a.shape.end()));
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : w.data()) v = normal(rng);
    source = "synthetic:" + shape_string(w.dims()) + ":seed=" + std::to_string(c.seed);
  }

  const auto res = rsdtr_search(w, c.eps);
  if (!c.out.empty()) {
    TensorArchive out;
    write_cores(out, res.cores);
    out.save(c.out);
  }
  json s;
  s["source"] = source;
  s["dims"] = ranks_json(w.dims());
  s["eps"] = c.eps;
  s["shift"] = res.shift;
  s["r1"] = res.r1;
  s["ranks"] = ranks_json(res.cores.ranks());
  s["storage"] = res.storage;
  s["original_storage"] = w.size();
  s["achieved_rel_error"] = res.achieved_rel_error;
  s["leading_rank"] = res.leading_rank;
  s["candidates_evaluated"] = res.candidates_evaluated;
  std::cout << s.dump(2) << "\n";
  return kOk;
}

// ------------------------------------------------------------------- compress

int cmd_compress(const Common& c) {
  check_eps(c.eps);
  check_writable(c.out);
  check_writable(c.report);
  const auto net = load_network(c);
  const auto weights = load_or_synthesize(c, net);
  CompressOptions opts;
  opts.eps_p = c.eps;
  opts.include_1x1 = c.include_1x1;
  opts.time = c.time;
  auto [archive, report] = compress_network(weights, net, opts);
  if (!c.out.empty()) archive.save(c.out);
  if (!c.report.empty()) emit(c.report, to_json(report).dump(2) + "\n");
  std::cout << format_table(report);
  return kOk;
}

// --------------------------------------------------------------------- curves

struct CurvesArgs {
  std::uint64_t T = 256, C = 256, D = 3;
};

int cmd_curves(const Common& c, const CurvesArgs& a) {
  check_writable(c.out);
  const auto points = storage_curves(a.T, a.C, a.D);
  std::ostringstream os;
  write_curves_csv(os, points);
  emit(c.out, os.str());
  return kOk;
}

// ------------------------------------------------------------------------ rho

struct RhoArgs {
  std::uint64_t r_max = 30;
  std::string layer;
};

int cmd_rho(const Common& c, const RhoArgs& a) {
  check_writable(c.out);
  if (a.r_max == 0) throw UsageError("--max-rank must be positive");
  std::ostringstream os;
  os << "layer,R,rho\n" << std::setprecision(12);
  bool any = false;
  for (const auto& l : resnet32_rho_layers()) {
    if (!a.layer.empty() && l.name != a.layer) continue;
    any = true;
    for (std::uint64_t r = 1; r <= a.r_max; ++r) os << l.name << "," << r << "," << rho(double(r), l) << "\n";
  }
  if (!any) throw UsageError("unknown layer '" + a.layer + "'");
  emit(c.out, os.str());
  return kOk;
}

// --------------------------------------------------------------------- verify

struct VerifyArgs {
  std::vector<std::size_t> shape{8, 6, 3, 3};
  std::size_t size = 9;
  std::vector<double> eps_list{0.0, 0.5};
  std::string cores;
  std::string tensor;
};

struct CellMatrix {
  std::vector<std::string> failures;
  std::size_t cells = 0;

  void cell(const std::string& label, bool ok, const std::string& detail) {
    ++cells;
    std::cout << (ok ? "PASS " : "FAIL ") << label << "  " << detail << "\n";
    if (!ok) failures.push_back(label);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

template <class Scalar>
double pipeline_error(const TRCores& cores, const ConvGeometry& g, std::size_t size, std::uint64_t seed,
                      std::uint64_t* macs) {
  const TRConvLayer layer(cores, g);
  Tensor<Scalar> x({size, size, layer.channels()});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : x.data()) v = static_cast<Scalar>(normal(rng));
  const auto kernel = tr_reconstruct_original(cores).template cast<Scalar>();
  const auto ref = conv2d_direct(x, kernel, g);
  const auto got = tr_convolution(x, layer);
  *macs = got.flops.total();
  return relative_error(got.output, ref);
}

// Equivalence and FLOPS cells for every shift × stride × padding.
void verify_pipeline(CellMatrix& m, const TRCores& cores, const VerifyArgs& a, Dtype dtype, std::uint64_t seed,
                     const std::string& tag) {
  const double tol = dtype == Dtype::f64 ? 1e-10 : 1e-4;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto rot = rotate_cores(cores, (s + 4 - cores.shift) % 4);
    for (std::size_t stride : {1, 2}) {
      for (std::size_t pad : {0, 1}) {
        const ConvGeometry g{stride, pad};
        std::ostringstream label;
        label << tag << " shift=" << s << " stride=" << stride << " pad=" << pad;
        std::uint64_t macs = 0;
        const double err = dtype == Dtype::f64 ? pipeline_error<double>(rot, g, a.size, seed, &macs)
                                               : pipeline_error<float>(rot, g, a.size, seed, &macs);
        m.cell(label.str() + " equivalence", err <= tol, "rel_err=" + fmt(err) + " tol=" + fmt(tol));

        const auto& od = rot.orig_dims;
        LayerDims d{od[0], od[1], od[2], od[3], a.size, a.size, conv_output_size(a.size, od[2], g),
                    conv_output_size(a.size, od[3], g)};
        const auto r = rot.ranks();
        const std::uint64_t model = flops_tr({r[0], r[1], r[2], r[3]}, d, s);
        m.cell(label.str() + " flops", model == macs,
               "counted=" + std::to_string(macs) + " model=" + std::to_string(model));
      }
    }
  }
}

std::uint64_t brute_force_min_storage(const Tensor64& w, double eps) {
  std::uint64_t best = UINT64_MAX;
  for (std::size_t s = 0; s < 4; ++s)
    for (auto r1 : divisors(leading_rank(w, eps, s)))
      best = std::min<std::uint64_t>(best, param_count(tr_svd(w, {eps, s, std::size_t(r1)})));
  return best;
}

int cmd_verify(const Common& c, const VerifyArgs& a) {
  const Dtype dtype = parse_dtype(c.dtype);
  CellMatrix m;

  if (!a.cores.empty()) {
    check_readable(a.cores, "--cores");
    const auto ar = TensorArchive::load(a.cores);
    TRCores cores;
    try {
      cores = read_cores(ar);
      cores.validate();
      m.cell("rank-chain", true, "ranks=" + shape_string(cores.ranks()));
    } catch (const RankChainError& e) {
      m.cell("rank-chain", false, e.what());
      std::cout << "verification failed: invariant rank-chain violated\n";
      return kVerifyFailed;
    }
    if (cores.order() != 4) throw DecompositionError("verify expects 4-way kernel cores");
    const auto base = tr_reconstruct_original(cores);
    for (std::size_t k = 1; k < 4; ++k) {
      const double err = relative_error(tr_reconstruct_original(rotate_cores(cores, k)), base);
      m.cell("rotation k=" + std::to_string(k), err <= 1e-12, "rel_err=" + fmt(err));
    }
    if (!c.weights.empty()) {
      if (a.tensor.empty()) throw UsageError("--tensor is required with --weights");
      check_eps(c.eps);
      const auto w = as<double>(TensorArchive::load(c.weights).at(a.tensor));
      if (w.dims() != cores.orig_dims) throw DecompositionError("cores do not match " + a.tensor);
      const double err = relative_error(base, w);
      m.cell("error-bound", err <= c.eps + 1e-8, "rel_err=" + fmt(err) + " eps=" + fmt(c.eps));
    }
    verify_pipeline(m, cores, a, dtype, c.seed, "cores");
  } else {
    if (a.shape.size() != 4) throw UsageError("--shape needs four extents T,C,D1,D2");
    for (double eps : a.eps_list) check_eps(eps);
    Tensor64 w(Shape(a.shape.begin(), a.shape.end()));
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : w.data()) v = normal(rng);

    for (double eps : a.eps_list) {
      const std::string tag = "eps=" + fmt(eps);
      const auto res = rsdtr_search(w, eps);
      try {
        res.cores.validate();
        m.cell(tag + " rank-chain", true, "ranks=" + shape_string(res.cores.ranks()));
      } catch (const RankChainError& e) {
        m.cell(tag + " rank-chain", false, e.what());
        continue;
      }
      m.cell(tag + " error-bound", res.achieved_rel_error <= eps + 1e-8,
             "rel_err=" + fmt(res.achieved_rel_error));
      const auto best = brute_force_min_storage(w, eps);
      m.cell(tag + " optimality", res.storage == best,
             "selected=" + std::to_string(res.storage) + " exhaustive=" + std::to_string(best));
      verify_pipeline(m, res.cores, a, dtype, c.seed + 1, tag);
    }
  }

  std::cout << m.cells - m.failures.size() << "/" << m.cells << " cells passed\n";
  if (!m.failures.empty()) {
    std::cout << "verification failed: " << m.failures.front() << "\n";
    return kVerifyFailed;
  }
  return kOk;
}

// ---------------------------------------------------------------------- stats

int cmd_stats(const Common& c) {
  check_eps(c.eps);
  check_writable(c.report);
  const auto net = load_network(c);
  const auto weights = load_or_synthesize(c, net);
  CompressOptions opts;
  opts.eps_p = c.eps;
  opts.include_1x1 = c.include_1x1;
  const auto report = compress_network(weights, net, opts).second;
  const auto bins = selection_histogram(report);

  json j;
  j["network"] = report.network;
  j["eps"] = c.eps;
  std::size_t layers = 0;
  for (const auto& b : bins) {
    j["bins"].push_back({{"permutation", "tau" + std::to_string(b.shift)},
                         {"regime", b.regime},
                         {"count", b.count},
                         {"frequency", b.frequency}});
    layers += b.count;
  }
  j["layers"] = layers;
  if (!c.report.empty()) emit(c.report, j.dump(2) + "\n");

  std::cout << std::left << std::setw(12) << "permutation" << std::setw(12) << "regime" << std::right << std::setw(7)
            << "count" << std::setw(11) << "frequency" << "\n";
  for (const auto& b : bins) {
    std::cout << std::left << std::setw(12) << ("tau" + std::to_string(b.shift)) << std::setw(12) << b.regime
              << std::right << std::setw(7) << b.count << std::setw(11) << std::fixed << std::setprecision(4)
              << b.frequency << std::defaultfloat << "\n";
  }
  std::cout << "layers: " << layers << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-ring compression of convolution kernels"};
  app.require_subcommand(1);

  Common c;
  auto add_common = [&c](CLI::App* sub) {
    sub->add_option("--eps", c.eps, "Prescribed relative error in [0,1)");
    sub->add_option("--dtype", c.dtype, "Floating-point precision")->check(CLI::IsMember({"f32", "f64"}));
    sub->add_option("--seed", c.seed, "Seed for synthetic data");
    sub->add_option("--out", c.out, "Output path");
    sub->add_option("--threads", c.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  };
  auto add_network = [&c](CLI::App* sub) {
    sub->add_option("--network", c.network, "Built-in network name");
    sub->add_option("--spec", c.spec, "NetworkSpec JSON file");
    sub->add_option("--weights", c.weights, "TARC weight archive (synthetic weights when absent)");
    sub->add_option("--report", c.report, "Write the JSON report here");
    sub->add_flag("--include-1x1", c.include_1x1, "Also decompose 1x1 convolutions");
  };

  DecomposeArgs da;
  auto* dec = app.add_subcommand("decompose", "RSDTR decomposition of one 4-way kernel");
  add_common(dec);
  dec->add_option("--weights", c.weights, "TARC archive holding the kernel");
  dec->add_option("--tensor", da.tensor, "Kernel name inside --weights");
  dec->add_option("--shape", da.shape, "Synthetic kernel extents T,C,D1,D2")->delimiter(',');

  auto* comp = app.add_subcommand("compress", "Decompose every eligible convolution of a network");
  add_common(comp);
  add_network(comp);
  comp->add_flag("--time", c.time, "Report wall-clock seconds per layer");

  CurvesArgs ca;
  auto* cur = app.add_subcommand("curves", "CSV of full-rank storage bounds over normalized R1");
  add_common(cur);
  cur->add_option("-T,--filters", ca.T, "Output channels")->check(CLI::PositiveNumber);
  cur->add_option("-C,--channels", ca.C, "Input channels")->check(CLI::PositiveNumber);
  cur->add_option("-D,--kernel", ca.D, "Spatial kernel size")->check(CLI::PositiveNumber);

  RhoArgs ra;
  auto* rh = app.add_subcommand("rho", "FLOPS ratio against a tensorized TR layer");
  add_common(rh);
  rh->add_option("--max-rank", ra.r_max, "Sweep R = 1..max");
  rh->add_option("--layer", ra.layer, "Restrict to one layer (L1..L5)");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "Pipeline-vs-direct convolution equivalence matrix");
  add_common(ver);
  ver->add_option("--shape", va.shape, "Synthetic kernel extents T,C,D1,D2")->delimiter(',');
  ver->add_option("--size", va.size, "Input spatial size")->check(CLI::PositiveNumber);
  ver->add_option("--eps-list", va.eps_list, "Relative errors to decompose at")->delimiter(',');
  ver->add_option("--cores", va.cores, "Verify cores from a decompose archive instead");
  ver->add_option("--weights", c.weights, "Original kernel archive for the error-bound cell");
  ver->add_option("--tensor", va.tensor, "Kernel name inside --weights");

  auto* st = app.add_subcommand("stats", "Histogram of selected permutations and R1 regimes");
  add_common(st);
  add_network(st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (c.threads > 0) kernels::set_threads(c.threads);
    if (dec->parsed()) return cmd_decompose(c, da);
    if (comp->parsed()) return cmd_compress(c);
    if (cur->parsed()) return cmd_curves(c, ca);
    if (rh->parsed()) return cmd_rho(c, ra);
    if (ver->parsed()) return cmd_verify(c, va);
    if (st->parsed()) return cmd_stats(c);
  } catch (const UsageError& e) {
    std::cerr << "trcomp: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "trcomp: error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}
