// Copyright 2026 The piou Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <piou/piou.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "output.hpp"

namespace piou::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class Failure : public std::runtime_error {
 public:
  Failure(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

int exit_code_for(piou_status status) {
  switch (status) {
    case PIOU_ERR_DEGENERATE:
    case PIOU_ERR_NON_CONVEX:
      return kExitDegenerate;
    case PIOU_ERR_INVALID_ARGUMENT:
    case PIOU_ERR_SHAPE_MISMATCH:
    case PIOU_ERR_NON_FINITE:
      return kExitUsage;
    default:
      return kExitCheckFailed;
  }
}

void check(piou_status status) {
  if (status == PIOU_OK) return;
  throw Failure(exit_code_for(status), std::string(piou_status_name(status)) + ": " + piou_last_error_message());
}

struct BatchDeleter {
  void operator()(piou_batch* p) const { piou_batch_destroy(p); }
};
struct RngDeleter {
  void operator()(piou_rng* p) const { piou_rng_destroy(p); }
};
struct GradcheckDeleter {
  void operator()(piou_gradcheck* p) const { piou_gradcheck_destroy(p); }
};
struct ExperimentDeleter {
  void operator()(piou_experiment* p) const { piou_experiment_destroy(p); }
};
using BatchPtr = std::unique_ptr<piou_batch, BatchDeleter>;
using RngPtr = std::unique_ptr<piou_rng, RngDeleter>;
using GradcheckPtr = std::unique_ptr<piou_gradcheck, GradcheckDeleter>;
using ExperimentPtr = std::unique_ptr<piou_experiment, ExperimentDeleter>;

// Files written by the current command, removed again if it fails.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }

  fs::path write(const std::string& name, const std::string& content) {
    if (written_.empty()) fs::create_directories(dir_);
    fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Failure(kExitCheckFailed, "cannot open " + path.string() + " for writing");
    written_.push_back(path);
    f << content;
    f.close();
    if (!f) throw Failure(kExitCheckFailed, "failed writing " + path.string());
    return path;
  }

  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

json vertices_json(const double* xy, size_t count) {
  json v = json::array();
  for (size_t i = 0; i < count; ++i) v.push_back({xy[2 * i], xy[2 * i + 1]});
  return {{"vertices", v}};
}

// ---- iou -------------------------------------------------------------------

struct IouOptions {
  std::string input;
  bool verify = false;
  int resolution = 1024;
  bool json = false;
};

std::vector<double> read_polygon(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_object()) throw Failure(kExitUsage, std::string("missing object \"") + key + "\"");
  auto verts = it->find("vertices");
  if (verts == it->end() || !verts->is_array())
    throw Failure(kExitUsage, std::string("\"") + key + "\" needs a \"vertices\" array");
  if (verts->size() < 3) throw Failure(kExitUsage, std::string("\"") + key + "\" needs at least 3 vertices");
  std::vector<double> xy;
  for (const auto& v : *verts) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw Failure(kExitUsage, std::string("\"") + key + "\" vertices must be [x, y] number pairs");
    xy.push_back(v[0].get<double>());
    xy.push_back(v[1].get<double>());
  }
  return xy;
}

int cmd_iou(const IouOptions& opt, std::ostream& out) {
  std::ifstream f(opt.input);
  if (!f) throw Failure(kExitUsage, "cannot read " + opt.input);
  json doc = json::parse(f, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Failure(kExitUsage, opt.input + ": not a JSON object");
  std::vector<double> a = read_polygon(doc, "a");
  std::vector<double> b = read_polygon(doc, "b");

  piou_pair_result r{};
  check(piou_pair(a.data(), a.size() / 2, b.data(), b.size() / 2, 0, &r));
  if (r.degenerate) throw Failure(kExitDegenerate, "degenerate polygon: zero area");

  json report = {{"piou", r.iou}, {"area_a", r.area_a}, {"area_b", r.area_b}, {"area_i", r.area_i}};
  bool ok = true;
  double raster = 0.0;
  double diff = 0.0;
  if (opt.verify) {
    piou_raster_config cfg;
    piou_raster_config_default(&cfg);
    cfg.resolution = opt.resolution;
    check(piou_raster_iou(a.data(), a.size() / 2, b.data(), b.size() / 2, &cfg, &raster));
    diff = std::abs(r.iou - raster);
    ok = diff <= 5e-3;
    report["raster"] = {{"resolution", opt.resolution}, {"iou", raster}, {"abs_diff", diff}, {"ok", ok}};
  }

  if (opt.json) {
    out << report.dump(2) << "\n";
  } else {
    out << "piou     " << format_number(r.iou) << "\n";
    out << "area_a   " << format_number(r.area_a) << "\n";
    out << "area_b   " << format_number(r.area_b) << "\n";
    out << "area_i   " << format_number(r.area_i) << "\n";
    if (opt.verify) {
      out << "raster   " << format_number(raster) << " (" << opt.resolution << "x" << opt.resolution << ")\n";
      out << "abs_diff " << format_number(diff) << "\n";
      out << "verify   " << (ok ? "ok" : "FAILED (limit 0.005)") << "\n";
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckOptions {
  size_t samples = 1000;
  uint64_t seed = 0;
  size_t sides = 4;
  bool paper_faithful = false;
  std::string out_dir;
};

int cmd_gradcheck(const GradcheckOptions& opt, std::ostream& out) {
  piou_gradcheck_config cfg;
  piou_gradcheck_config_default(&cfg);
  cfg.samples = opt.samples;
  cfg.seed = opt.seed;
  cfg.sides = opt.sides;
  cfg.kernel.paper_faithful = opt.paper_faithful ? 1 : 0;

  piou_gradcheck* raw = nullptr;
  check(piou_gradcheck_run(&cfg, &raw));
  GradcheckPtr report(raw);
  piou_gradcheck_summary s{};
  check(piou_gradcheck_get_summary(report.get(), &s));

  json failures = json::array();
  std::vector<double> a(2 * opt.sides), b(2 * opt.sides);
  for (size_t i = 0; i < s.failed; ++i) {
    size_t draw = 0;
    double rel = 0.0;
    check(piou_gradcheck_get_failure(report.get(), i, &draw, a.data(), b.data(), &rel));
    failures.push_back({{"draw", draw},
                        {"rel_error", rel},
                        {"a", vertices_json(a.data(), opt.sides)},
                        {"b", vertices_json(b.data(), opt.sides)}});
  }

  out << "samples_requested " << s.requested << "\n";
  out << "samples_checked   " << s.checked << "\n";
  out << "samples_skipped   " << s.skipped << "\n";
  out << "failures          " << s.failed << "\n";
  out << "max_rel_error     " << format_number(s.max_rel_error) << "\n";
  out << "tolerance         " << format_number(s.tolerance) << "\n";
  for (const auto& f : failures) out << "failure " << f.dump() << "\n";
  out << "result            " << (s.ok ? "pass" : "FAIL") << "\n";

  if (!opt.out_dir.empty()) {
    json doc = {{"seed", opt.seed},
                {"sides", opt.sides},
                {"paper_faithful", opt.paper_faithful},
                {"requested", s.requested},
                {"checked", s.checked},
                {"skipped", s.skipped},
                {"max_rel_error", s.max_rel_error},
                {"tolerance", s.tolerance},
                {"ok", s.ok != 0},
                {"failures", failures}};
    OutputSet files(opt.out_dir);
    files.write("gradcheck.json", doc.dump(2) + "\n");
    files.commit();
  }
  return s.ok ? kExitOk : kExitCheckFailed;
}

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
  size_t sides = 4;
  size_t batch = 32;
  size_t trials = 5;
  size_t iters = 5000;
  double lr = 0.001;
  uint64_t seed = 0;
  bool convex = true;
  std::string loss = "all";
  double w_l1 = 1.0;
  double w_piou = 1.0;
  bool paper_faithful = false;
  bool parallel = false;
  bool init_offset = false;
  std::string out_dir = ".";
};

struct Variant {
  const char* name;
  piou_loss_kind kind;
  const char* color;
};

constexpr Variant kVariants[] = {
    {"l1", PIOU_LOSS_L1, "#1f77b4"},
    {"piou", PIOU_LOSS_PIOU, "#d62728"},
    {"combined", PIOU_LOSS_COMBINED, "#2ca02c"},
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  std::vector<Variant> variants;
  for (const auto& v : kVariants)
    if (opt.loss == "all" || opt.loss == v.name) variants.push_back(v);

  const std::string tag = "p" + std::to_string(opt.sides) + (opt.convex ? "_convex" : "_free");
  OutputSet files(opt.out_dir);
  std::vector<Series> series;
  std::vector<std::vector<double>> curves;

  out << "loss       piou@" << opt.iters / 10 << "  final\n";
  for (const auto& v : variants) {
    piou_experiment_config cfg;
    piou_experiment_config_default(&cfg, v.kind);
    cfg.sides = opt.sides;
    cfg.batch = opt.batch;
    cfg.trials = opt.trials;
    cfg.iterations = opt.iters;
    cfg.lr = opt.lr;
    cfg.seed = opt.seed;
    cfg.convex = opt.convex ? 1 : 0;
    cfg.init_offset = opt.init_offset ? 1 : 0;
    if (v.kind == PIOU_LOSS_COMBINED) {
      cfg.w_l1 = opt.w_l1;
      cfg.w_piou = opt.w_piou;
    }
    cfg.kernel.paper_faithful = opt.paper_faithful ? 1 : 0;
    cfg.kernel.parallel = opt.parallel ? 1 : 0;
    cfg.parallel_trials = opt.parallel ? 1 : 0;

    piou_experiment* raw = nullptr;
    check(piou_experiment_run(&cfg, &raw));
    ExperimentPtr exp(raw);
    const size_t trials = piou_experiment_trials(exp.get());
    const size_t iters = piou_experiment_iterations(exp.get());

    CsvWriter csv({"trial", "iteration", "mean_piou", "mean_loss", "wall_ms"});
    piou_iteration_record rec{};
    for (size_t t = 0; t < trials; ++t) {
      for (size_t i = 0; i < iters; ++i) {
        check(piou_experiment_record(exp.get(), t, i, &rec));
        csv.add_row({std::to_string(t), std::to_string(rec.iteration), format_number(rec.mean_piou),
                      format_number(rec.mean_loss), format_number(rec.wall_ms)});
      }
    }
    files.write(tag + "_" + v.name + ".csv", csv.str());

    Series s{v.name, v.color, {}, {}};
    for (size_t i = 0; i < iters; ++i) {
      check(piou_experiment_aggregate(exp.get(), i, &rec));
      s.x.push_back(static_cast<double>(rec.iteration));
      s.y.push_back(rec.mean_piou);
    }
    char line[96];
    std::snprintf(line, sizeof line, "%-10s %-10.4f %.4f\n", v.name, s.y[std::min(iters - 1, opt.iters / 10)],
                  s.y.back());
    out << line;
    curves.push_back(s.y);
    series.push_back(std::move(s));
  }

  if (variants.size() == 3) {
    CsvWriter agg({"iteration", "mean_piou_l1", "mean_piou_piou", "mean_piou_combined"});
    for (size_t i = 0; i < curves[0].size(); ++i)
      agg.add_row({format_number(series[0].x[i]), format_number(curves[0][i]), format_number(curves[1][i]),
                   format_number(curves[2][i])});
    files.write(tag + "_aggregate.csv", agg.str());
  }
  const std::string title =
      "Mean PIoU vs iteration (" + std::to_string(opt.sides) + "-sided, " + (opt.convex ? "convex" : "free") + ")";
  files.write(tag + ".svg", line_chart_svg(title, "iteration", "mean PIoU", series));
  files.commit();
  out << "outputs in " << opt.out_dir << "\n";
  return kExitOk;
}

// ---- bench -----------------------------------------------------------------

struct BenchOptions {
  std::vector<size_t> batch_sizes{1, 16, 128};
  size_t reps = 31;
  int resolution = 256;
  bool parallel = false;
  uint64_t seed = 0;
  std::string out_dir;
};

// Median per-call time in ms. Each sample repeats the call enough times to
// span at least a millisecond.
template <class F>
double median_ms(size_t reps, F&& call) {
  using clock = std::chrono::steady_clock;
  size_t inner = 1;
  for (;;) {
    auto t0 = clock::now();
    for (size_t i = 0; i < inner; ++i) call();
    double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    if (ms >= 1.0 || inner >= (size_t{1} << 20)) break;
    inner *= 2;
  }
  std::vector<double> samples;
  for (size_t r = 0; r < reps; ++r) {
    auto t0 = clock::now();
    for (size_t i = 0; i < inner; ++i) call();
    samples.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count() / inner);
  }
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  constexpr size_t kSides = 4;
  piou_rng* rng_raw = nullptr;
  check(piou_rng_create(opt.seed, 0, &rng_raw));
  RngPtr rng(rng_raw);
  piou_raster_config raster_cfg;
  piou_raster_config_default(&raster_cfg);
  raster_cfg.resolution = opt.resolution;
  piou_kernel_options kernel{0, opt.parallel ? 1 : 0};

  // One corpus of `largest` pairs. Each batch size walks the whole corpus in
  // chunks of that size, so every row of the table covers the same pairs and
  // reports the median time for one batch.
  const size_t largest = *std::max_element(opt.batch_sizes.begin(), opt.batch_sizes.end());
  const size_t stride = kSides * 2;
  std::vector<double> a_xy(largest * stride), b_xy(largest * stride);
  for (size_t i = 0; i < largest; ++i) {
    check(piou_random_polygon(rng.get(), kSides, 1.0, 1, &a_xy[i * stride]));
    check(piou_random_polygon(rng.get(), kSides, 1.0, 1, &b_xy[i * stride]));
  }

  CsvWriter csv({"batch_size", "method", "median_ms", "speedup"});
  out << "batch  method  median_ms     speedup\n";
  for (size_t b : opt.batch_sizes) {
    const size_t chunks = largest / b;
    std::vector<BatchPtr> batches_a, batches_b;
    for (size_t c = 0; c < chunks; ++c) {
      piou_batch* p = nullptr;
      check(piou_batch_create(b, kSides, &a_xy[c * b * stride], nullptr, &p));
      batches_a.emplace_back(p);
      check(piou_batch_create(b, kSides, &b_xy[c * b * stride], nullptr, &p));
      batches_b.emplace_back(p);
    }
    std::vector<double> values(b), grad_a(b * stride), grad_b(b * stride);

    piou_status status = PIOU_OK;
    const double piou_ms = median_ms(opt.reps, [&] {
      for (size_t c = 0; c < chunks; ++c) {
        status = piou_batch_backward(batches_a[c].get(), batches_b[c].get(), &kernel, values.data(),
                                     grad_a.data(), grad_b.data(), nullptr);
      }
    }) / static_cast<double>(chunks);
    check(status);
    double sink = 0.0;
    const double raster_ms = median_ms(opt.reps, [&] {
      for (size_t i = 0; i < chunks * b; ++i) {
        double v = 0.0;
        status = piou_raster_iou(&a_xy[i * stride], kSides, &b_xy[i * stride], kSides, &raster_cfg, &v);
        sink += v;
      }
    }) / static_cast<double>(chunks);
    check(status);
    (void)sink;

    const double speedup = raster_ms / piou_ms;
    csv.add_row({std::to_string(b), "piou", format_number(piou_ms), format_number(speedup)});
    csv.add_row({std::to_string(b), "raster", format_number(raster_ms), "1"});
    char line[128];
    std::snprintf(line, sizeof line, "%-6zu %-7s %-13.6g %.1fx\n", b, "piou", piou_ms, speedup);
    out << line;
    std::snprintf(line, sizeof line, "%-6zu %-7s %-13.6g %.1fx\n", b, "raster", raster_ms, 1.0);
    out << line;
  }
  if (!opt.out_dir.empty()) {
    OutputSet files(opt.out_dir);
    files.write("bench.csv", csv.str());
    files.commit();
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact polygon IoU: evaluation, gradient checks, simulation and benchmarks", "piou"};
  app.require_subcommand(1);

  IouOptions iou;
  auto* sub_iou = app.add_subcommand("iou", "Compute the IoU of a polygon pair from a JSON file");
  sub_iou->add_option("input", iou.input, "JSON file {\"a\": {\"vertices\": ...}, \"b\": {...}}")
      ->required();
  sub_iou->add_flag("--verify", iou.verify, "Cross-check against the pixel-count reference");
  sub_iou->add_option("--resolution", iou.resolution, "Raster resolution for --verify")
      ->capture_default_str()
      ->check(CLI::Range(16, 1 << 15));
  sub_iou->add_flag("--json", iou.json, "Print the report as JSON");

  GradcheckOptions gc;
  auto* sub_gc = app.add_subcommand("gradcheck", "Compare analytic gradients with central finite differences");
  sub_gc->add_option("--samples", gc.samples, "Number of checked samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub_gc->add_option("--seed", gc.seed, "RNG seed")->capture_default_str();
  sub_gc->add_option("--sides", gc.sides, "Polygon vertex count")->capture_default_str()->check(CLI::Range(3, 32));
  sub_gc->add_flag("--paper-faithful", gc.paper_faithful, "Use (0,0) fill values in the kernel");
  sub_gc->add_option("--out-dir", gc.out_dir, "Directory for gradcheck.json");

  SimulateOptions sim;
  auto* sub_sim = app.add_subcommand("simulate", "Regress random polygons with L1, PIoU and combined losses");
  sub_sim->add_option("--sides", sim.sides, "Polygon vertex count")->capture_default_str()->check(CLI::Range(3, 32));
  sub_sim->add_option("--batch", sim.batch, "Polygons per batch")->capture_default_str()->check(CLI::PositiveNumber);
  sub_sim->add_option("--trials", sim.trials, "Independent trials")->capture_default_str()->check(CLI::PositiveNumber);
  sub_sim->add_option("--iters", sim.iters, "Iterations per trial")->capture_default_str()->check(CLI::PositiveNumber);
  sub_sim->add_option("--lr", sim.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  sub_sim->add_flag("--convex,!--free", sim.convex, "Convex targets (default) or unrestricted ones");
  sub_sim->add_option("--loss", sim.loss, "Loss variant")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "l1", "piou", "combined"}));
  sub_sim->add_option("--w-l1", sim.w_l1, "L1 weight of the combined loss")->capture_default_str();
  sub_sim->add_option("--w-piou", sim.w_piou, "PIoU weight of the combined loss")->capture_default_str();
  sub_sim->add_flag("--paper-faithful", sim.paper_faithful, "Use (0,0) fill values in the kernel");
  sub_sim->add_flag("--parallel", sim.parallel, "Run rows and trials on multiple threads");
  sub_sim->add_flag("--init-offset", sim.init_offset, "Start predictions at the target plus a convex offset");
  sub_sim->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();

  BenchOptions bench;
  auto* sub_bench = app.add_subcommand("bench", "Time the batched kernel against the pixel-count reference");
  sub_bench->add_option("--batch-sizes", bench.batch_sizes, "Comma-separated batch sizes")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub_bench->add_option("--reps", bench.reps, "Timing samples per measurement")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub_bench->add_option("--resolution", bench.resolution, "Raster resolution of the baseline")
      ->capture_default_str()
      ->check(CLI::Range(16, 1 << 15));
  sub_bench->add_flag("--parallel", bench.parallel, "Let the kernel use multiple threads");
  sub_bench->add_option("--seed", bench.seed, "RNG seed")->capture_default_str();
  sub_bench->add_option("--out-dir", bench.out_dir, "Directory for bench.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sub_iou) return cmd_iou(iou, out);
    if (*sub_gc) return cmd_gradcheck(gc, out);
    if (*sub_sim) return cmd_simulate(sim, out);
    return cmd_bench(bench, out);
  } catch (const Failure& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}

}  // namespace piou::cli
