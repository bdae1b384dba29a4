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

// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
// in-scope criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "piou/batch.hpp"
#include "piou/geometry.hpp"
#include "piou/gradcheck.hpp"
#include "piou/raster.hpp"
#include "piou/sim.hpp"

namespace piou {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kCorpusSize = 10000;
constexpr std::uint64_t kCorpusSeed = 20260101;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using PairList = std::vector<std::pair<Polygon, Polygon>>;

PairList corpus(Point2 shift) {
  Rng rng(kCorpusSeed, 0);
  PairList out;
  out.reserve(kCorpusSize);
  auto moved = [&](const Polygon& p) {
    std::vector<Point2> v;
    for (Point2 q : p.vertices()) v.push_back(q + shift);
    return Polygon(std::move(v));
  };
  for (std::size_t i = 0; i < kCorpusSize; ++i) {
    Polygon a = moved(gen_convex_polygon(rng, 4, 1.0));
    Polygon b = moved(gen_convex_polygon(rng, 4, 1.0));
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome criterion_exact() {
  const PairList pairs = corpus({0.0, 0.0});
  double max_raster = 0.0;
  double max_invariant = 0.0;
  for (const auto& [a, b] : pairs) {
    const double ab = piou_pair(a, b).iou;
    const double ba = piou_pair(b, a).iou;
    max_raster = std::max(max_raster, std::abs(ab - raster_iou(a, b)));
    max_invariant = std::max(max_invariant, std::abs(ab - ba));
    max_invariant = std::max(max_invariant, std::abs(piou_pair(a, a).iou - 1.0));
    if (ab < 0.0 || ab > 1.0) max_invariant = std::max(max_invariant, 1.0);
  }
  return {max_raster <= 5e-3 && max_invariant <= 1e-12,
          "max |exact - raster@1024| = " + fmt("%.3e", max_raster) + " (limit 5e-3), max invariant error = " +
              fmt("%.3e", max_invariant) + " (limit 1e-12)"};
}

double batched_gap(const PairList& pairs, bool faithful) {
  constexpr std::size_t kBatch = 128;
  KernelOptions opts;
  opts.paper_faithful = faithful;
  double gap = 0.0;
  for (std::size_t start = 0; start < pairs.size(); start += kBatch) {
    const std::size_t n = std::min(kBatch, pairs.size() - start);
    std::vector<Polygon> as, bs;
    for (std::size_t i = 0; i < n; ++i) {
      as.push_back(pairs[start + i].first);
      bs.push_back(pairs[start + i].second);
    }
    const std::vector<double> v =
        piou_batch(PolygonBatch::from_polygons(as), PolygonBatch::from_polygons(bs), opts);
    for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(v[i] - piou_pair(as[i], bs[i]).iou));
  }
  return gap;
}

Outcome criterion_batched() {
  const double masked = batched_gap(corpus({0.0, 0.0}), false);
  // Coordinates lie in [-2, 2]; the shift makes every one strictly positive.
  const double faithful = batched_gap(corpus({3.0, 3.0}), true);
  return {masked <= 1e-9 && faithful <= 1e-9,
          "max gap masked = " + fmt("%.3e", masked) + ", paper-faithful = " + fmt("%.3e", faithful) +
              " (limit 1e-9)"};
}

Outcome criterion_gradcheck() {
  GradcheckConfig cfg;
  const GradcheckReport r = run_gradcheck(cfg);
  return {r.ok() && r.max_rel_error <= 1e-4,
          std::to_string(r.checked) + "/" + std::to_string(r.requested) + " checked, " +
              std::to_string(r.failures.size()) + " failures, max rel error " + fmt("%.3e", r.max_rel_error) +
              " (limit 1e-4)"};
}

struct Curves {
  std::map<std::string, std::vector<IterationRecord>> by_loss;
  bool finite = true;
};

Curves run_losses(std::size_t sides, bool convex) {
  Curves out;
  const std::pair<const char*, LossSpec> losses[] = {
      {"l1", LossSpec::l1()}, {"piou", LossSpec::piou()}, {"combined", LossSpec::combined(1.0, 1.0)}};
  for (const auto& [name, spec] : losses) {
    ExperimentConfig cfg;
    cfg.sides = sides;
    cfg.convex = convex;
    cfg.loss = spec;
    const ExperimentResult r = run_experiment(cfg);
    for (const auto& trial : r.trials) {
      for (const IterationRecord& rec : trial) {
        if (!std::isfinite(rec.mean_piou) || !std::isfinite(rec.mean_loss)) out.finite = false;
      }
    }
    out.by_loss[name] = r.aggregate;
  }
  return out;
}

Outcome orderings(const Curves& c) {
  const auto& l1 = c.by_loss.at("l1");
  const auto& piou = c.by_loss.at("piou");
  const auto& comb = c.by_loss.at("combined");
  const std::size_t check = l1.size() / 10;
  const bool a = piou[check].mean_piou > l1[check].mean_piou;
  const bool b = comb.back().mean_piou >= l1.back().mean_piou;
  const bool cc = comb.back().mean_piou >= piou.back().mean_piou;
  std::string detail = "(a) iter " + std::to_string(l1[check].iteration) + " piou " +
                       fmt("%.4f", piou[check].mean_piou) + " vs l1 " + fmt("%.4f", l1[check].mean_piou) +
                       (a ? " ok" : " FAIL") + "; (b) final combined " + fmt("%.4f", comb.back().mean_piou) +
                       " vs l1 " + fmt("%.4f", l1.back().mean_piou) + (b ? " ok" : " FAIL") + "; (c) vs piou " +
                       fmt("%.4f", piou.back().mean_piou) + (cc ? " ok" : " FAIL");
  return {a && b && cc, detail};
}

Outcome criterion_convex_quads() { return orderings(run_losses(4, true)); }

Outcome criterion_free_octagons() {
  const Curves c = run_losses(8, false);
  Outcome o = orderings(c);
  o.pass = o.pass && c.finite;
  o.detail += c.finite ? "; all values finite" : "; NON-FINITE values";
  return o;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, sep);) out.push_back(f);
  return out;
}

Outcome criterion_bench() {
  const fs::path dir = fs::temp_directory_path() / "piou_acceptance_bench";
  fs::remove_all(dir);
  const std::string dir_str = dir.string();
  const char* argv[] = {"piou", "bench", "--batch-sizes", "1,16,128", "--reps", "51", "--out-dir", dir_str.c_str()};
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(std::size(argv)), argv, out, err);
  if (code != 0) return {false, "bench exited with " + std::to_string(code) + ": " + err.str()};

  std::ifstream csv(dir / "bench.csv");
  std::vector<std::pair<int, double>> speedups;
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = split(line, ',');
    if (f.size() == 4 && f[1] == "piou") speedups.emplace_back(std::stoi(f[0]), std::stod(f[3]));
  }
  fs::remove_all(dir);
  if (speedups.size() != 3) return {false, "unexpected bench.csv contents"};
  bool monotonic = true;
  std::string detail = "speedup";
  for (std::size_t i = 0; i < speedups.size(); ++i) {
    if (speedups[i].second <= 1.0) monotonic = false;
    if (i > 0 && speedups[i].second <= speedups[i - 1].second) monotonic = false;
    detail += " B=" + std::to_string(speedups[i].first) + " " + fmt("%.1fx", speedups[i].second);
  }
  const bool floor = speedups.back().second >= 20.0;
  detail += monotonic ? "; increasing" : "; NOT increasing";
  detail += floor ? "; >= 20x at B=128" : "; below 20x at B=128";
  return {monotonic && floor, detail};
}

}  // namespace
}  // namespace piou

int main() {
  using Criterion = std::pair<const char*, std::function<piou::Outcome()>>;
  const Criterion criteria[] = {
      {"1 exact kernel vs raster", piou::criterion_exact},
      {"2 batched vs scalar", piou::criterion_batched},
      {"3 gradient check", piou::criterion_gradcheck},
      {"4 convex quadrilateral regression", piou::criterion_convex_quads},
      {"5 unrestricted octagon regression", piou::criterion_free_octagons},
      {"6 speed trend", piou::criterion_bench},
  };
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    const piou::Outcome o = fn();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %-36s %s  %s [%.1fs]\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  std::printf("criterion %-36s %s  %s\n", "7 detector benchmark results", "SKIP",
              "out of scope: requires multi-day detector training");
  return all ? 0 : 1;
}
