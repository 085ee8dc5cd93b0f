// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] [--keep] [criterion ...]
//
// Criteria 5-7 train on the default 500-frame scene and take several minutes each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "radar_height/io.hpp"
#include "radar_height/loss.hpp"
#include "radar_height/metrics.hpp"
#include "radar_height/model.hpp"
#include "radar_height/pipeline.hpp"
#include "radar_height/trainer.hpp"
#include "run.hpp"

using namespace radar_height;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

const LossKind kAll[] = {LossKind::kL1, LossKind::kL2, LossKind::kWL1, LossKind::kWL2, LossKind::kHuber, LossKind::kEHL};

LossSpec spec_of(LossKind k, double sigma) {
  LossSpec s;
  s.kind = k;
  s.sigma = sigma;
  return s;
}

// 1 -------------------------------------------------------------------------
Outcome loss_family() {
  double worst_gap = 0.0, worst_slope = 0.0;
  for (double sigma : {1.0, 2.0, 3.0}) {
    const double s2 = sigma * sigma, knee = 1.0 / s2, w = std::log(knee + 1.0);
    // both branch formulas evaluated at the knee
    const double left = 0.5 * s2 * knee * knee * w;
    const double right = (knee - 1.0 / (2.0 * s2)) * w;
    worst_gap = std::max({worst_gap, std::abs(left - right),
                          std::abs(loss_of_error(spec_of(LossKind::kEHL, sigma), knee).value - right)});
    const double slope = w + (1.0 / (2.0 * s2)) / (knee + 1.0);
    const double h = 1e-7;
    auto f = [&](double d) { return loss_of_error(spec_of(LossKind::kEHL, sigma), d).value; };
    worst_slope = std::max({worst_slope, std::abs((f(knee) - f(knee - h)) / h - slope),
                            std::abs((f(knee + h) - f(knee)) / h - slope)});
  }
  Rng rng(1001);
  int violations = 0;
  for (int n = 0; n < 10000; ++n) {
    const double a = rng.uniform(-5.0, 5.0), b = rng.bernoulli(0.05) ? a : rng.uniform(-5.0, 5.0);
    const double d1 = rng.uniform(0.0, 5.0), d2 = d1 + rng.uniform(0.0, 2.0);
    const double sigma = rng.uniform(0.5, 4.0);
    for (auto k : kAll) {
      const LossSpec s = spec_of(k, sigma);
      const double v = pointwise_loss(s, a, b).value;
      const bool ok = v >= 0.0 && v == pointwise_loss(s, b, a).value && (v == 0.0) == (a == b) &&
                      loss_of_error(s, d1).value <= loss_of_error(s, d2).value;
      violations += ok ? 0 : 1;
    }
  }
  const bool pass = worst_gap <= 1e-12 && worst_slope <= 1e-6 && violations == 0;
  return {pass, "knee gap " + fmt("%.2e", worst_gap) + ", one-sided slope error " + fmt("%.2e", worst_slope) +
                    ", property violations " + std::to_string(violations) + " over 10^4 samples x 6 losses"};
}

// 2 -------------------------------------------------------------------------
Outcome gradients() {
  double pointwise = 0.0;
  bool pointwise_ok = true;
  for (double sigma : {1.0, 2.0, 3.0}) {
    for (auto k : kAll) {
      const GradCheckReport r = grad_check(spec_of(k, sigma), 2000, 1e-6, 1e-5, 77);
      pointwise = std::max(pointwise, r.max_rel_error);
      pointwise_ok = pointwise_ok && r.passed;
    }
  }

  const Sample s = make_sample(generate_frame(SceneSpec{}, 3));
  ToyModelParams p = init_params(ModelShape{}, 5);
  Rng rng(6);
  const ModelLayout layout = p.layout();
  // Random heads and biases: at the zero-bias init an empty radar image puts
  // pre-activations exactly on the ReLU kink, where central differences halve.
  for (const auto& named : layout.layers()) {
    const std::size_t first = named.is_head ? 0 : named.layer.weight_count();
    for (std::size_t k = first; k < named.layer.param_count(); ++k) p.values[named.layer.offset + k] = rng.uniform(-0.3, 0.3);
  }
  const Targets t{&s.gt.heights, &s.gt.partition, &s.mask};
  const ObjectiveOptions objective;
  std::vector<double> grad(p.values.size(), 0.0);
  backward(p, s.input, t, objective, grad);
  std::vector<std::size_t> picks;
  for (const auto& named : layout.layers()) {
    for (int k = 0; k < 4; ++k) picks.push_back(named.layer.offset + rng.uniform_int(0, named.layer.param_count() - 1));
  }
  // 1e-4 steps over a ReLU boundary for some conv weights at 64x96; 1e-5 does not
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t idx : picks) {
    const double keep = p.values[idx];
    p.values[idx] = keep + h;
    const double up = evaluate_loss(p, s.input, t, objective).total;
    p.values[idx] = keep - h;
    const double down = evaluate_loss(p, s.input, t, objective).total;
    p.values[idx] = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(grad[idx] - fd) / std::max({std::abs(grad[idx]), std::abs(fd), 1e-6}));
  }
  const bool pass = pointwise_ok && pointwise <= 1e-5 && worst <= 1e-4 && picks.size() >= 50;
  return {pass, "pointwise max rel err " + fmt("%.2e", pointwise) + "; model " + std::to_string(picks.size()) +
                    " params at 64x96 (step 1e-5), max rel err " + fmt("%.2e", worst)};
}

// 3 -------------------------------------------------------------------------
Outcome ground_truth() {
  Rng rng(3003);
  long long pixels = 0, mismatches = 0, hard_cases = 0;
  for (int n = 0; n < 100; ++n) {
    const Frame f = gen::frame(rng, gen::camera(rng, 64, 96), {6, 24, true});
    const GroundTruth gt = build_height_map(f);
    for (int i = 0; i < f.camera.height; ++i) {
      for (int j = 0; j < f.camera.width; ++j) {
        const auto want = oracle::pixel_truth(f, i, j);
        ++pixels;
        if (gt.heights(i, j) != want.height || gt.partition(i, j) != want.region) ++mismatches;
        if (want.region == Region::kRadar && want.height == 0.0 && oracle::in_any_rect(f, i, j)) ++hard_cases;
      }
    }
  }
  return {mismatches == 0 && hard_cases > 0, std::to_string(mismatches) + " mismatches over " + std::to_string(pixels) +
                                                  " pixels in 100 frames; " + std::to_string(hard_cases) +
                                                  " unassociated RAD pixels inside a 2D box"};
}

// 4 -------------------------------------------------------------------------
bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(b), 1e-300) || a == b; }
bool close(const std::optional<double>& a, const std::optional<double>& b) {
  return a.has_value() == b.has_value() && (!a || close(*a, *b));
}

Outcome metrics() {
  Rng rng(4004);
  int bad = 0;
  for (int n = 0; n < 200; ++n) {
    const int rows = static_cast<int>(rng.uniform_int(1, 64)), cols = static_cast<int>(rng.uniform_int(1, 96));
    HeightMap gt = gen::map(rng, rows, cols, 0.0, 3.0);
    for (double& v : gt.values()) v = rng.bernoulli(0.4) ? 0.0 : v;
    const HeightMap pred = gen::map(rng, rows, cols, 0.0, 3.5);
    const RegionPartition part = gen::partition(rng, rows, cols);
    const auto a = height_errors(gt, pred, part);
    const auto b = oracle::height_report(gt, pred, part);
    bad += close(a.rhe, b.rhe) && close(a.bhe, b.bhe) && close(a.rhe_nonzero, b.rhe_nonzero) &&
                   close(a.rhe_zero, b.rhe_zero)
               ? 0
               : 1;

    const Grid<double> dg = gen::map(rng, rows, cols, 0.5, 80.0), dp = gen::map(rng, rows, cols, 0.5, 80.0);
    Grid<std::uint8_t> valid(rows, cols);
    for (auto& v : valid.values()) v = rng.bernoulli(0.7) ? 1 : 0;
    valid(0, 0) = 1;
    const auto c = depth_errors(dp, dg, valid);
    const auto d = oracle::depth_report(dp, dg, valid);
    bad += close(c.mae, d.mae) && close(c.rmse, d.rmse) && close(c.absrel, d.absrel) && c.delta == d.delta ? 0 : 1;
  }
  const Grid<double> g(16, 16, 10.0), p(16, 16, 11.0);
  const auto t = depth_errors(p, g, Grid<std::uint8_t>(16, 16, 1));
  const bool example = t.mae == 1.0 && t.absrel == 0.1 && t.delta[0] == 1.0;
  return {bad == 0 && example, std::to_string(bad) + " of 400 random cases off by more than 1e-12; pred=gt+1, gt=10: MAE " +
                                   fmt("%.17g", t.mae) + " AbsRel " + fmt("%.17g", t.absrel) + " delta1 " +
                                   fmt("%.17g", t.delta[0])};
}

// 5, 6, 7 share the default-scene runs --------------------------------------
struct Shared {
  fs::path root;
  ExperimentConfig cfg;
  std::optional<EvalSummary> ehl_eval;
  double mean_test_object_height = 0.0;
};

ExperimentConfig default_config(const fs::path& out) {
  ExperimentConfig c;  // 500 frames, 64x96, seed 42, 30 epochs, EHL
  c.out_dir = out.string();
  finalize(c);
  return c;
}

void progress(const std::string& tag, const EpochRecord& r) {
  std::fprintf(stderr, "  [%s] epoch %2d val l_reg %.4f\n", tag.c_str(), r.epoch, r.val.l_reg);
}

const Dataset& ensure_dataset(Shared& sh) {
  static std::optional<Dataset> cached;
  if (!cached) {
    const OutputLayout layout{sh.root / "ehl"};
    if (!fs::exists(layout.dataset())) cmd_gen(sh.cfg, true);
    cached = load_dataset(layout.dataset().string());
    double sum = 0;
    int n = 0;
    for (const auto& f : cached->select(cached->split.test)) {
      for (const auto& b : f.objects) {
        sum += b.size.height;
        ++n;
      }
    }
    sh.mean_test_object_height = sum / n;
  }
  return *cached;
}

Outcome desk_scale(Shared& sh) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dataset(sh);
  TrainOptions to;
  to.force = true;
  to.progress = [](const EpochRecord& r) { progress("ehl", r); };
  cmd_train(sh.cfg, to);
  EvalOptions eo;
  eo.force = true;
  eo.fixed_heights = {0.5, 1.0, 1.5, 2.0, 2.5};
  sh.ehl_eval = cmd_eval(sh.cfg, eo);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;

  double best_fixed = 1e300;
  std::string best_name;
  std::optional<double> direct, direct_zero;
  for (const auto& m : sh.ehl_eval->methods) {
    if (m.method == ExtensionMethod::kFixed && m.summary.rhe && *m.summary.rhe < best_fixed) {
      best_fixed = *m.summary.rhe;
      best_name = m.name;
    }
    if (m.method == ExtensionMethod::kDirect) {
      direct = m.summary.rhe;
      direct_zero = m.summary.rhe_zero;
    }
  }
  const double limit = 0.3 * sh.mean_test_object_height;
  const bool pass = direct && direct_zero && *direct < best_fixed && *direct_zero < limit && minutes <= 10.0;
  return {pass, "EHL direct RHE " + fmt("%.4f", direct.value_or(NAN)) + " vs best fixed " + best_name + " " +
                    fmt("%.4f", best_fixed) + "; RHE=0 " + fmt("%.4f", direct_zero.value_or(NAN)) + " < " +
                    fmt("%.4f", limit) + " (0.3 x mean object height); " + fmt("%.1f", minutes) + " min"};
}

CollapseStats trained_collapse(Shared& sh, const std::string& name, LossKind kind) {
  const Dataset& d = ensure_dataset(sh);
  ExperimentConfig c = sh.cfg;
  c.out_dir = (sh.root / name).string();
  c.train.loss.kind = kind;
  finalize(c);
  TrainOptions to;
  to.force = true;
  to.dataset = OutputLayout{sh.root / "ehl"}.dataset().string();
  to.progress = [name](const EpochRecord& r) { progress(name, r); };
  cmd_train(c, to);
  const Checkpoint ckpt = load_checkpoint(OutputLayout{c.out_dir}.checkpoint().string());
  const auto frames = d.select(d.split.test);
  return collapse_stats(ckpt.params, make_samples(frames), frames);
}

Outcome l1_collapse(Shared& sh) {
  const CollapseStats l1 = trained_collapse(sh, "l1", LossKind::kL1);
  const CollapseStats wl1 = trained_collapse(sh, "wl1", LossKind::kWL1);
  const bool pass = l1.ratio < kCollapseRatio && wl1.ratio > 0.25;
  return {pass, "mean |H^| at RAD / mean object height: L1 " + fmt("%.4f", l1.ratio) + " (needs < 0.05), WL1 " +
                    fmt("%.4f", wl1.ratio) + " (needs > 0.25); same data, seed, 30 epochs"};
}

Outcome filter_semantics(Shared& sh) {
  const Dataset& d = ensure_dataset(sh);
  const OutputLayout layout{sh.root / "ehl"};
  if (!fs::exists(layout.eval_predictions("test"))) return {false, "no EHL predictions (criterion 5 did not run)"};
  const PredictionStore trained = load_predictions(layout.eval_predictions("test").string());
  ExtensionSpec spec;
  spec.filter_threshold = 0.5;
  long long survivors = 0, below = 0, outside = 0, removed = 0;
  auto check = [&](const Frame& f, const PredictionStore& store) {
    const auto direct = extend_direct(f, store);
    const FilterResult r = extend_filter(f, store, spec);
    std::set<std::pair<int, double>> all;
    for (const auto& p : direct) all.insert({p.point_id, p.height});
    for (const auto& s : r.survivors) {
      ++survivors;
      below += s.height >= 0.5 ? 0 : 1;
      outside += all.count({s.point_id, s.height}) ? 0 : 1;
    }
    removed += r.removed;
  };
  for (const auto& f : d.select(d.split.test)) check(f, trained);
  // random stores with many heights right at the threshold
  Rng rng(7007);
  for (int n = 0; n < 300; ++n) {
    const Frame f = gen::frame(rng, gen::camera(rng, 40, 60));
    std::vector<PointPrediction> pts;
    for (const auto& p : project_radar(f).points) {
      pts.push_back({p.id, p.pixel, rng.bernoulli(0.2) ? 0.5 : rng.bernoulli(0.1) ? std::nextafter(0.5, 0.0) : rng.uniform(0.0, 2.0)});
    }
    PredictionStore store;
    store.put(f.id, pts);
    check(f, store);
  }
  return {below == 0 && outside == 0, std::to_string(survivors) + " survivors, " + std::to_string(removed) + " removed; " +
                                          std::to_string(below) + " below 0.5, " + std::to_string(outside) +
                                          " not among the direct points"};
}

// 8 -------------------------------------------------------------------------
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_text(e.path().string());
  }
  return files;
}

Outcome determinism(const fs::path& root) {
  const std::string config = (root / "det_config.json").string();
  write_text(config, R"({
  "seed": 8,
  "scene": {"n_frames": 40, "camera": {"fx": 40, "fy": 40, "cx": 24, "cy": 16, "width": 48, "height": 32}},
  "train": {"epochs": 3, "batch_size": 4, "lr": 0.003}
})");
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"det_a", "det_b"}) {
    const fs::path out = root / name;
    fs::remove_all(out);
    const std::string common = " -c " + run::quote(config) + " -o " + run::quote(out.string());
    for (const std::string cmd : {"gen", "train", "eval --render 2 --fixed-height 1,2 --method fixed,direct,filter,none"}) {
      const auto r = run::cli(cmd.substr(0, cmd.find(' ')) + common + cmd.substr(std::min(cmd.size(), cmd.find(' '))));
      if (r.code != 0) return {false, "'" + cmd + "' exited " + std::to_string(r.code) + ": " + r.output};
    }
    runs.push_back(snapshot(out));
  }
  int differing = 0;
  for (const auto& [path, bytes] : runs[0]) {
    const auto it = runs[1].find(path);
    differing += it == runs[1].end() || it->second != bytes ? 1 : 0;
  }
  differing += static_cast<int>(runs[1].size() > runs[0].size());
  const bool has_all = runs[0].count("dataset/dataset.json") && runs[0].count("checkpoints/model.json") &&
                       runs[0].count("reports/train_report.json") && runs[0].count("reports/comparison.json");
  return {differing == 0 && has_all, std::to_string(runs[0].size()) + " files compared (dataset, checkpoint, predictions, "
                                     "reports, renders), " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path root;
  bool keep = false;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      root = argv[++i];
    } else if (a == "--keep") {
      keep = true;
    } else {
      only.insert(std::stoi(a));
    }
  }
  if (root.empty()) {
    root = fs::temp_directory_path() / ("radar_height_acceptance_" + std::to_string(::getpid()));
  } else {
    keep = true;
  }
  fs::create_directories(root);

  Shared sh;
  sh.root = root;
  sh.cfg = default_config(root / "ehl");

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"loss family: knee continuity and C1, basic properties", loss_family},
      {"gradients: pointwise and end-to-end against central differences", gradients},
      {"ground truth equals the per-pixel oracle", ground_truth},
      {"metrics equal the naive oracles; pred = gt + 1 example", metrics},
      {"desk-scale: EHL beats every fixed height, low RHE=0", [&] { return desk_scale(sh); }},
      {"L1 collapses, WL1 does not", [&] { return l1_collapse(sh); }},
      {"filter keeps heights >= 0.5 and a subset of direct", [&] { return filter_semantics(sh); }},
      {"two pipeline runs are byte-identical", [&] { return determinism(root); }},
  };
  // 7 reads the predictions written by 5, so 5 runs first
  const int order[] = {1, 2, 3, 4, 8, 5, 7, 6};
  std::map<int, Outcome> results;
  for (int n : order) {
    if (!only.empty() && !only.count(n)) continue;
    std::fprintf(stderr, "running criterion %d ...\n", n);
    try {
      results[n] = criteria[n - 1].second();
    } catch (const std::exception& e) {
      results[n] = {false, std::string("threw: ") + e.what()};
    }
    std::fprintf(stderr, "criterion %d %s\n", n, results[n].pass ? "PASS" : "FAIL");
  }

  int failed = 0;
  for (const auto& [n, r] : results) {
    std::printf("%s  %d. %s -- %s\n", r.pass ? "PASS" : "FAIL", n, criteria[n - 1].first.c_str(), r.detail.c_str());
    failed += r.pass ? 0 : 1;
  }
  std::fflush(stdout);
  if (!keep) fs::remove_all(root);
  return failed == 0 ? 0 : 1;
}
