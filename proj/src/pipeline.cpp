#include "radar_height/pipeline.hpp"

#include <cstdio>
#include <sstream>

#include "radar_height/errors.hpp"
#include "radar_height/render.hpp"

namespace radar_height {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

Dataset load_for(const ExperimentConfig& cfg, const std::string& override_path, const OutputLayout& layout) {
  const std::string path = override_path.empty() ? layout.dataset().string() : override_path;
  if (!fs::exists(path)) throw IoError("dataset '" + path + "' not found; run gen first");
  Dataset d = load_dataset(path);
  if (!(d.camera == cfg.scene.camera)) {
    throw ConfigError("dataset camera differs from the configured camera; use the config the dataset was generated with");
  }
  return d;
}

std::vector<Frame> split_frames(const Dataset& d, const std::string& split) {
  if (split == "train") return d.select(d.split.train);
  if (split == "val") return d.select(d.split.val);
  if (split == "test") return d.select(d.split.test);
  if (split == "all") return d.frames;
  throw ConfigError("unknown split '" + split + "' (train, val, test, all)");
}

// Predicts one frame at a time so only a single sample is ever alive.
PredictionStore predict_frames(const ToyModelParams& params, const std::vector<Frame>& frames,
                               std::vector<HeightErrorReport>* dense) {
  PredictionStore store;
  for (const auto& f : frames) {
    const Sample s = make_sample(f);
    const Prediction pred = forward(params, s.input);
    std::vector<PointPrediction> points;
    for (const auto& p : project_radar(f).points) points.push_back({p.id, p.pixel, pred.height(p.pixel.row, p.pixel.col)});
    store.put(f.id, std::move(points));
    if (dense) dense->push_back(height_errors(s.gt.heights, pred.height, s.gt.partition));
  }
  return store;
}

Checkpoint load_checked(const ExperimentConfig& cfg, const std::string& path) {
  if (!fs::exists(path)) throw IoError("checkpoint '" + path + "' not found; run train first");
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.params.shape.rows != cfg.scene.camera.height || ckpt.params.shape.cols != cfg.scene.camera.width) {
    throw ConfigError("checkpoint image size does not match the camera");
  }
  return ckpt;
}

std::string method_name(ExtensionMethod m, double fixed_height) {
  if (m == ExtensionMethod::kFixed) return "fixed_" + num(fixed_height);
  return std::string(to_string(m));
}

json summary_json(const MethodResult& r, const std::string& hash, const std::string& split) {
  json frames = json::array();
  for (const auto& [id, rep] : r.frames) frames.push_back({{"id", id}, {"report", to_json(rep)}});
  json j = {{"config_hash", hash},
            {"method", std::string(to_string(r.method))},
            {"name", r.name},
            {"split", split},
            {"summary", to_json(r.summary)},
            {"points", r.points},
            {"surviving_points", r.surviving},
            {"removed_points", r.points - r.surviving},
            {"frames", frames}};
  if (r.method == ExtensionMethod::kFixed) j["fixed_height"] = r.parameter;
  if (r.method == ExtensionMethod::kFilter) j["threshold"] = r.parameter;
  return j;
}

std::string comparison_table(const EvalSummary& s) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-14s %9s %9s %9s %9s %8s %8s\n", "method", "RHE", "RHE!=0", "RHE=0", "BHE", "points",
                "kept");
  out << line;
  for (const auto& r : s.methods) {
    std::snprintf(line, sizeof(line), "%-14s %9s %9s %9s %9s %8lld %8lld\n", r.name.c_str(), cell(r.summary.rhe).c_str(),
                  cell(r.summary.rhe_nonzero).c_str(), cell(r.summary.rhe_zero).c_str(), cell(r.summary.bhe).c_str(),
                  r.points, r.surviving);
    out << line;
  }
  if (s.model) {
    std::snprintf(line, sizeof(line), "%-14s %9s %9s %9s %9s %8s %8s\n", "model-map", cell(s.model->rhe).c_str(),
                  cell(s.model->rhe_nonzero).c_str(), cell(s.model->rhe_zero).c_str(), cell(s.model->bhe).c_str(), "-", "-");
    out << line;
  }
  return out.str();
}

}  // namespace

void guard_outputs(const std::vector<fs::path>& paths, bool force) {
  if (force) return;
  for (const auto& p : paths) {
    if (fs::exists(p)) throw IoError("'" + p.string() + "' already exists; pass --force to overwrite");
  }
}

GenSummary cmd_gen(const ExperimentConfig& cfg, bool force) {
  const OutputLayout layout{cfg.out_dir};
  guard_outputs({layout.dataset()}, force);

  Dataset d;
  d.camera = cfg.scene.camera;
  d.frames = generate(cfg.scene);
  std::vector<int> ids;
  for (const auto& f : d.frames) ids.push_back(f.id);
  d.split = split(ids, cfg.split_ratios, cfg.seed);
  d.generator_hash = hash_json(to_json(cfg.scene));
  save_dataset(layout.dataset().string(), d);

  GenSummary s;
  s.frames = static_cast<int>(d.frames.size());
  for (const auto& f : d.frames) {
    s.objects += static_cast<int>(f.objects.size());
    s.radar_points += static_cast<int>(f.radar.size());
    for (const auto& [id, owner] : associate(f)) s.associated_points += owner ? 1 : 0;
  }
  s.split = d.split;
  return s;
}

TrainSummary cmd_train(const ExperimentConfig& cfg, const TrainOptions& opts) {
  const OutputLayout layout{cfg.out_dir};
  const Dataset d = load_for(cfg, opts.dataset, layout);
  guard_outputs({layout.checkpoint(), layout.train_log(), layout.train_report(), layout.predictions()}, opts.force);

  const std::string hash = config_hash(cfg);
  const std::vector<Frame> val_frames = d.select(d.split.val);
  const std::vector<Sample> train_set = make_samples(d.select(d.split.train));
  const std::vector<Sample> val_set = make_samples(val_frames);

  std::string log;
  const TrainResult result = train(cfg.train, train_set, val_set, [&](const EpochRecord& rec) {
    json line = to_json(rec);
    line["config_hash"] = hash;
    log += line.dump() + "\n";
    if (opts.progress) opts.progress(rec);
  });

  save_checkpoint(layout.checkpoint().string(), {result.params, cfg.train, hash});
  write_text(layout.train_log().string(), log);

  TrainSummary s;
  s.epochs = cfg.train.epochs;
  s.val = dataset_aggregate(evaluate_height(result.params, val_set));
  s.collapse = collapse_stats(result.params, val_set, val_frames);
  s.collapsed = s.collapse.ratio < kCollapseRatio;

  const json report = {{"config_hash", hash},
                       {"dataset_hash", d.generator_hash},
                       {"loss", std::string(to_string(cfg.train.loss.kind))},
                       {"use_seg", cfg.train.use_seg},
                       {"epochs", s.epochs},
                       {"final_lr", result.log.back().lr},
                       {"val", to_json(s.val)},
                       {"collapse",
                        {{"mean_pred_at_radar", s.collapse.mean_pred_at_radar},
                         {"mean_object_height", s.collapse.mean_object_height},
                         {"ratio", s.collapse.ratio},
                         {"threshold", kCollapseRatio},
                         {"collapsed", s.collapsed}}}};
  write_text(layout.train_report().string(), report.dump(2) + "\n");
  save_predictions(layout.predictions().string(), predict_frames(result.params, d.frames, nullptr), hash);
  return s;
}

EvalSummary cmd_eval(const ExperimentConfig& cfg, const EvalOptions& opts) {
  for (auto m : opts.methods) {
    if (m == ExtensionMethod::kAdaptive) {
      throw NotImplementedError("adaptive height (AH) extension is not implemented; use fixed, direct or filter");
    }
  }
  const OutputLayout layout{cfg.out_dir};
  const Dataset d = load_for(cfg, opts.dataset, layout);
  const std::vector<Frame> frames = split_frames(d, opts.split);
  const std::string hash = config_hash(cfg);

  struct Plan {
    ExtensionSpec spec;
    std::string name;
  };
  std::vector<Plan> plans;
  bool needs_predictions = false;
  for (auto m : opts.methods) {
    ExtensionSpec spec = cfg.extension;
    spec.method = m;
    if (m == ExtensionMethod::kFixed) {
      const std::vector<double> heights = opts.fixed_heights.empty() ? std::vector<double>{cfg.extension.fixed_height}
                                                                    : opts.fixed_heights;
      for (double h : heights) {
        spec.fixed_height = h;
        validate(spec);
        plans.push_back({spec, method_name(m, h)});
      }
      continue;
    }
    validate(spec);
    needs_predictions = needs_predictions || m == ExtensionMethod::kDirect || m == ExtensionMethod::kFilter;
    plans.push_back({spec, method_name(m, 0.0)});
  }

  std::vector<fs::path> outputs{layout.comparison_json(), layout.comparison_txt()};
  for (const auto& p : plans) outputs.push_back(layout.eval_report(p.name));
  if (needs_predictions) outputs.push_back(layout.eval_predictions(opts.split));
  const int n_render = std::min<int>(opts.render_frames, static_cast<int>(frames.size()));
  for (int k = 0; k < n_render; ++k) {
    for (const auto& p : plans) outputs.push_back(layout.render(frames[k].id, p.name));
  }
  guard_outputs(outputs, opts.force);

  EvalSummary summary;
  PredictionStore store;
  if (needs_predictions) {
    if (opts.oracle) {
      store = oracle_predictions(frames);
    } else {
      const Checkpoint ckpt = load_checked(cfg, opts.checkpoint.empty() ? layout.checkpoint().string() : opts.checkpoint);
      std::vector<HeightErrorReport> dense;
      store = predict_frames(ckpt.params, frames, &dense);
      summary.model = dataset_aggregate(dense);
    }
    save_predictions(layout.eval_predictions(opts.split).string(), store, hash);
  }

  std::vector<GroundTruth> gts;
  gts.reserve(frames.size());
  for (const auto& f : frames) gts.push_back(build_height_map(f));

  for (const auto& plan : plans) {
    MethodResult r;
    r.name = plan.name;
    r.method = plan.spec.method;
    r.parameter = r.method == ExtensionMethod::kFixed ? plan.spec.fixed_height : plan.spec.filter_threshold;
    std::vector<HeightErrorReport> reports;
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const auto heights = extend(frames[k], plan.spec, needs_predictions ? &store : nullptr);
      // only points that land in the image can carry a line
      const auto proj = project_radar(frames[k]);
      r.points += static_cast<long long>(proj.points.size());
      for (const auto& ph : heights) {
        for (const auto& p : proj.points) r.surviving += p.id == ph.point_id ? 1 : 0;
      }
      reports.push_back(radar_point_errors(frames[k], gts[k], heights));
      r.frames.emplace_back(frames[k].id, reports.back());
      if (static_cast<int>(k) < n_render) {
        write_text(layout.render(frames[k].id, plan.name).string(), encode_ppm(render_overlay(frames[k], heights)));
      }
    }
    r.summary = dataset_aggregate(reports);
    write_text(layout.eval_report(plan.name).string(), summary_json(r, hash, opts.split).dump(2) + "\n");
    summary.methods.push_back(std::move(r));
  }

  summary.table = comparison_table(summary);
  json rows = json::array();
  for (const auto& r : summary.methods) {
    rows.push_back({{"name", r.name},
                    {"rhe", opt(r.summary.rhe)},
                    {"rhe_nonzero", opt(r.summary.rhe_nonzero)},
                    {"rhe_zero", opt(r.summary.rhe_zero)},
                    {"points", r.points},
                    {"surviving_points", r.surviving}});
  }
  json cmp = {{"config_hash", hash}, {"split", opts.split}, {"oracle", opts.oracle}, {"methods", rows}};
  if (summary.model) cmp["model"] = to_json(*summary.model);
  write_text(layout.comparison_json().string(), cmp.dump(2) + "\n");
  write_text(layout.comparison_txt().string(), summary.table);
  return summary;
}

fs::path cmd_render(const ExperimentConfig& cfg, int frame_id, ExtensionMethod method, const RenderOptions& opts) {
  if (method == ExtensionMethod::kAdaptive) {
    throw NotImplementedError("adaptive height (AH) extension is not implemented; use fixed, direct or filter");
  }
  const OutputLayout layout{cfg.out_dir};
  const Dataset d = load_for(cfg, opts.dataset, layout);
  const Frame* frame = d.find_frame(frame_id);
  if (!frame) throw ConfigError("unknown frame id " + std::to_string(frame_id));

  ExtensionSpec spec = cfg.extension;
  spec.method = method;
  validate(spec);
  const fs::path out = layout.render(frame_id, method_name(method, spec.fixed_height));
  guard_outputs({out}, opts.force);

  PredictionStore store;
  const bool needs_predictions = method == ExtensionMethod::kDirect || method == ExtensionMethod::kFilter;
  if (needs_predictions) {
    if (opts.oracle) {
      store = oracle_predictions({*frame});
    } else {
      const std::string path = opts.predictions.empty() ? layout.predictions().string() : opts.predictions;
      if (!fs::exists(path)) throw IoError("predictions '" + path + "' not found; run train first or pass --oracle");
      store = load_predictions(path);
    }
  }
  write_text(out.string(), encode_ppm(render_overlay(*frame, extend(*frame, spec, needs_predictions ? &store : nullptr))));
  return out;
}

Grid<double> parse_matrix(const std::string& text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::istringstream cells(line);
    std::vector<double> row;
    std::string tok;
    while (cells >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw FormatError(source + ": line " + std::to_string(line_no) + ": bad number '" + tok + "'");
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(source + ": line " + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
                        " values, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(source + ": no values");
  Grid<double> g(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) g(i, j) = rows[i][j];
  }
  return g;
}

DepthErrorReport cmd_depth(const std::string& pred_path, const std::string& gt_path) {
  const Grid<double> pred = parse_matrix(read_text(pred_path), pred_path);
  const Grid<double> gt = parse_matrix(read_text(gt_path), gt_path);
  if (!pred.same_shape(gt)) throw FormatError("prediction and ground-truth matrices differ in shape");
  Grid<std::uint8_t> valid(gt.rows(), gt.cols(), 0);
  for (int i = 0; i < gt.rows(); ++i) {
    for (int j = 0; j < gt.cols(); ++j) valid(i, j) = gt(i, j) > 0.0 ? 1 : 0;
  }
  try {
    return depth_errors(pred, gt, valid);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("depth: ") + e.what());
  }
}

}  // namespace radar_height
