#pragma once

// The experiment commands behind the command-line tool. Every command reads and
// writes under one output root with a fixed layout and refuses to replace an
// existing artifact unless forced.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "radar_height/config.hpp"
#include "radar_height/io.hpp"
#include "radar_height/metrics.hpp"

namespace radar_height {

/// Mean |H^| at RAD pixels below this fraction of the mean object height counts as collapse.
inline constexpr double kCollapseRatio = 0.05;

struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path dataset() const { return root / "dataset" / "dataset.json"; }
  std::filesystem::path checkpoint() const { return root / "checkpoints" / "model.json"; }
  std::filesystem::path predictions() const { return root / "predictions" / "predictions.json"; }
  std::filesystem::path eval_predictions(const std::string& split) const {
    return root / "predictions" / ("eval_" + split + ".json");
  }
  std::filesystem::path train_log() const { return root / "reports" / "train_log.jsonl"; }
  std::filesystem::path train_report() const { return root / "reports" / "train_report.json"; }
  std::filesystem::path eval_report(const std::string& name) const { return root / "reports" / ("eval_" + name + ".json"); }
  std::filesystem::path comparison_json() const { return root / "reports" / "comparison.json"; }
  std::filesystem::path comparison_txt() const { return root / "reports" / "comparison.txt"; }
  std::filesystem::path render(int frame_id, const std::string& method) const {
    return root / "renders" / ("frame_" + std::to_string(frame_id) + "_" + method + ".ppm");
  }
};

/// Throws IoError naming the first path that exists, unless force is set.
void guard_outputs(const std::vector<std::filesystem::path>& paths, bool force);

struct GenSummary {
  int frames = 0;
  int objects = 0;
  int radar_points = 0;
  int associated_points = 0;
  Split split;
};

GenSummary cmd_gen(const ExperimentConfig& cfg, bool force);

struct TrainOptions {
  bool force = false;
  std::string dataset;  // empty: the layout default
  std::function<void(const EpochRecord&)> progress;
};

struct TrainSummary {
  int epochs = 0;
  HeightSummary val;
  CollapseStats collapse;
  bool collapsed = false;
};

TrainSummary cmd_train(const ExperimentConfig& cfg, const TrainOptions& opts);

struct EvalOptions {
  bool force = false;
  std::string dataset;
  std::string checkpoint;
  bool oracle = false;  // ground-truth heights stand in for the network
  std::string split = "test";
  std::vector<ExtensionMethod> methods{ExtensionMethod::kFixed, ExtensionMethod::kDirect, ExtensionMethod::kFilter};
  std::vector<double> fixed_heights;  // empty: the config's fixed height
  int render_frames = 0;              // renders for the first n frames of the split
};

struct MethodResult {
  std::string name;
  ExtensionMethod method = ExtensionMethod::kNone;
  double parameter = 0.0;  // fixed height or filter threshold
  HeightSummary summary;
  long long points = 0;     // radar points that project into the image
  long long surviving = 0;  // points that keep a line
  std::vector<std::pair<int, HeightErrorReport>> frames;
};

struct EvalSummary {
  std::vector<MethodResult> methods;
  std::optional<HeightSummary> model;  // dense-map errors of the network itself
  std::string table;
};

EvalSummary cmd_eval(const ExperimentConfig& cfg, const EvalOptions& opts);

struct RenderOptions {
  bool force = false;
  std::string dataset;
  std::string predictions;
  bool oracle = false;
};

/// Writes one overlay image and returns its path.
std::filesystem::path cmd_render(const ExperimentConfig& cfg, int frame_id, ExtensionMethod method,
                                 const RenderOptions& opts);

/// Whitespace-separated numeric matrix, one image row per line. Throws FormatError.
Grid<double> parse_matrix(const std::string& text, const std::string& source);

/// Depth metrics for a prediction/ground-truth file pair, scored where gt > 0.
DepthErrorReport cmd_depth(const std::string& pred_path, const std::string& gt_path);

}  // namespace radar_height
