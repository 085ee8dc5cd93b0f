// radar-height: generate scenes, train the height model, extend and evaluate radar points.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "radar_height/errors.hpp"
#include "radar_height/pipeline.hpp"

using namespace radar_height;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "JSON experiment config (defaults apply when omitted)");
  cmd->add_option("-o,--out", c.out, "Output root (overrides the config's \"out\")");
  cmd->add_option("--seed", c.seed, "Experiment seed (overrides the config)");
  cmd->add_flag("-f,--force", c.force, "Overwrite existing outputs");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

ExtensionMethod method_arg(const std::string& name) {
  const auto m = parse_extension_method(name);
  if (!m) throw ConfigError("unknown method '" + name + "' (none, fixed, direct, filter, ah)");
  return *m;
}

void print_epoch(const EpochRecord& r) {
  if (r.train) {
    std::fprintf(stderr, "epoch %3d  lr %.3g  train l_reg %.4f  val l_reg %.4f  val seg %.4f\n", r.epoch, r.lr,
                 r.train->l_reg, r.val.l_reg, r.val.seg);
  } else {
    std::fprintf(stderr, "epoch %3d  lr %.3g  val l_reg %.4f  val seg %.4f\n", r.epoch, r.lr, r.val.l_reg, r.val.seg);
  }
}

std::string show(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar point height estimation experiments on synthetic scenes"};
  app.require_subcommand(1);

  Common gen_c;
  std::optional<int> gen_frames;
  auto* gen = app.add_subcommand("gen", "Generate and split a synthetic dataset into <out>/dataset/");
  add_common(gen, gen_c);
  gen->add_option("--frames", gen_frames, "Number of frames");

  Common train_c;
  std::string train_dataset, train_loss;
  std::optional<int> train_epochs, train_batch, train_threads;
  std::optional<double> train_lr;
  bool no_seg = false;
  auto* train_cmd = app.add_subcommand("train", "Train the height model; writes checkpoint, log, report, predictions");
  add_common(train_cmd, train_c);
  train_cmd->add_option("--dataset", train_dataset, "Dataset file (default <out>/dataset/dataset.json)");
  train_cmd->add_option("--loss", train_loss, "Regression loss: l1, l2, wl1, wl2, hl, ehl");
  train_cmd->add_option("--epochs", train_epochs, "Training epochs");
  train_cmd->add_option("--lr", train_lr, "Initial learning rate");
  train_cmd->add_option("--batch-size", train_batch, "Batch size");
  train_cmd->add_option("--threads", train_threads, "Worker threads (results do not depend on it)");
  train_cmd->add_flag("--no-seg-branch", no_seg, "Drop the free-space segmentation loss (single-task ablation)");

  Common eval_c;
  EvalOptions eval_opts;
  std::vector<std::string> eval_methods{"fixed", "direct", "filter"};
  std::optional<double> eval_threshold;
  auto* eval = app.add_subcommand("eval", "Extend radar points with each method and report height errors");
  add_common(eval, eval_c);
  eval->add_option("--dataset", eval_opts.dataset, "Dataset file (default <out>/dataset/dataset.json)");
  eval->add_option("--checkpoint", eval_opts.checkpoint, "Checkpoint (default <out>/checkpoints/model.json)");
  eval->add_option("--method", eval_methods, "Methods to evaluate: fixed, direct, filter, none, ah")->delimiter(',');
  eval->add_option("--fixed-height", eval_opts.fixed_heights, "Fixed line height(s) in m")->delimiter(',');
  eval->add_option("--threshold", eval_threshold, "Filter threshold in m");
  eval->add_option("--split", eval_opts.split, "Frames to evaluate: train, val, test, all")->capture_default_str();
  eval->add_flag("--oracle", eval_opts.oracle, "Use ground-truth heights instead of a checkpoint");
  eval->add_option("--render", eval_opts.render_frames, "Also render the first N frames per method");

  Common render_c;
  RenderOptions render_opts;
  int render_frame = 0;
  std::string render_method = "direct";
  auto* render = app.add_subcommand("render", "Draw one frame with its extended radar lines as a PPM image");
  add_common(render, render_c);
  render->add_option("--frame", render_frame, "Frame id")->required();
  render->add_option("--method", render_method, "none, fixed, direct, filter")->capture_default_str();
  render->add_option("--dataset", render_opts.dataset, "Dataset file (default <out>/dataset/dataset.json)");
  render->add_option("--predictions", render_opts.predictions, "Prediction store (default <out>/predictions/predictions.json)");
  std::optional<double> render_fixed, render_threshold;
  render->add_option("--height", render_fixed, "Fixed line height in m");
  render->add_option("--threshold", render_threshold, "Filter threshold in m");
  render->add_flag("--oracle", render_opts.oracle, "Use ground-truth heights instead of stored predictions");

  std::string depth_pred, depth_gt;
  auto* depth = app.add_subcommand("depth", "Depth metrics for a prediction/ground-truth matrix pair (valid where gt > 0)");
  depth->add_option("pred", depth_pred, "Predicted depth matrix")->required();
  depth->add_option("gt", depth_gt, "Ground-truth depth matrix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kConfig);
  }

  try {
    if (*gen) {
      ExperimentConfig cfg = resolve(gen_c);
      if (gen_frames) cfg.scene.n_frames = *gen_frames;
      finalize(cfg);
      const GenSummary s = cmd_gen(cfg, gen_c.force);
      std::printf("frames %d  objects %d  radar points %d  associated %d\n", s.frames, s.objects, s.radar_points,
                  s.associated_points);
      std::printf("split train %zu  val %zu  test %zu\n", s.split.train.size(), s.split.val.size(), s.split.test.size());
      std::printf("config %s\n", config_hash(cfg).c_str());
    } else if (*train_cmd) {
      ExperimentConfig cfg = resolve(train_c);
      if (!train_loss.empty()) {
        const auto k = parse_loss_kind(train_loss);
        if (!k) throw ConfigError("unknown loss '" + train_loss + "' (l1, l2, wl1, wl2, hl, ehl)");
        cfg.train.loss.kind = *k;
      }
      if (train_epochs) cfg.train.epochs = *train_epochs;
      if (train_lr) cfg.train.lr = *train_lr;
      if (train_batch) cfg.train.batch_size = *train_batch;
      if (train_threads) cfg.train.threads = *train_threads;
      if (no_seg) cfg.train.use_seg = false;
      finalize(cfg);
      TrainOptions opts;
      opts.force = train_c.force;
      opts.dataset = train_dataset;
      opts.progress = print_epoch;
      const TrainSummary s = cmd_train(cfg, opts);
      std::printf("val RHE %s  BHE %s  RHE!=0 %s  RHE=0 %s\n", show(s.val.rhe).c_str(), show(s.val.bhe).c_str(),
                  show(s.val.rhe_nonzero).c_str(), show(s.val.rhe_zero).c_str());
      std::printf("mean |pred| at radar pixels %.4f  mean object height %.4f  ratio %.4f%s\n", s.collapse.mean_pred_at_radar,
                  s.collapse.mean_object_height, s.collapse.ratio, s.collapsed ? "  COLLAPSED" : "");
    } else if (*eval) {
      ExperimentConfig cfg = resolve(eval_c);
      if (eval_threshold) cfg.extension.filter_threshold = *eval_threshold;
      finalize(cfg);
      eval_opts.force = eval_c.force;
      eval_opts.methods.clear();
      for (const auto& m : eval_methods) eval_opts.methods.push_back(method_arg(m));
      const EvalSummary s = cmd_eval(cfg, eval_opts);
      std::fputs(s.table.c_str(), stdout);
    } else if (*render) {
      ExperimentConfig cfg = resolve(render_c);
      if (render_fixed) cfg.extension.fixed_height = *render_fixed;
      if (render_threshold) cfg.extension.filter_threshold = *render_threshold;
      finalize(cfg);
      render_opts.force = render_c.force;
      std::printf("%s\n", cmd_render(cfg, render_frame, method_arg(render_method), render_opts).string().c_str());
    } else if (*depth) {
      const DepthErrorReport r = cmd_depth(depth_pred, depth_gt);
      std::printf("%s\n", to_json(r).dump(2).c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
