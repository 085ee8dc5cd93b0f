#include "radar_height/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "radar_height/errors.hpp"

namespace radar_height {

using nlohmann::json;

namespace {

// Strict reader over one JSON object: every key must be consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!it->is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw ConfigError("");
      }
      out = it->template get<T>();
    } catch (const std::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  template <typename T>
  void get_range(const char* key, Range<T>& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw ConfigError(where_ + "." + key + ": expected [min, max]");
    }
    out.min = (*it)[0].template get<T>();
    out.max = (*it)[1].template get<T>();
  }

  template <typename T>
  void get_object(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    from_json(*it, out);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename T>
json range_json(const Range<T>& r) {
  return json::array({r.min, r.max});
}

}  // namespace

json to_json(const LossSpec& s) {
  return {{"kind", std::string(to_string(s.kind))}, {"sigma", s.sigma}, {"alpha", s.alpha}, {"beta", s.beta}, {"gamma", s.gamma}};
}

json to_json(const CameraModel& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

json to_json(const SceneSpec& s) {
  return {{"seed", s.seed},
          {"n_frames", s.n_frames},
          {"objects_per_frame", range_json(s.objects_per_frame)},
          {"object_height", range_json(s.object_height)},
          {"object_length", range_json(s.object_length)},
          {"object_width", range_json(s.object_width)},
          {"object_distance", range_json(s.object_distance)},
          {"points_per_object", range_json(s.points_per_object)},
          {"clutter_points", range_json(s.clutter_points)},
          {"clutter_distance", range_json(s.clutter_distance)},
          {"inside_box_unassociated_rate", s.inside_box_unassociated_rate},
          {"camera_height", s.camera_height},
          {"noise", s.noise},
          {"camera", to_json(s.camera)}};
}

json to_json(const ModelShape& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"visual_channels", m.visual_channels}, {"radar_channels", m.radar_channels},
          {"c1", m.c1}, {"c2", m.c2}, {"c3", m.c3}, {"features", m.features}};
}

json to_json(const TrainConfig& t) {
  return {{"loss", to_json(t.loss)},
          {"lr", t.lr},
          {"lr_decay", t.lr_decay},
          {"plateau_patience", t.plateau_patience},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"seed", t.seed},
          {"model", to_json(t.shape)},
          {"seg_weight", t.seg_weight},
          {"use_seg", t.use_seg},
          {"threads", t.threads}};
}

json to_json(const ExtensionSpec& e) {
  return {{"method", std::string(to_string(e.method))}, {"fixed_height", e.fixed_height}, {"filter_threshold", e.filter_threshold}};
}

json to_json(const ExperimentConfig& c) {
  json t = to_json(c.train);
  // Thread count never changes results, so it stays out of the canonical form.
  t.erase("threads");
  return {{"seed", c.seed}, {"scene", to_json(c.scene)}, {"train", t}, {"extension", to_json(c.extension)},
          {"split", json::array({c.split_ratios[0], c.split_ratios[1], c.split_ratios[2]})}};
}

void from_json(const json& j, LossSpec& s) {
  ObjectReader r(j, "loss");
  std::string kind(to_string(s.kind));
  r.get("kind", kind);
  const auto parsed = parse_loss_kind(kind);
  if (!parsed) throw ConfigError("loss.kind: unknown loss '" + kind + "' (l1, l2, wl1, wl2, hl, ehl)");
  s.kind = *parsed;
  r.get("sigma", s.sigma);
  r.get("alpha", s.alpha);
  r.get("beta", s.beta);
  r.get("gamma", s.gamma);
  r.finish();
}

void from_json(const json& j, CameraModel& c) {
  ObjectReader r(j, "camera");
  r.get("fx", c.fx);
  r.get("fy", c.fy);
  r.get("cx", c.cx);
  r.get("cy", c.cy);
  r.get("width", c.width);
  r.get("height", c.height);
  r.finish();
}

void from_json(const json& j, SceneSpec& s) {
  ObjectReader r(j, "scene");
  r.get("seed", s.seed);
  r.get("n_frames", s.n_frames);
  r.get_range("objects_per_frame", s.objects_per_frame);
  r.get_range("object_height", s.object_height);
  r.get_range("object_length", s.object_length);
  r.get_range("object_width", s.object_width);
  r.get_range("object_distance", s.object_distance);
  r.get_range("points_per_object", s.points_per_object);
  r.get_range("clutter_points", s.clutter_points);
  r.get_range("clutter_distance", s.clutter_distance);
  r.get("inside_box_unassociated_rate", s.inside_box_unassociated_rate);
  r.get("camera_height", s.camera_height);
  r.get("noise", s.noise);
  r.get_object("camera", s.camera);
  r.finish();
}

void from_json(const json& j, ModelShape& m) {
  ObjectReader r(j, "model");
  r.get("rows", m.rows);
  r.get("cols", m.cols);
  r.get("visual_channels", m.visual_channels);
  r.get("radar_channels", m.radar_channels);
  r.get("c1", m.c1);
  r.get("c2", m.c2);
  r.get("c3", m.c3);
  r.get("features", m.features);
  r.finish();
}

void from_json(const json& j, TrainConfig& t) {
  ObjectReader r(j, "train");
  r.get_object("loss", t.loss);
  r.get("lr", t.lr);
  r.get("lr_decay", t.lr_decay);
  r.get("plateau_patience", t.plateau_patience);
  r.get("epochs", t.epochs);
  r.get("batch_size", t.batch_size);
  r.get("seed", t.seed);
  r.get_object("model", t.shape);
  r.get("seg_weight", t.seg_weight);
  r.get("use_seg", t.use_seg);
  r.get("threads", t.threads);
  r.finish();
}

void from_json(const json& j, ExtensionSpec& e) {
  ObjectReader r(j, "extension");
  std::string method(to_string(e.method));
  r.get("method", method);
  const auto parsed = parse_extension_method(method);
  if (!parsed) throw ConfigError("extension.method: unknown method '" + method + "' (none, fixed, direct, filter, ah)");
  e.method = *parsed;
  r.get("fixed_height", e.fixed_height);
  r.get("filter_threshold", e.filter_threshold);
  r.finish();
}

void from_json(const json& j, ExperimentConfig& c) {
  ObjectReader r(j, "config");
  r.get("seed", c.seed);
  r.get("out", c.out_dir);
  r.get_object("scene", c.scene);
  r.get_object("train", c.train);
  // A top-level "loss" section is accepted as shorthand for train.loss.
  r.get_object("loss", c.train.loss);
  r.get_object("extension", c.extension);
  if (r.has("split")) {
    const json& s = r.at("split");
    if (!s.is_array() || s.size() != 3) throw ConfigError("config.split: expected [train, val, test]");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!s[i].is_number()) throw ConfigError("config.split: ratios must be numbers");
      c.split_ratios[i] = s[i].get<double>();
    }
  }
  r.finish();
}

void finalize(ExperimentConfig& cfg) {
  cfg.scene.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.train.shape.rows = cfg.scene.camera.height;
  cfg.train.shape.cols = cfg.scene.camera.width;
  validate(cfg.scene);
  validate(cfg.train);
  validate(cfg.extension);
  for (double r : cfg.split_ratios) {
    if (!(r > 0.0)) throw ConfigError("config.split: ratios must be positive");
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": JSON parse error at byte " + std::to_string(e.byte > 0 ? e.byte - 1 : 0) + " (0-based)");
  }
  ExperimentConfig cfg;
  from_json(j, cfg);
  return cfg;
}

std::string hash_json(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) { return hash_json(to_json(cfg)); }

}  // namespace radar_height
