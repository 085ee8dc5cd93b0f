#include "radar_height/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "radar_height/errors.hpp"

namespace radar_height {

using nlohmann::json;

namespace {

constexpr const char* kDatasetFormat = "radar_height.dataset";
constexpr const char* kPredictionsFormat = "radar_height.predictions";
constexpr const char* kCheckpointFormat = "radar_height.checkpoint";

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw FormatError("expected [x, y, z]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void check_header(const json& j, const char* format, const std::string& source) {
  if (!j.is_object()) throw FormatError(source + ": top level must be an object");
  const auto v = j.find("schema_version");
  if (v == j.end() || !v->is_number_integer()) throw FormatError(source + ": missing integer schema_version");
  const int version = v->get<int>();
  if (version > kSchemaVersion || version < 1) {
    throw FormatError(source + ": unsupported schema_version " + std::to_string(version) + " (this build reads 1.." +
                      std::to_string(kSchemaVersion) + ")");
  }
  const auto f = j.find("format");
  if (f == j.end() || !f->is_string() || f->get<std::string>() != format) {
    throw FormatError(source + ": not a " + std::string(format) + " file");
  }
}

json frame_json(const Frame& f) {
  json objects = json::array();
  for (const auto& b : f.objects) {
    objects.push_back({{"id", b.id},
                       {"center", vec_json(b.center)},
                       {"size", json::array({b.size.length, b.size.width, b.size.height})},
                       {"yaw", b.yaw}});
  }
  json radar = json::array();
  for (const auto& p : f.radar) {
    radar.push_back({{"id", p.id}, {"position", vec_json(p.position)}, {"rcs", p.rcs}, {"vx", p.vx}, {"vy", p.vy}});
  }
  json assoc = nullptr;
  if (f.associations) {
    assoc = json::array();
    for (const auto& [k, m] : *f.associations) assoc.push_back(json::array({k, m}));
  }
  return {{"id", f.id}, {"objects", objects}, {"radar", radar}, {"associations", assoc}};
}

Frame frame_from(const json& j, const CameraModel& camera) {
  Frame f;
  f.camera = camera;
  f.id = j.at("id").get<int>();
  for (const auto& o : j.at("objects")) {
    Box3D b;
    b.id = o.at("id").get<int>();
    b.center = vec_from(o.at("center"));
    const auto& s = o.at("size");
    if (!s.is_array() || s.size() != 3) throw FormatError("objects.size: expected [length, width, height]");
    b.size = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    b.yaw = o.at("yaw").get<double>();
    f.objects.push_back(b);
  }
  for (const auto& r : j.at("radar")) {
    RadarPoint p;
    p.id = r.at("id").get<int>();
    p.position = vec_from(r.at("position"));
    p.rcs = r.at("rcs").get<double>();
    p.vx = r.at("vx").get<double>();
    p.vy = r.at("vy").get<double>();
    f.radar.push_back(p);
  }
  const auto& a = j.at("associations");
  if (!a.is_null()) {
    f.associations.emplace();
    for (const auto& pair : a) (*f.associations)[pair.at(0).get<int>()] = pair.at(1).get<int>();
  }
  return f;
}

json ids_json(const std::vector<int>& ids) { return json(ids); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

const Frame* Dataset::find_frame(int id) const {
  for (const auto& f : frames) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

std::vector<Frame> Dataset::select(const std::vector<int>& ids) const {
  std::vector<Frame> out;
  out.reserve(ids.size());
  for (int id : ids) {
    const Frame* f = find_frame(id);
    if (!f) throw FormatError("split references unknown frame id " + std::to_string(id));
    out.push_back(*f);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ": parse error at byte " + std::to_string(e.byte > 0 ? e.byte - 1 : 0) + " (0-based)");
  }
}

json dataset_to_json(const Dataset& d) {
  json frames = json::array();
  for (const auto& f : d.frames) {
    if (!(f.camera == d.camera)) throw ConfigError("dataset frames must share the dataset camera");
    frames.push_back(frame_json(f));
  }
  return {{"format", kDatasetFormat},
          {"schema_version", kSchemaVersion},
          {"generator_hash", d.generator_hash},
          {"camera", to_json(d.camera)},
          {"split", {{"train", ids_json(d.split.train)}, {"val", ids_json(d.split.val)}, {"test", ids_json(d.split.test)}}},
          {"frames", frames}};
}

Dataset dataset_from_json(const json& j) {
  check_header(j, kDatasetFormat, "dataset");
  Dataset d;
  try {
    from_json(j.at("camera"), d.camera);
    d.generator_hash = j.at("generator_hash").get<std::string>();
    const auto& s = j.at("split");
    d.split.train = s.at("train").get<std::vector<int>>();
    d.split.val = s.at("val").get<std::vector<int>>();
    d.split.test = s.at("test").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("dataset header: ") + e.what());
  }
  const auto& frames = j.at("frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Frame f;
    try {
      f = frame_from(frames[i], d.camera);
    } catch (const std::exception& e) {
      throw FormatError("frames[" + std::to_string(i) + "]: " + e.what());
    }
    if (auto v = frame_violation(f)) throw FormatError("frames[" + std::to_string(i) + "]: " + *v);
    d.frames.push_back(std::move(f));
  }
  for (const auto* part : {&d.split.train, &d.split.val, &d.split.test}) {
    for (int id : *part) {
      if (!d.find_frame(id)) throw FormatError("split references unknown frame id " + std::to_string(id));
    }
  }
  return d;
}

void save_dataset(const std::string& path, const Dataset& d) { write_text(path, dataset_to_json(d).dump() + "\n"); }

Dataset load_dataset(const std::string& path) { return dataset_from_json(parse_json(read_text(path), path)); }

void save_predictions(const std::string& path, const PredictionStore& store, const std::string& config_hash) {
  json frames = json::array();
  for (const auto& [id, points] : store.frames()) {
    json pts = json::array();
    for (const auto& p : points) pts.push_back(json::array({p.point_id, p.pixel.row, p.pixel.col, p.height}));
    frames.push_back({{"id", id}, {"points", pts}});
  }
  const json j = {{"format", kPredictionsFormat},
                  {"schema_version", kSchemaVersion},
                  {"config_hash", config_hash},
                  {"frames", frames}};
  write_text(path, j.dump() + "\n");
}

PredictionStore load_predictions(const std::string& path) {
  const json j = parse_json(read_text(path), path);
  check_header(j, kPredictionsFormat, path);
  PredictionStore store;
  try {
    for (const auto& f : j.at("frames")) {
      std::vector<PointPrediction> points;
      for (const auto& p : f.at("points")) {
        points.push_back({p.at(0).get<int>(), {p.at(1).get<int>(), p.at(2).get<int>()}, p.at(3).get<double>()});
      }
      store.put(f.at("id").get<int>(), std::move(points));
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return store;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const ModelLayout layout = ckpt.params.layout();
  if (ckpt.params.values.size() != layout.total) throw ConfigError("checkpoint: parameter count does not match shape");
  json layers = json::array();
  for (const auto& named : layout.layers()) {
    const auto& l = named.layer;
    const auto begin = ckpt.params.values.begin() + static_cast<std::ptrdiff_t>(l.offset);
    const std::vector<double> weights(begin, begin + static_cast<std::ptrdiff_t>(l.weight_count()));
    const std::vector<double> bias(begin + static_cast<std::ptrdiff_t>(l.weight_count()),
                                   begin + static_cast<std::ptrdiff_t>(l.param_count()));
    layers.push_back({{"name", named.name},
                      {"shape", json::array({l.out, l.in, l.kernel, l.kernel})},
                      {"stride", l.stride},
                      {"weights", weights},
                      {"bias", bias}});
  }
  const json j = {{"format", kCheckpointFormat},
                  {"schema_version", kSchemaVersion},
                  {"config_hash", ckpt.config_hash},
                  {"train_config", to_json(ckpt.config)},
                  {"model", to_json(ckpt.params.shape)},
                  {"layers", layers}};
  write_text(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  const json j = parse_json(read_text(path), path);
  check_header(j, kCheckpointFormat, path);
  Checkpoint ckpt;
  try {
    ckpt.config_hash = j.at("config_hash").get<std::string>();
    from_json(j.at("train_config"), ckpt.config);
    from_json(j.at("model"), ckpt.params.shape);
    const ModelLayout layout = ckpt.params.layout();
    ckpt.params.values.assign(layout.total, 0.0);
    const auto named = layout.layers();
    const auto& layers = j.at("layers");
    if (layers.size() != named.size()) throw FormatError("layer count does not match the model shape");
    for (std::size_t i = 0; i < named.size(); ++i) {
      const auto& src = layers[i];
      const auto& l = named[i].layer;
      if (src.at("name").get<std::string>() != named[i].name) throw FormatError("layer " + std::to_string(i) + " name mismatch");
      const auto weights = src.at("weights").get<std::vector<double>>();
      const auto bias = src.at("bias").get<std::vector<double>>();
      if (weights.size() != l.weight_count() || bias.size() != static_cast<std::size_t>(l.out)) {
        throw FormatError("layer " + named[i].name + " has the wrong number of values");
      }
      std::copy(weights.begin(), weights.end(), ckpt.params.values.begin() + static_cast<std::ptrdiff_t>(l.offset));
      std::copy(bias.begin(), bias.end(),
                ckpt.params.values.begin() + static_cast<std::ptrdiff_t>(l.offset + l.weight_count()));
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path + ": " + e.what());
  }
  return ckpt;
}

json to_json(const HeightErrorReport& r) {
  return {{"rhe", opt_json(r.rhe)},
          {"bhe", opt_json(r.bhe)},
          {"rhe_nonzero", opt_json(r.rhe_nonzero)},
          {"rhe_zero", opt_json(r.rhe_zero)},
          {"radar_pixels", r.radar_pixels},
          {"nonzero_pixels", r.nonzero_pixels}};
}

json to_json(const HeightSummary& s) {
  return {{"rhe", opt_json(s.rhe)},
          {"bhe", opt_json(s.bhe)},
          {"rhe_nonzero", opt_json(s.rhe_nonzero)},
          {"rhe_zero", opt_json(s.rhe_zero)},
          {"frames", s.frames},
          {"rhe_frames", s.rhe_frames},
          {"bhe_frames", s.bhe_frames},
          {"rhe_nonzero_frames", s.rhe_nonzero_frames},
          {"rhe_zero_frames", s.rhe_zero_frames}};
}

json to_json(const DepthErrorReport& r) {
  return {{"mae", r.mae}, {"rmse", r.rmse}, {"absrel", r.absrel}, {"delta", json::array({r.delta[0], r.delta[1], r.delta[2]})},
          {"count", r.count}};
}

json to_json(const EpochRecord& r) {
  auto losses = [](const LossMeans& m) {
    return json{{"l_bg", m.l_bg}, {"l_fg", m.l_fg}, {"l_rad", m.l_rad}, {"l_reg", m.l_reg}, {"seg", m.seg}, {"total", m.total}};
  };
  return {{"epoch", r.epoch}, {"lr", r.lr}, {"train", r.train ? losses(*r.train) : json(nullptr)}, {"val", losses(r.val)}};
}

}  // namespace radar_height
