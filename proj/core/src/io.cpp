#include "exseg/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace exseg {

namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed for " + path.string());
  return text;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json parse_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": parse error at byte " + std::to_string(e.byte) +
                             ": " + e.what());
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::filesystem::path volume_header_path(const std::filesystem::path& path) {
  if (path.extension() == ".json") return path;
  std::filesystem::path p = path;
  p += ".json";
  return p;
}

std::filesystem::path volume_payload_path(const std::filesystem::path& path) {
  std::filesystem::path p = volume_header_path(path);
  p.replace_extension(".raw");
  return p;
}

Volume read_volume(const std::filesystem::path& path) {
  const std::filesystem::path header_path = volume_header_path(path);
  const json header = parse_json(header_path);

  const auto require = [&](const char* key) -> const json& {
    if (!header.contains(key))
      throw std::runtime_error(header_path.string() + ": missing header field '" + key + "'");
    return header.at(key);
  };

  const json& jshape = require("shape");
  const json& jspacing = require("spacing");
  if (!jshape.is_array() || jshape.size() != 3)
    throw std::runtime_error(header_path.string() + ": shape must be a 3-element array");
  if (!jspacing.is_array() || jspacing.size() != 3)
    throw std::runtime_error(header_path.string() + ": spacing must be a 3-element array");

  std::array<int, 3> shape{};
  std::array<double, 3> spacing{};
  for (int a = 0; a < 3; ++a) {
    if (!jshape[a].is_number_integer() || jshape[a].get<std::int64_t>() < 1)
      throw std::runtime_error(header_path.string() + ": invalid shape, extents must be >= 1");
    shape[a] = jshape[a].get<int>();
    spacing[a] = jspacing[a].get<double>();
    if (!(spacing[a] > 0.0))
      throw std::runtime_error(header_path.string() + ": spacing must be positive");
  }
  if (require("dtype").get<std::string>() != "f32le")
    throw std::runtime_error(header_path.string() + ": unsupported dtype, expected \"f32le\"");
  if (require("order").get<std::string>() != "x-fastest")
    throw std::runtime_error(header_path.string() + ": unsupported order, expected \"x-fastest\"");

  const std::filesystem::path raw_path = volume_payload_path(path);
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + raw_path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read failed for " + raw_path.string());

  const std::size_t count =
      static_cast<std::size_t>(shape[0]) * static_cast<std::size_t>(shape[1]) *
      static_cast<std::size_t>(shape[2]);
  if (bytes.size() != count * 4)
    throw std::runtime_error(raw_path.string() + ": payload length mismatch, expected " +
                             std::to_string(count * 4) + " bytes, got " +
                             std::to_string(bytes.size()));

  std::vector<float> data(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::uint32_t u = static_cast<std::uint32_t>(bytes[4 * n]) |
                            (static_cast<std::uint32_t>(bytes[4 * n + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes[4 * n + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes[4 * n + 3]) << 24);
    data[n] = std::bit_cast<float>(u);
  }
  return Volume(shape, spacing, std::move(data));
}

void write_volume(const std::filesystem::path& path, const Volume& vol) {
  const auto& s = vol.shape();
  const auto& sp = vol.spacing();
  json header;
  header["shape"] = {s[0], s[1], s[2]};
  header["spacing"] = {sp[0], sp[1], sp[2]};
  header["dtype"] = "f32le";
  header["order"] = "x-fastest";
  write_text(volume_header_path(path), header.dump(2) + "\n");

  std::vector<unsigned char> bytes(vol.size() * 4);
  for (std::size_t n = 0; n < vol.size(); ++n) {
    const std::uint32_t u = std::bit_cast<std::uint32_t>(vol.data()[n]);
    bytes[4 * n] = static_cast<unsigned char>(u & 0xff);
    bytes[4 * n + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
    bytes[4 * n + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
    bytes[4 * n + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
  }
  const std::filesystem::path raw_path = volume_payload_path(path);
  std::ofstream out(raw_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + raw_path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + raw_path.string());
}

namespace {
constexpr std::array<const char*, 6> kPointKeys = {"x_min", "x_max", "y_min",
                                                   "y_max", "z_min", "z_max"};
}

ExtremePointSet read_points(const std::filesystem::path& path) {
  const json j = parse_json(path);
  if (!j.is_object() || j.size() != kPointKeys.size())
    throw std::runtime_error(path.string() +
                             ": points file must be an object with exactly the six extreme-point "
                             "keys");
  ExtremePointSet pts;
  for (std::size_t n = 0; n < kPointKeys.size(); ++n) {
    const char* key = kPointKeys[n];
    if (!j.contains(key))
      throw std::runtime_error(path.string() + ": missing key '" + key + "'");
    const json& triple = j.at(key);
    if (!triple.is_array() || triple.size() != 3 ||
        !std::all_of(triple.begin(), triple.end(),
                     [](const json& v) { return v.is_number_integer(); }))
      throw std::runtime_error(path.string() + ": key '" + key +
                               "' must be an integer [i, j, k] triple");
    pts.points[n] = {triple[0].get<int>(), triple[1].get<int>(), triple[2].get<int>()};
  }
  return pts;
}

void write_points(const std::filesystem::path& path, const ExtremePointSet& pts) {
  json j;
  for (std::size_t n = 0; n < kPointKeys.size(); ++n) {
    const VoxelIndex& v = pts.points[n];
    j[kPointKeys[n]] = {v.i, v.j, v.k};
  }
  write_text(path, j.dump(2) + "\n");
}

std::string supervision_mode_name(SupervisionMode m) {
  switch (m) {
    case SupervisionMode::Naive: return "naive";
    case SupervisionMode::Geodesic: return "geodesic";
    case SupervisionMode::GeodesicReg: return "geodesic-reg";
  }
  throw std::logic_error("unreachable supervision mode");
}

SupervisionMode parse_supervision_mode(std::string name) {
  name = lower(std::move(name));
  if (name == "naive") return SupervisionMode::Naive;
  if (name == "geodesic") return SupervisionMode::Geodesic;
  if (name == "geodesic-reg" || name == "geodesic+reg" || name == "geodesic_reg")
    return SupervisionMode::GeodesicReg;
  throw std::runtime_error("unknown supervision mode '" + name +
                           "', expected naive|geodesic|geodesic-reg");
}

std::string geodesic_metric_name(GeodesicMetric m) {
  switch (m) {
    case GeodesicMetric::Gradient: return "gradient";
    case GeodesicMetric::GradientEuclidean: return "gradient-euclidean";
    case GeodesicMetric::Deep: return "deep";
  }
  throw std::logic_error("unreachable geodesic metric");
}

GeodesicMetric parse_geodesic_metric(std::string name) {
  name = lower(std::move(name));
  if (name == "gradient") return GeodesicMetric::Gradient;
  if (name == "gradient-euclidean" || name == "gradient_euclidean")
    return GeodesicMetric::GradientEuclidean;
  if (name == "deep") return GeodesicMetric::Deep;
  throw std::runtime_error("unknown geodesic metric '" + name +
                           "', expected gradient|gradient-euclidean|deep");
}

namespace {

std::string sigma_alpha_units_name(SigmaAlphaUnits u) {
  return u == SigmaAlphaUnits::Voxel ? "voxel" : "mm";
}

SigmaAlphaUnits parse_sigma_alpha_units(std::string name) {
  name = lower(std::move(name));
  if (name == "voxel" || name == "voxels") return SigmaAlphaUnits::Voxel;
  if (name == "mm") return SigmaAlphaUnits::Mm;
  throw std::runtime_error("unknown sigma_alpha_units '" + name + "', expected voxel|mm");
}

TrainConfig apply_config_fields(const json& j, TrainConfig cfg) {
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "lr0") cfg.lr0 = value.get<double>();
    else if (key == "momentum") cfg.momentum = value.get<double>();
    else if (key == "iterations") cfg.iterations = value.get<int>();
    else if (key == "lr_step") cfg.lr_step = value.get<int>();
    else if (key == "lr_total") cfg.lr_total = value.get<int>();
    else if (key == "lambda") cfg.lambda = value.get<double>();
    else if (key == "r") cfg.margin = value.get<int>();
    else if (key == "geodesic_mode") cfg.geodesic_mode = parse_geodesic_metric(value.get<std::string>());
    else if (key == "gamma_focal") cfg.gamma_focal = value.get<double>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "supervision_mode")
      cfg.supervision_mode = parse_supervision_mode(value.get<std::string>());
    else if (key == "sigma_alpha") cfg.reg.sigma_alpha = value.get<double>();
    else if (key == "sigma_beta") cfg.reg.sigma_beta = value.get<double>();
    else if (key == "window_radius") cfg.reg.window_radius = value.get<int>();
    else if (key == "include_self") cfg.reg.include_self = value.get<bool>();
    else if (key == "sigma_alpha_units")
      cfg.reg.sigma_alpha_units = parse_sigma_alpha_units(value.get<std::string>());
    else
      throw std::runtime_error("unknown config field '" + key + "'");
  }
  cfg.reg.lambda = cfg.lambda;  // one knob, mirrored for standalone regulariser use
  cfg.validate();
  return cfg;
}

json config_to_json_object(const TrainConfig& cfg) {
  json j;
  j["lr0"] = cfg.lr0;
  j["momentum"] = cfg.momentum;
  j["iterations"] = cfg.iterations;
  j["lr_step"] = cfg.lr_step;
  j["lr_total"] = cfg.lr_total;
  j["lambda"] = cfg.lambda;
  j["r"] = cfg.margin;
  j["geodesic_mode"] = geodesic_metric_name(cfg.geodesic_mode);
  j["gamma_focal"] = cfg.gamma_focal;
  j["seed"] = cfg.seed;
  j["supervision_mode"] = supervision_mode_name(cfg.supervision_mode);
  j["sigma_alpha"] = cfg.reg.sigma_alpha;
  j["sigma_beta"] = cfg.reg.sigma_beta;
  j["window_radius"] = cfg.reg.window_radius;
  j["include_self"] = cfg.reg.include_self;
  j["sigma_alpha_units"] = sigma_alpha_units_name(cfg.reg.sigma_alpha_units);
  return j;
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text, TrainConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: parse error at byte " + std::to_string(e.byte) + ": " +
                             e.what());
  }
  return apply_config_fields(j, std::move(base));
}

std::string train_config_to_json(const TrainConfig& cfg) {
  return config_to_json_object(cfg).dump(2) + "\n";
}

void save_checkpoint(const std::filesystem::path& path, const VoxelLogisticModel& model,
                     const TrainConfig& cfg) {
  json j;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  j["config"] = config_to_json_object(cfg);
  write_text(path, j.dump(2) + "\n");
}

std::pair<VoxelLogisticModel, TrainConfig> load_checkpoint(const std::filesystem::path& path) {
  const json j = parse_json(path);
  if (!j.contains("weights") || !j.contains("bias") || !j.contains("config"))
    throw std::runtime_error(path.string() + ": checkpoint needs weights, bias and config");
  const json& w = j.at("weights");
  if (!w.is_array() || w.size() != FeatureStack::kCount)
    throw std::runtime_error(path.string() + ": checkpoint weight count mismatch, expected " +
                             std::to_string(FeatureStack::kCount));
  VoxelLogisticModel model;
  for (int f = 0; f < FeatureStack::kCount; ++f) model.weights[f] = w[f].get<double>();
  model.bias = j.at("bias").get<double>();
  const TrainConfig cfg = apply_config_fields(j.at("config"), TrainConfig{});
  return {model, cfg};
}

}  // namespace exseg
