#include "oodgate/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "oodgate/error.hpp"
#include "oodgate/image.hpp"

namespace oodgate {
namespace {

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (!end || *end != '\0' || value.empty())
    fail(errc::bad_config, "bad numeric value for " + key + ": '" + value + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (!end || *end != '\0' || value.empty())
    fail(errc::bad_config, "bad integer value for " + key + ": '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(errc::bad_config, "bad boolean value for " + key + ": '" + value + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate_config(const PipelineConfig& cfg) {
  require(is_valid_factor(cfg.factor), errc::bad_config,
          "factor must be one of 1, 2, 4, 8");
  auto in_255 = [](double v) { return v >= 0.0 && v <= 255.0; };
  require(in_255(cfg.features.border_dark_threshold) &&
              in_255(cfg.features.black_pixel_threshold) &&
              in_255(cfg.features.corner_dark_threshold) &&
              in_255(cfg.features.rgb_spread_threshold),
          errc::bad_config, "intensity thresholds must lie in [0, 255]");
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  require(unit(cfg.features.corner_patch_fraction) &&
              unit(cfg.features.mask_min_area_fraction) &&
              unit(cfg.features.rgb_min_fraction) &&
              unit(cfg.features.center_disk_fraction) &&
              unit(cfg.features.outer_ring_fraction),
          errc::bad_config, "fractions must lie in [0, 1]");
  require(cfg.features.radial_bins >= 2, errc::bad_config,
          "radial_bins must be at least 2");
  require(cfg.forest.n_estimators >= 1 && cfg.forest.max_depth >= 1 &&
              cfg.forest.min_samples_split >= 2 && cfg.forest.min_samples_leaf >= 1,
          errc::bad_config, "forest hyperparameters out of range");
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::missing_file, "cannot open config " + path);

  PipelineConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(errc::bad_config,
           "line " + std::to_string(line_no) + " is not key=value");
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\n");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r\n");
      return s.substr(a, b - a + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));

    if (key == "factor") cfg.factor = static_cast<int>(parse_int(key, value));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "border_dark_threshold") cfg.features.border_dark_threshold = parse_double(key, value);
    else if (key == "black_pixel_threshold") cfg.features.black_pixel_threshold = parse_double(key, value);
    else if (key == "corner_dark_threshold") cfg.features.corner_dark_threshold = parse_double(key, value);
    else if (key == "corner_patch_fraction") cfg.features.corner_patch_fraction = parse_double(key, value);
    else if (key == "mask_min_area_fraction") cfg.features.mask_min_area_fraction = parse_double(key, value);
    else if (key == "rgb_spread_threshold") cfg.features.rgb_spread_threshold = parse_double(key, value);
    else if (key == "rgb_min_fraction") cfg.features.rgb_min_fraction = parse_double(key, value);
    else if (key == "radial_bins") cfg.features.radial_bins = static_cast<int>(parse_int(key, value));
    else if (key == "center_disk_fraction") cfg.features.center_disk_fraction = parse_double(key, value);
    else if (key == "outer_ring_fraction") cfg.features.outer_ring_fraction = parse_double(key, value);
    else if (key == "n_estimators") cfg.forest.n_estimators = static_cast<int>(parse_int(key, value));
    else if (key == "max_depth") cfg.forest.max_depth = static_cast<int>(parse_int(key, value));
    else if (key == "min_samples_split") cfg.forest.min_samples_split = static_cast<int>(parse_int(key, value));
    else if (key == "min_samples_leaf") cfg.forest.min_samples_leaf = static_cast<int>(parse_int(key, value));
    else if (key == "k_features") cfg.forest.k_features = static_cast<int>(parse_int(key, value));
    else if (key == "class_weighted") cfg.forest.class_weighted = parse_bool(key, value);
    else if (key == "manifest_path") cfg.manifest_path = value;
    else if (key == "model_path") cfg.model_path = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "schema_version") cfg.schema_version = value;
    else fail(errc::bad_config, "unknown config key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

void save_config(const PipelineConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(errc::io_failure, "cannot write config " + path);
  out << "factor=" << cfg.factor << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "border_dark_threshold=" << fmt(cfg.features.border_dark_threshold) << '\n';
  out << "black_pixel_threshold=" << fmt(cfg.features.black_pixel_threshold) << '\n';
  out << "corner_dark_threshold=" << fmt(cfg.features.corner_dark_threshold) << '\n';
  out << "corner_patch_fraction=" << fmt(cfg.features.corner_patch_fraction) << '\n';
  out << "mask_min_area_fraction=" << fmt(cfg.features.mask_min_area_fraction) << '\n';
  out << "rgb_spread_threshold=" << fmt(cfg.features.rgb_spread_threshold) << '\n';
  out << "rgb_min_fraction=" << fmt(cfg.features.rgb_min_fraction) << '\n';
  out << "radial_bins=" << cfg.features.radial_bins << '\n';
  out << "center_disk_fraction=" << fmt(cfg.features.center_disk_fraction) << '\n';
  out << "outer_ring_fraction=" << fmt(cfg.features.outer_ring_fraction) << '\n';
  out << "n_estimators=" << cfg.forest.n_estimators << '\n';
  out << "max_depth=" << cfg.forest.max_depth << '\n';
  out << "min_samples_split=" << cfg.forest.min_samples_split << '\n';
  out << "min_samples_leaf=" << cfg.forest.min_samples_leaf << '\n';
  out << "k_features=" << cfg.forest.k_features << '\n';
  out << "class_weighted=" << (cfg.forest.class_weighted ? "true" : "false") << '\n';
  out << "manifest_path=" << cfg.manifest_path << '\n';
  out << "model_path=" << cfg.model_path << '\n';
  out << "output_dir=" << cfg.output_dir << '\n';
  out << "schema_version=" << cfg.schema_version << '\n';
  if (!out) fail(errc::io_failure, "write failed for config " + path);
}

}  // namespace oodgate
