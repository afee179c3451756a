#pragma once

#include <cstdint>
#include <string>

#include "oodgate/features.hpp"
#include "oodgate/forest.hpp"

namespace oodgate {

// Flat key=value pipeline configuration. Every documented constant of the
// extractor and the forest is overridable; values round-trip losslessly
// through save/load.
struct PipelineConfig {
  int factor = 1;
  std::uint64_t seed = 42;
  FeatureConfig features;
  ForestHyperparams forest{100, 10, 10, 2, 7, false};
  std::string manifest_path;
  std::string model_path;
  std::string output_dir;
  std::string schema_version = std::string(feature_schema_version());
};

// Errors: BadConfig for unknown keys, malformed values, or out-of-range
// settings; MissingFile when the file cannot be opened.
PipelineConfig load_config(const std::string& path);
void save_config(const PipelineConfig& cfg, const std::string& path);

// Range checks shared by the loader and the CLI. Errors: BadConfig.
void validate_config(const PipelineConfig& cfg);

}  // namespace oodgate
