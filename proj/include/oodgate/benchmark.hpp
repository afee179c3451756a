#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oodgate/evaluation.hpp"

namespace oodgate {

struct StageStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

// Per-stage cold-start latency over a sampled corpus at one factor.
// Stages: L = model + image loading, F = downsample + feature extraction,
// C = forest traversal; Overall spans L through the probability output.
struct LatencyReport {
  int factor = 1;
  int n_images = 0;
  StageStats load;
  StageStats feature;
  StageStats classify;
  StageStats overall;
  bool single_thread = true;
  bool sampled_with_replacement = false;
  std::string host;
  std::uint64_t seed = 0;

  // raw per-image timings, kept for stage-sum and scaling checks
  std::vector<double> load_ms;
  std::vector<double> feature_ms;
  std::vector<double> classify_ms;
  std::vector<double> overall_ms;
};

// Strictly single-threaded measurement loop on a monotonic clock. The model
// is re-deserialized inside stage L for every image (cold start, no warm
// caching). Samples without replacement when the manifest is large enough,
// with replacement (flagged) otherwise.
// Errors: MissingModel, EmptyManifest.
LatencyReport run_latency_benchmark(const DatasetManifest& manifest,
                                    const std::string& model_path, int factor,
                                    int n, std::uint64_t seed,
                                    const FeatureConfig& cfg = {});

// Table-style text report (integer milliseconds) and CSV
// (factor,stage,mean_ms,median_ms,p95_ms,n). Rows ordered by factor.
std::string latency_table(std::span<const LatencyReport> reports);
void write_latency_csv(std::ostream& out, std::span<const LatencyReport> reports);
std::vector<LatencyReport> read_latency_csv(std::istream& in);

std::string host_descriptor();

}  // namespace oodgate
