#include "oodgate/benchmark.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "oodgate/error.hpp"
#include "oodgate/model_io.hpp"
#include "oodgate/rng.hpp"

namespace oodgate {
namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

StageStats summarize(const std::vector<double>& samples) {
  StageStats stats;
  if (samples.empty()) return stats;
  double sum = 0.0;
  for (const double v : samples) sum += v;
  stats.mean_ms = sum / static_cast<double>(samples.size());
  std::vector<double> copy = samples;
  stats.median_ms = nearest_rank_percentile(copy, 0.50);
  stats.p95_ms = nearest_rank_percentile(copy, 0.95);
  return stats;
}

const char* stage_name(int s) {
  switch (s) {
    case 0: return "load";
    case 1: return "feature";
    case 2: return "classify";
    default: return "overall";
  }
}

}  // namespace

std::string host_descriptor() {
  utsname u{};
  std::string host = "unknown";
  if (uname(&u) == 0)
    host = std::string(u.sysname) + " " + u.machine + " (" + u.release + ")";
  const unsigned hw = std::thread::hardware_concurrency();
  return host + ", " + std::to_string(hw == 0 ? 1 : hw) + " hardware threads";
}

LatencyReport run_latency_benchmark(const DatasetManifest& manifest,
                                    const std::string& model_path, int factor,
                                    int n, std::uint64_t seed,
                                    const FeatureConfig& cfg) {
  require(!manifest.entries.empty(), errc::empty_manifest,
          "benchmark needs a non-empty manifest");
  require(n > 0, errc::empty_manifest, "benchmark needs n > 0");
  // fail fast on a bad model before the timing loop starts
  { const ExtraTreesModel probe = load_model_checked(model_path); (void)probe; }

  LatencyReport report;
  report.factor = factor;
  report.n_images = n;
  report.seed = seed;
  report.host = host_descriptor();
  report.single_thread = true;  // the loop below never spawns workers

  // image sampling: distinct when possible, with replacement otherwise
  Rng rng(seed);
  std::vector<std::size_t> picks;
  const std::size_t total = manifest.entries.size();
  if (static_cast<std::size_t>(n) <= total) {
    std::vector<std::size_t> pool(total);
    for (std::size_t i = 0; i < total; ++i) pool[i] = i;
    for (int i = 0; i < n; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) +
          rng.uniform_u32(static_cast<std::uint32_t>(total - static_cast<std::size_t>(i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      picks.push_back(pool[static_cast<std::size_t>(i)]);
    }
  } else {
    report.sampled_with_replacement = true;
    for (int i = 0; i < n; ++i)
      picks.push_back(rng.uniform_u32(static_cast<std::uint32_t>(total)));
  }

  report.load_ms.reserve(picks.size());
  report.feature_ms.reserve(picks.size());
  report.classify_ms.reserve(picks.size());
  report.overall_ms.reserve(picks.size());

  double sink = 0.0;  // keeps the probability computation observable
  for (const std::size_t pick : picks) {
    const std::string& image_path = manifest.entries[pick].path;

    const auto t0 = Clock::now();
    const ExtraTreesModel model = load_model(model_path);
    const RasterImage image = load_image(image_path);
    const auto t1 = Clock::now();
    const FeatureVector features = extract_feature_vector(image, factor, cfg);
    const auto t2 = Clock::now();
    const double p = model.predict_probability(features.span());
    const auto t3 = Clock::now();

    sink += p;
    report.load_ms.push_back(ms_between(t0, t1));
    report.feature_ms.push_back(ms_between(t1, t2));
    report.classify_ms.push_back(ms_between(t2, t3));
    report.overall_ms.push_back(ms_between(t0, t3));
  }
  if (!std::isfinite(sink)) fail(errc::io_failure, "benchmark produced non-finite output");

  report.load = summarize(report.load_ms);
  report.feature = summarize(report.feature_ms);
  report.classify = summarize(report.classify_ms);
  report.overall = summarize(report.overall_ms);
  return report;
}

std::string latency_table(std::span<const LatencyReport> reports) {
  std::vector<const LatencyReport*> ordered;
  for (const LatencyReport& r : reports) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const LatencyReport* a, const LatencyReport* b) {
                     return a->factor < b->factor;
                   });

  std::ostringstream out;
  out << "factor |    L |    F |    C | Overall\n";
  char buf[96];
  for (const LatencyReport* r : ordered) {
    const char* label = r->factor == 1   ? "1"
                        : r->factor == 2 ? "1/2"
                        : r->factor == 4 ? "1/4"
                                         : "1/8";
    std::snprintf(buf, sizeof(buf), "%6s | %4.0f | %4.0f | %4.0f | %7.0f\n",
                  label, r->load.mean_ms, r->feature.mean_ms,
                  r->classify.mean_ms, r->overall.mean_ms);
    out << buf;
  }
  if (!ordered.empty()) {
    const LatencyReport* first = ordered.front();
    out << "n=" << first->n_images
        << ", single_thread=" << (first->single_thread ? "yes" : "no")
        << ", with_replacement=" << (first->sampled_with_replacement ? "yes" : "no")
        << ", seed=" << first->seed << '\n';
    out << "host: " << first->host << '\n';
    out << "reference baseline (2x Xeon Gold 5218R): Overall 396 / 119 / 50 / 31 ms "
           "at factors 1, 1/2, 1/4, 1/8\n";
  }
  return out.str();
}

void write_latency_csv(std::ostream& out, std::span<const LatencyReport> reports) {
  std::vector<const LatencyReport*> ordered;
  for (const LatencyReport& r : reports) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const LatencyReport* a, const LatencyReport* b) {
                     return a->factor < b->factor;
                   });
  out << "factor,stage,mean_ms,median_ms,p95_ms,n\n";
  char buf[160];
  for (const LatencyReport* r : ordered) {
    const StageStats* stats[4] = {&r->load, &r->feature, &r->classify, &r->overall};
    for (int s = 0; s < 4; ++s) {
      std::snprintf(buf, sizeof(buf), "%d,%s,%.3f,%.3f,%.3f,%d\n", r->factor,
                    stage_name(s), stats[s]->mean_ms, stats[s]->median_ms,
                    stats[s]->p95_ms, r->n_images);
      out << buf;
    }
  }
}

std::vector<LatencyReport> read_latency_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "factor,stage,mean_ms,median_ms,p95_ms,n")
    fail(errc::corrupt_stream, "bad latency CSV header");

  std::map<int, LatencyReport> by_factor;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string factor_s, stage, mean_s, median_s, p95_s, n_s;
    if (!std::getline(row, factor_s, ',') || !std::getline(row, stage, ',') ||
        !std::getline(row, mean_s, ',') || !std::getline(row, median_s, ',') ||
        !std::getline(row, p95_s, ',') || !std::getline(row, n_s))
      fail(errc::corrupt_stream, "bad latency CSV row: " + line);
    LatencyReport& r = by_factor[std::stoi(factor_s)];
    r.factor = std::stoi(factor_s);
    r.n_images = std::stoi(n_s);
    StageStats stats{std::stod(mean_s), std::stod(median_s), std::stod(p95_s)};
    if (stage == "load") r.load = stats;
    else if (stage == "feature") r.feature = stats;
    else if (stage == "classify") r.classify = stats;
    else if (stage == "overall") r.overall = stats;
    else fail(errc::corrupt_stream, "unknown latency stage: " + stage);
  }
  std::vector<LatencyReport> out;
  for (auto& [factor, report] : by_factor) out.push_back(std::move(report));
  return out;
}

}  // namespace oodgate
