// Acceptance suite: runs the full synthetic-corpus protocol end to end and
// prints one pass/fail line per criterion. Exits nonzero if any gated
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oodgate/benchmark.hpp"
#include "oodgate/evaluation.hpp"
#include "oodgate/manifest.hpp"
#include "oodgate/model_io.hpp"
#include "oodgate/parallel.hpp"
#include "oodgate/shap.hpp"
#include "oodgate/synthetic.hpp"

namespace fs = std::filesystem;
using namespace oodgate;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kCorpusSeed = 20250601;
constexpr std::uint64_t kCvSeed = 1337;

struct Checker {
  int failed = 0;

  void check(const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }

  void info(const std::string& name, const std::string& detail) {
    std::printf("[INFO] %s: %s\n", name.c_str(), detail.c_str());
    std::fflush(stdout);
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string work =
      argc > 1 ? argv[1] : (fs::temp_directory_path() / "oodgate_acceptance").string();
  fs::remove_all(work);
  fs::create_directories(work);
  const int threads = worker_thread_cap();
  Checker checker;

  std::printf("acceptance workspace: %s (%d worker threads)\n", work.c_str(), threads);

  // ---- corpus + cross-validation at every factor (criterion 1) -----------
  const auto t_c1 = Clock::now();
  CorpusSpec spec;
  spec.n_internal_per_class = 500;
  spec.n_external_per_class = 200;
  spec.seed = kCorpusSeed;
  spec.size = 512;
  const DatasetManifest manifest = generate_synthetic_corpus(work + "/corpus", spec);
  std::printf("corpus ready: %zu images (%.1f s)\n", manifest.entries.size(),
              seconds_since(t_c1));
  std::fflush(stdout);

  bool c1_ok = true;
  std::string c1_detail;
  std::vector<ForestAudit> audits;
  std::string bench_model_f1, bench_model_f8;
  for (const int factor : {1, 2, 4, 8}) {
    InternalValidation v =
        run_internal_validation(manifest, factor, kCvSeed, {}, {}, threads);
    evaluate_external_consensus(v, manifest, factor, {}, threads);
    const EvalReport& r = v.report;
    const bool ok = r.internal_auroc >= 0.99 && r.internal_accuracy >= 0.99 &&
                    r.has_external && r.external_accuracy >= 0.98;
    c1_ok = c1_ok && ok;
    c1_detail += fmt("f%d auroc=%.4f acc=%.4f ext_acc=%.4f  ", factor,
                     r.internal_auroc, r.internal_accuracy, r.external_accuracy);

    for (const ExtraTreesModel& m : v.fold_models)
      audits.push_back(audit_forest(m));
    if (factor == 1) {
      bench_model_f1 = work + "/bench_model_f1.bin";
      save_model(v.fold_models[0], bench_model_f1);
    }
    if (factor == 8) {
      bench_model_f8 = work + "/bench_model_f8.bin";
      save_model(v.fold_models[0], bench_model_f8);
    }
  }
  const double c1_elapsed = seconds_since(t_c1);
  c1_ok = c1_ok && c1_elapsed < 300.0;
  checker.check("criterion 1 (desk-scale separability)", c1_ok,
                c1_detail + fmt("elapsed=%.0fs (budget 300s)", c1_elapsed));

  // ---- latency scaling, stage decomposition, cheap classify (2, 3, 4) ----
  const LatencyReport bench1 =
      run_latency_benchmark(manifest, bench_model_f1, 1, 200, 99);
  const LatencyReport bench8 =
      run_latency_benchmark(manifest, bench_model_f8, 8, 200, 99);

  const bool c2_ok = bench8.feature.mean_ms <= 0.25 * bench1.feature.mean_ms &&
                     bench8.overall.mean_ms < bench1.overall.mean_ms;
  checker.check(
      "criterion 2 (latency scaling)", c2_ok,
      fmt("F(x1)=%.2fms F(x1/8)=%.2fms ratio=%.3f (need <=0.25); overall %.2f -> %.2f ms",
          bench1.feature.mean_ms, bench8.feature.mean_ms,
          bench8.feature.mean_ms / bench1.feature.mean_ms,
          bench1.overall.mean_ms, bench8.overall.mean_ms));

  bool c3_ok = true;
  double worst_gap = 0.0;
  for (const LatencyReport* r : {&bench1, &bench8}) {
    for (std::size_t i = 0; i < r->overall_ms.size(); ++i) {
      const double sum = r->load_ms[i] + r->feature_ms[i] + r->classify_ms[i];
      const double gap = std::fabs(sum - r->overall_ms[i]) / r->overall_ms[i];
      worst_gap = std::max(worst_gap, gap);
      c3_ok = c3_ok && gap <= 0.05;
    }
  }
  checker.check("criterion 3 (stage decomposition)", c3_ok,
                fmt("per-image |L+F+C-Overall|/Overall worst=%.4f over %zu images (need <=0.05)",
                    worst_gap, bench1.overall_ms.size() + bench8.overall_ms.size()));

  const bool c4_ok = bench1.classify.mean_ms <= 0.10 * bench1.feature.mean_ms;
  checker.check("criterion 4 (classification is cheap)", c4_ok,
                fmt("C=%.3fms vs F=%.2fms at x1, ratio=%.4f (need <=0.10)",
                    bench1.classify.mean_ms, bench1.feature.mean_ms,
                    bench1.classify.mean_ms / bench1.feature.mean_ms));

  // ---- TreeSHAP exactness (criterion 5) -----------------------------------
  bool c5_ok = true;
  double worst_shap = 0.0;
  {
    Rng rng(777);
    std::vector<int> players(6);
    std::iota(players.begin(), players.end(), 0);
    for (int rep = 0; rep < 200; ++rep) {
      const Tree tree = helpers::random_tree(6, 3, rng);
      std::vector<double> x(6);
      for (double& v : x) v = rng.uniform_real();
      const auto fast = tree_shap_single(tree, x, 6);
      const auto slow = brute_force_shapley(tree, x, players);
      for (int f = 0; f < 6; ++f) {
        const double gap = std::fabs(fast[static_cast<std::size_t>(f)] - slow[static_cast<std::size_t>(f)]);
        worst_shap = std::max(worst_shap, gap);
        c5_ok = c5_ok && gap <= 1e-9;
      }
    }
  }
  // local accuracy on explained synthetic images
  const ExtraTreesModel explain_model = load_model(bench_model_f1);
  std::vector<std::string> sample_paths;
  std::vector<int> sample_labels;
  {
    int taken[2] = {0, 0};
    for (const ManifestEntry& e : manifest.entries) {
      if (e.split != Split::internal || taken[e.label] >= 50) continue;
      ++taken[e.label];
      sample_paths.push_back(e.path);
      sample_labels.push_back(e.label);
    }
  }
  const std::vector<FeatureVector> sample_features =
      extract_features(sample_paths, 1, {}, threads);
  double worst_local = 0.0;
  for (const FeatureVector& v : sample_features) {
    const AttributionResult r = tree_shap(explain_model, v.span());
    const double total =
        std::accumulate(r.contributions.begin(), r.contributions.end(), 0.0);
    worst_local = std::max(worst_local, std::fabs(r.base_value + total - r.prediction));
  }
  c5_ok = c5_ok && worst_local <= 1e-9;
  checker.check("criterion 5 (TreeSHAP exactness)", c5_ok,
                fmt("200 random trees, worst |shap-oracle|=%.2e; local accuracy worst=%.2e over %zu images (need <=1e-9)",
                    worst_shap, worst_local, sample_features.size()));

  // ---- AUROC oracle (criterion 6) -----------------------------------------
  bool c6_ok = true;
  double worst_auc = 0.0;
  {
    Rng rng(888);
    int done = 0;
    while (done < 100) {
      const int n = 20 + static_cast<int>(rng.uniform_u32(281));
      std::vector<double> scores;
      std::vector<int> labels;
      int pos = 0;
      for (int i = 0; i < n; ++i) {
        scores.push_back(static_cast<double>(rng.uniform_u32(12)) / 11.0);  // ties
        labels.push_back(static_cast<int>(rng.uniform_u32(2)));
        pos += labels.back();
      }
      if (pos == 0 || pos == n) continue;
      ++done;
      const double gap =
          std::fabs(auroc(scores, labels) - helpers::pairwise_auroc(scores, labels));
      worst_auc = std::max(worst_auc, gap);
      c6_ok = c6_ok && gap <= 1e-12;
    }
  }
  checker.check("criterion 6 (AUROC oracle)", c6_ok,
                fmt("100 random sets incl. ties, worst |rank-pairwise|=%.2e (need <=1e-12)",
                    worst_auc));

  // ---- forest constraints (criterion 7) -----------------------------------
  bool c7_ok = true;
  int worst_depth = 0;
  std::int64_t min_leaf = 1 << 30, min_split = 1 << 30;
  for (const ForestAudit& audit : audits) {
    worst_depth = std::max(worst_depth, audit.max_depth);
    min_leaf = std::min(min_leaf, audit.min_leaf_samples);
    min_split = std::min(min_split, audit.min_split_samples);
    c7_ok = c7_ok && audit.children_partition && audit.leaf_values_consistent &&
            audit.feature_indices_valid;
  }
  c7_ok = c7_ok && worst_depth <= 10 && min_leaf >= 2 && min_split >= 10;
  // seeded reproducibility on a real feature table
  {
    Dataset data;
    data.n_features = kFeatureCount;
    for (std::size_t i = 0; i < sample_features.size(); ++i)
      data.push_row(sample_features[i].span(), sample_labels[i]);
    const ExtraTreesModel a = train_extra_trees(data, 4242);
    const ExtraTreesModel b = train_extra_trees(data, 4242);
    c7_ok = c7_ok && forests_identical(a, b) &&
            serialize_model(a) == serialize_model(b);
  }
  checker.check("criterion 7 (forest constraints)", c7_ok,
                fmt("%zu fold models audited: max_depth=%d (<=10), min_leaf=%lld (>=2), min_split=%lld (>=10); same-seed forests identical",
                    audits.size(), worst_depth, static_cast<long long>(min_leaf),
                    static_cast<long long>(min_split)));

  // ---- feature oracles (criterion 8) ---------------------------------------
  bool c8_ok = true;
  std::string c8_detail;
  {
    Rng rng(999);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const GrayImage img = helpers::random_gray(16, 16, rng);
      const Glcm fast = compute_glcm(img);
      const Glcm slow = helpers::naive_glcm(img);
      for (int i = 0; i < 32 * 32; ++i)
        worst = std::max(worst, std::fabs(fast.p[static_cast<std::size_t>(i)] - slow.p[static_cast<std::size_t>(i)]));
      const GlcmFeatures ff = glcm_features(fast);
      const GlcmFeatures fs = helpers::naive_glcm_features(slow);
      worst = std::max({worst, std::fabs(ff.contrast - fs.contrast),
                        std::fabs(ff.homogeneity - fs.homogeneity),
                        std::fabs(ff.energy - fs.energy),
                        std::fabs(ff.correlation - fs.correlation)});
    }
    c8_ok = c8_ok && worst <= 1e-12;
    c8_detail += fmt("glcm worst=%.1e; ", worst);

    bool lbp_ok = true;
    for (int rep = 0; rep < 5; ++rep) {
      const GrayImage img = helpers::random_gray(32, 32, rng);
      const LbpHistogram h = compute_lbp(img);
      const auto oracle = helpers::naive_lbp_histogram(img);
      for (int b = 0; b < LbpHistogram::kBins; ++b)
        lbp_ok = lbp_ok && h.bins[static_cast<std::size_t>(b)] == oracle[static_cast<std::size_t>(b)];
    }
    c8_ok = c8_ok && lbp_ok;
    c8_detail += fmt("lbp hist %s; ", lbp_ok ? "exact" : "MISMATCH");

    const double ecc =
        shape_features(helpers::ellipse_mask(120.0, 60.0, 300)).eccentricity;
    c8_ok = c8_ok && std::fabs(ecc - 0.866) <= 0.02;
    c8_detail += fmt("ellipse ecc=%.4f; ", ecc);

    const double circ = shape_features(helpers::disc_mask(80.0, 256)).circularity;
    c8_ok = c8_ok && circ >= 0.9 && circ <= 1.1;
    c8_detail += fmt("disc circ=%.4f; ", circ);

    std::vector<Point2> pts;
    for (int i = 0; i < 24; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 24.0;
      pts.push_back({-3.0 + 7.5 * std::cos(a), 11.0 + 7.5 * std::sin(a)});
    }
    const CircleFit fit = fit_circle(pts);
    const double fit_err = std::max({std::fabs(fit.center_x + 3.0),
                                     std::fabs(fit.center_y - 11.0),
                                     std::fabs(fit.radius - 7.5)});
    c8_ok = c8_ok && fit_err <= 1e-9;
    c8_detail += fmt("circle fit err=%.1e", fit_err);
  }
  checker.check("criterion 8 (feature oracles)", c8_ok, c8_detail);

  // ---- stratification (criterion 9) ----------------------------------------
  bool c9_ok = true;
  {
    Rng rng(246);
    for (int rep = 0; rep < 50; ++rep) {
      const int n = 25 + static_cast<int>(rng.uniform_u32(276));
      std::vector<int> labels;
      int pos = 0;
      for (int i = 0; i < n; ++i) {
        labels.push_back(static_cast<int>(rng.uniform_u32(2)));
        pos += labels.back();
      }
      // guarantee at least k members per class
      for (int i = 0; pos < 5 && i < n; ++i)
        if (labels[static_cast<std::size_t>(i)] == 0) {
          labels[static_cast<std::size_t>(i)] = 1;
          ++pos;
        }
      for (int i = 0; n - pos < 5 && i < n; ++i)
        if (labels[static_cast<std::size_t>(i)] == 1) {
          labels[static_cast<std::size_t>(i)] = 0;
          --pos;
        }
      const auto folds = stratified_kfold(labels, 5, rng.next_u64());
      for (int c = 0; c < 2; ++c) {
        std::int64_t lo = 1 << 30, hi = -1;
        for (const auto& fold : folds) {
          std::int64_t count = 0;
          for (const std::size_t i : fold) count += labels[i] == c;
          lo = std::min(lo, count);
          hi = std::max(hi, count);
        }
        c9_ok = c9_ok && hi - lo <= 1;
      }
    }
  }
  checker.check("criterion 9 (stratification)", c9_ok,
                "50 random label vectors: per-class fold counts differ by <= 1");

  // ---- end-to-end determinism (criterion 10) --------------------------------
  bool c10_ok = true;
  {
    std::vector<std::string> paths;
    std::vector<int> labels;
    int taken[2] = {0, 0};
    for (const ManifestEntry& e : manifest.entries) {
      if (e.split != Split::internal || taken[e.label] >= 30) continue;
      ++taken[e.label];
      paths.push_back(e.path);
      labels.push_back(e.label);
    }
    const auto feats_a = extract_features(paths, 4, {}, threads);
    const auto feats_b = extract_features(paths, 4, {}, threads);
    for (std::size_t i = 0; i < feats_a.size(); ++i)
      c10_ok = c10_ok && std::memcmp(feats_a[i].values.data(), feats_b[i].values.data(),
                                     sizeof(feats_a[i].values)) == 0;

    Dataset data;
    data.n_features = kFeatureCount;
    for (std::size_t i = 0; i < feats_a.size(); ++i)
      data.push_row(feats_a[i].span(), labels[i]);
    ExtraTreesModel ma = train_extra_trees(data, 31415);
    ExtraTreesModel mb = train_extra_trees(data, 31415);
    ma.training_factor = mb.training_factor = 4;
    c10_ok = c10_ok && serialize_model(ma) == serialize_model(mb);
    for (const FeatureVector& v : feats_a)
      c10_ok = c10_ok &&
               ma.predict_probability(v.span()) == mb.predict_probability(v.span());
  }
  checker.check("criterion 10 (end-to-end determinism)", c10_ok,
                "extract/train/predict twice with fixed seeds: bit-identical features, model bytes, predictions");

  // ---- qualitative attribution echo (criterion 11, soft) --------------------
  {
    const auto ranking = rank_global_importance(explain_model, sample_features);
    const std::set<std::string> expected = {"eccentricity", "all_corners_dark_flag",
                                            "glcm_homogeneity", "circularity",
                                            "background_dark_flag"};
    int hits = 0;
    std::string top5;
    for (int i = 0; i < 5 && i < static_cast<int>(ranking.size()); ++i) {
      top5 += (i ? ", " : "") + ranking[static_cast<std::size_t>(i)].first;
      hits += expected.count(ranking[static_cast<std::size_t>(i)].first) > 0;
    }
    checker.info("criterion 11 (attribution echo, soft; reported not gated)",
                 fmt("top-5 features: [%s]; %d of top-5 in the expected cue set (soft target >= 2)",
                     top5.c_str(), hits));
  }

  std::printf("%s: %d criterion(s) failed\n",
              checker.failed == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              checker.failed);
  return checker.failed == 0 ? 0 : 1;
}
