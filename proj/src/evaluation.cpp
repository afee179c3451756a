#include "oodgate/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "oodgate/error.hpp"
#include "oodgate/parallel.hpp"
#include "oodgate/rng.hpp"

namespace oodgate {

std::vector<std::size_t> DatasetManifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].split == split) out.push_back(i);
  return out;
}

std::int64_t DatasetManifest::count(Split split, int label) const {
  std::int64_t n = 0;
  for (const ManifestEntry& e : entries)
    if (e.split == split && e.label == label) ++n;
  return n;
}

std::vector<std::vector<std::size_t>> stratified_kfold(
    std::span<const int> labels, int k, std::uint64_t seed) {
  require(k >= 2, errc::class_too_small, "k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    require(y == 0 || y == 1, errc::bad_label, "labels must be 0 or 1");
    by_class[y].push_back(i);
  }

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  const Rng root(seed);
  for (int c = 0; c < 2; ++c) {
    require(static_cast<int>(by_class[c].size()) >= k, errc::class_too_small,
            "every class needs at least k members");
    Rng rng = root.stream(static_cast<std::uint64_t>(c));
    rng.shuffle(by_class[c]);
    for (std::size_t j = 0; j < by_class[c].size(); ++j)
      folds[j % static_cast<std::size_t>(k)].push_back(by_class[c][j]);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  std::int64_t n_pos = 0;
  for (const int y : labels) n_pos += y;
  const std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
  require(n_pos > 0 && n_neg > 0, errc::single_class,
          "AUROC needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // midranks over tie groups, then the rank-sum statistic
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = static_cast<double>(i + 1 + j) / 2.0;  // 1-based
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) rank_sum_pos += midrank;
    i = j;
  }
  const double u = rank_sum_pos - static_cast<double>(n_pos) *
                                      (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double accuracy_at_threshold(std::span<const double> scores,
                             std::span<const int> labels, double tau) {
  require(!scores.empty(), errc::empty_input, "no scores to evaluate");
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] >= tau ? 1 : 0;  // boundary counts as positive
    correct += pred == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double consensus_predict(std::span<const ExtraTreesModel> models,
                         std::span<const double> x) {
  require(!models.empty(), errc::no_models, "consensus needs at least one model");
  double sum = 0.0;
  for (const ExtraTreesModel& m : models) sum += m.predict_probability(x);
  return sum / static_cast<double>(models.size());
}

std::vector<FeatureVector> extract_features(
    const std::vector<std::string>& paths, int factor, const FeatureConfig& cfg,
    int max_threads) {
  std::vector<FeatureVector> out(paths.size());
  parallel_for(paths.size(), max_threads, [&](std::size_t i) {
    out[i] = extract_feature_vector(load_image(paths[i]), factor, cfg);
  });
  return out;
}

InternalValidation run_internal_validation(const DatasetManifest& manifest,
                                           int factor, std::uint64_t seed,
                                           const FeatureConfig& cfg,
                                           ForestHyperparams params,
                                           int max_threads, int k) {
  const std::vector<std::size_t> internal = manifest.indices(Split::internal);
  require(!internal.empty(), errc::empty_manifest, "no internal entries");

  std::vector<std::string> paths;
  std::vector<int> labels;
  for (const std::size_t i : internal) {
    paths.push_back(manifest.entries[i].path);
    labels.push_back(manifest.entries[i].label);
  }

  // features are computed once and reused by every fold
  const std::vector<FeatureVector> features =
      extract_features(paths, factor, cfg, max_threads);

  const auto folds = stratified_kfold(labels, k, seed);

  InternalValidation result;
  result.report.factor = factor;
  result.report.seed = seed;
  result.pooled_scores.assign(labels.size(), 0.0);
  result.pooled_labels = labels;

  for (int f = 0; f < k; ++f) {
    Dataset train_set;
    train_set.n_features = kFeatureCount;
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      for (const std::size_t i : folds[static_cast<std::size_t>(g)])
        train_set.push_row(features[i].span(), labels[i]);
    }
    ExtraTreesModel model =
        train_extra_trees(train_set, mix64(seed, static_cast<std::uint64_t>(f)), params);
    model.training_factor = factor;

    FoldMetrics fm;
    fm.fold = f;
    std::vector<double> fold_scores;
    std::vector<int> fold_labels;
    for (const std::size_t i : folds[static_cast<std::size_t>(f)]) {
      const double p = model.predict_probability(features[i].span());
      result.pooled_scores[i] = p;
      fold_scores.push_back(p);
      fold_labels.push_back(labels[i]);
      (labels[i] == 1 ? fm.n_pos : fm.n_neg) += 1;
    }
    fm.auroc = auroc(fold_scores, fold_labels);
    fm.accuracy = accuracy_at_threshold(fold_scores, fold_labels,
                                        result.report.threshold);
    result.report.folds.push_back(fm);
    result.fold_models.push_back(std::move(model));
  }

  result.report.internal_auroc = auroc(result.pooled_scores, result.pooled_labels);
  result.report.internal_accuracy = accuracy_at_threshold(
      result.pooled_scores, result.pooled_labels, result.report.threshold);
  for (const int y : labels)
    (y == 1 ? result.report.internal_n_pos : result.report.internal_n_neg) += 1;
  return result;
}

void evaluate_external_consensus(InternalValidation& validation,
                                 const DatasetManifest& manifest, int factor,
                                 const FeatureConfig& cfg, int max_threads) {
  const std::vector<std::size_t> external = manifest.indices(Split::external);
  if (external.empty()) return;

  std::vector<std::string> paths;
  std::vector<int> labels;
  for (const std::size_t i : external) {
    paths.push_back(manifest.entries[i].path);
    labels.push_back(manifest.entries[i].label);
  }
  const std::vector<FeatureVector> features =
      extract_features(paths, factor, cfg, max_threads);

  std::vector<double> scores(features.size());
  for (std::size_t i = 0; i < features.size(); ++i)
    scores[i] = consensus_predict(validation.fold_models, features[i].span());

  EvalReport& report = validation.report;
  report.has_external = true;
  report.external_auroc = auroc(scores, labels);
  report.external_accuracy =
      accuracy_at_threshold(scores, labels, report.threshold);
  for (const int y : labels)
    (y == 1 ? report.external_n_pos : report.external_n_neg) += 1;
}

std::string eval_report_text(const EvalReport& report) {
  std::ostringstream out;
  char buf[64];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out << key << ": " << buf << '\n';
  };
  out << "factor: " << report.factor << '\n';
  out << "seed: " << report.seed << '\n';
  line("threshold", report.threshold);
  out << "internal_n_pos: " << report.internal_n_pos << '\n';
  out << "internal_n_neg: " << report.internal_n_neg << '\n';
  line("internal_auroc", report.internal_auroc);
  line("internal_accuracy", report.internal_accuracy);
  for (const FoldMetrics& fm : report.folds) {
    std::snprintf(buf, sizeof(buf), "fold_%d: auroc=%.6f accuracy=%.6f n_pos=%lld n_neg=%lld",
                  fm.fold, fm.auroc, fm.accuracy,
                  static_cast<long long>(fm.n_pos), static_cast<long long>(fm.n_neg));
    out << buf << '\n';
  }
  if (report.has_external) {
    out << "external_n_pos: " << report.external_n_pos << '\n';
    out << "external_n_neg: " << report.external_n_neg << '\n';
    line("external_auroc", report.external_auroc);
    line("external_accuracy", report.external_accuracy);
  }
  return out.str();
}

void write_eval_report_csv(std::ostream& out, const EvalReport& report) {
  out << "section,fold,n_pos,n_neg,auroc,accuracy\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "internal,pooled,%lld,%lld,%.9f,%.9f\n",
                static_cast<long long>(report.internal_n_pos),
                static_cast<long long>(report.internal_n_neg),
                report.internal_auroc, report.internal_accuracy);
  out << buf;
  for (const FoldMetrics& fm : report.folds) {
    std::snprintf(buf, sizeof(buf), "internal,%d,%lld,%lld,%.9f,%.9f\n", fm.fold,
                  static_cast<long long>(fm.n_pos),
                  static_cast<long long>(fm.n_neg), fm.auroc, fm.accuracy);
    out << buf;
  }
  if (report.has_external) {
    std::snprintf(buf, sizeof(buf), "external,consensus,%lld,%lld,%.9f,%.9f\n",
                  static_cast<long long>(report.external_n_pos),
                  static_cast<long long>(report.external_n_neg),
                  report.external_auroc, report.external_accuracy);
    out << buf;
  }
}

}  // namespace oodgate
