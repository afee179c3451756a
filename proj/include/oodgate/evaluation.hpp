#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oodgate/features.hpp"
#include "oodgate/forest.hpp"

namespace oodgate {

enum class Split { internal, external };

struct ManifestEntry {
  std::string path;
  int label = 0;  // 0 = non-fundus, 1 = fundus
  Split split = Split::internal;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<std::size_t> indices(Split split) const;
  std::int64_t count(Split split, int label) const;
};

// Seeded stratified split into k disjoint folds covering every index.
// Per-class fold counts differ by at most one. Errors: ClassTooSmall.
std::vector<std::vector<std::size_t>> stratified_kfold(
    std::span<const int> labels, int k, std::uint64_t seed);

// Mann-Whitney AUROC via rank sums with midranks for ties.
// Errors: SingleClass.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Fraction of correct decisions with score >= tau predicting class 1.
// Errors: EmptyInput.
double accuracy_at_threshold(std::span<const double> scores,
                             std::span<const int> labels, double tau = 0.5);

// Mean of per-model probabilities. Errors: NoModels.
double consensus_predict(std::span<const ExtraTreesModel> models,
                         std::span<const double> x);

struct FoldMetrics {
  int fold = 0;
  double auroc = 0.0;
  double accuracy = 0.0;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
};

struct EvalReport {
  int factor = 1;
  std::uint64_t seed = 0;
  double threshold = 0.5;

  // internal 5-fold cross-validation, pooled over concatenated held-out folds
  double internal_auroc = 0.0;
  double internal_accuracy = 0.0;
  std::int64_t internal_n_pos = 0;
  std::int64_t internal_n_neg = 0;
  std::vector<FoldMetrics> folds;

  // external consensus of the fold models
  bool has_external = false;
  double external_auroc = 0.0;
  double external_accuracy = 0.0;
  std::int64_t external_n_pos = 0;
  std::int64_t external_n_neg = 0;
};

std::string eval_report_text(const EvalReport& report);
void write_eval_report_csv(std::ostream& out, const EvalReport& report);

// Feature extraction over image paths, cached one vector per image;
// parallel across images up to max_threads.
std::vector<FeatureVector> extract_features(
    const std::vector<std::string>& paths, int factor,
    const FeatureConfig& cfg = {}, int max_threads = 1);

struct InternalValidation {
  EvalReport report;
  std::vector<ExtraTreesModel> fold_models;
  std::vector<double> pooled_scores;  // one score per internal entry
  std::vector<int> pooled_labels;
};

// Extracts features once per internal image, trains on 4/5 per fold, scores
// each held-out fold, and pools the concatenated predictions.
InternalValidation run_internal_validation(const DatasetManifest& manifest,
                                           int factor, std::uint64_t seed,
                                           const FeatureConfig& cfg = {},
                                           ForestHyperparams params = {},
                                           int max_threads = 1, int k = 5);

// Applies the fold models as a consensus to the external split and fills the
// external section of the report.
void evaluate_external_consensus(InternalValidation& validation,
                                 const DatasetManifest& manifest, int factor,
                                 const FeatureConfig& cfg = {},
                                 int max_threads = 1);

}  // namespace oodgate
