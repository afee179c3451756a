#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oodgate/forest.hpp"

namespace oodgate {

// Per-prediction Shapley attribution. Local accuracy holds by construction:
// base_value + sum(contributions) = prediction (within float roundoff).
struct AttributionResult {
  double base_value = 0.0;
  std::vector<double> contributions;
  double prediction = 0.0;
};

// Cover-weighted expectation of the tree output (value of the empty
// coalition).
double tree_expected_value(const Tree& tree);

// Exact path-dependent Shapley values of a single tree, with feature absence
// marginalized by the tree's own cover proportions (per-node sample counts).
std::vector<double> tree_shap_single(const Tree& tree, std::span<const double> x,
                                     int n_features);

// Ensemble attribution: mean of per-tree Shapley values; base value is the
// mean of per-tree expectations. Errors: SchemaMismatch.
AttributionResult tree_shap(const ExtraTreesModel& model,
                            std::span<const double> x);

// Exact Shapley values by full subset enumeration over the given player
// features; used as the independent oracle for tree_shap.
// Errors: TooManyFeatures for more than 12 players.
std::vector<double> brute_force_shapley(const Tree& tree,
                                        std::span<const double> x,
                                        std::span<const int> features);

// Mean absolute contribution per feature over a sample, sorted descending;
// ties keep schema order. Errors: EmptySample.
std::vector<std::pair<std::string, double>> rank_global_importance(
    const ExtraTreesModel& model, const std::vector<FeatureVector>& sample);

// Exports. The attribution CSV carries base_value and prediction lines ahead
// of the feature,contribution table.
void write_attribution_csv(std::ostream& out, const ExtraTreesModel& model,
                           const AttributionResult& result);
void write_importance_csv(
    std::ostream& out,
    const std::vector<std::pair<std::string, double>>& ranking);

}  // namespace oodgate
