#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oodgate/features.hpp"

namespace oodgate {

// One node of a decision tree, stored node-major with explicit child
// indices. feature < 0 marks a leaf. Class counts are training sample
// weights (equal to raw counts unless class weighting is on); n_samples is
// always the raw count and provides the cover weights used by attribution.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t n_samples = 0;
  double count0 = 0.0;
  double count1 = 0.0;
  double value = 0.0;  // leaf: P(class 1) = count1 / (count0 + count1)

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  int max_leaf_depth() const;
};

struct ForestHyperparams {
  int n_estimators = 100;
  int max_depth = 10;
  int min_samples_split = 10;
  int min_samples_leaf = 2;
  int k_features = 0;  // <= 0: ceil(sqrt(n_features))
  bool class_weighted = false;
};

// Row-major numeric dataset with binary labels.
struct Dataset {
  int n_features = 0;
  std::vector<double> x;
  std::vector<int> y;

  int n_samples() const { return static_cast<int>(y.size()); }
  std::span<const double> row(int i) const {
    return {x.data() + static_cast<std::size_t>(i) * n_features,
            static_cast<std::size_t>(n_features)};
  }
  void push_row(std::span<const double> row, int label) {
    x.insert(x.end(), row.begin(), row.end());
    y.push_back(label);
  }
};

struct ExtraTreesModel {
  ForestHyperparams params;
  int n_features = 0;
  std::vector<std::string> feature_names;
  std::string schema_version;
  std::uint64_t training_seed = 0;
  int training_factor = 1;
  std::vector<Tree> trees;

  // Mean of the per-tree leaf values reached by x.
  // Errors: SchemaMismatch when x has the wrong length.
  double predict_probability(std::span<const double> x) const;
};

// Extremely randomized trees: every tree sees the full sample (no
// bootstrap); each node draws k distinct candidate features and one uniform
// threshold per candidate inside the node's value range, then keeps the
// split with the lowest weighted Gini impurity. Deterministic given seed.
// Errors: SingleClass, TooFewSamples.
ExtraTreesModel train_extra_trees(const Dataset& data, std::uint64_t seed,
                                  ForestHyperparams params = {});

// Structural audit used by tests and acceptance checks.
struct ForestAudit {
  int max_depth = 0;           // deepest leaf over all trees
  std::int64_t min_leaf_samples = 0;
  std::int64_t min_split_samples = 0;  // smallest sample count at any split
  bool children_partition = true;  // child sample counts add up everywhere
  bool leaf_values_consistent = true;
  bool feature_indices_valid = true;
};
ForestAudit audit_forest(const ExtraTreesModel& model);

// True when the two models have identical structure and statistics.
bool forests_identical(const ExtraTreesModel& a, const ExtraTreesModel& b);

}  // namespace oodgate
