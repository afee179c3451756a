#include "oodgate/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oodgate/error.hpp"
#include "oodgate/parallel.hpp"
#include "oodgate/rng.hpp"

namespace oodgate {

double Tree::predict(std::span<const double> x) const {
  const TreeNode* node = &nodes[0];
  while (!node->is_leaf()) {
    node = x[static_cast<std::size_t>(node->feature)] <= node->threshold
               ? &nodes[static_cast<std::size_t>(node->left)]
               : &nodes[static_cast<std::size_t>(node->right)];
  }
  return node->value;
}

int Tree::max_leaf_depth() const {
  int deepest = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [idx, depth] = stack.back();
    stack.pop_back();
    const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
      deepest = std::max(deepest, depth);
    } else {
      stack.emplace_back(node.left, depth + 1);
      stack.emplace_back(node.right, depth + 1);
    }
  }
  return deepest;
}

double ExtraTreesModel::predict_probability(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == n_features, errc::schema_mismatch,
          "feature vector length does not match the model");
  double sum = 0.0;
  for (const Tree& tree : trees) sum += tree.predict(x);
  return sum / static_cast<double>(trees.size());
}

namespace {

struct TreeBuilder {
  const Dataset& data;
  const ForestHyperparams& hp;
  double w0, w1;  // per-class sample weights
  int k;
  Rng rng;
  std::vector<int> idx;  // sample indices, partitioned in place per node
  std::vector<TreeNode> nodes;

  double weighted_gini(double c0, double c1) const {
    const double total = c0 + c1;
    if (total <= 0.0) return 0.0;
    const double p0 = c0 / total, p1 = c1 / total;
    return 1.0 - p0 * p0 - p1 * p1;
  }

  std::int32_t make_leaf(int begin, int end) {
    TreeNode leaf;
    leaf.n_samples = end - begin;
    for (int i = begin; i < end; ++i) {
      if (data.y[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] == 1)
        leaf.count1 += w1;
      else
        leaf.count0 += w0;
    }
    leaf.value = leaf.count1 / (leaf.count0 + leaf.count1);
    nodes.push_back(leaf);
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  std::int32_t build(int begin, int end, int depth) {
    const int n = end - begin;
    int n1 = 0;
    for (int i = begin; i < end; ++i) n1 += data.y[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    const bool pure = n1 == 0 || n1 == n;

    if (depth >= hp.max_depth || n < hp.min_samples_split || pure)
      return make_leaf(begin, end);

    // k distinct candidate features; each draws one uniform threshold in the
    // node's (min, max). Candidates producing an undersized child are
    // discarded; ties keep the earliest drawn candidate.
    const std::vector<int> candidates = rng.sample_distinct(k, data.n_features);
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = std::numeric_limits<double>::infinity();

    for (const int f : candidates) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int i = begin; i < end; ++i) {
        const double v = data.x[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]) * data.n_features + f];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;  // constant feature in this node
      const double t = rng.uniform_real(lo, hi);

      int nl = 0;
      double l0 = 0.0, l1 = 0.0, r0 = 0.0, r1 = 0.0;
      for (int i = begin; i < end; ++i) {
        const int s = idx[static_cast<std::size_t>(i)];
        const double v = data.x[static_cast<std::size_t>(s) * data.n_features + f];
        const bool left = v <= t;
        nl += left;
        if (data.y[static_cast<std::size_t>(s)] == 1) {
          (left ? l1 : r1) += w1;
        } else {
          (left ? l0 : r0) += w0;
        }
      }
      const int nr = n - nl;
      if (nl < hp.min_samples_leaf || nr < hp.min_samples_leaf) continue;

      const double wl = l0 + l1, wr = r0 + r1;
      const double score =
          (wl * weighted_gini(l0, l1) + wr * weighted_gini(r0, r1)) / (wl + wr);
      if (score < best_score) {
        best_score = score;
        best_feature = f;
        best_threshold = t;
      }
    }

    if (best_feature < 0) return make_leaf(begin, end);

    auto mid_it = std::partition(
        idx.begin() + begin, idx.begin() + end, [&](int s) {
          return data.x[static_cast<std::size_t>(s) * data.n_features + best_feature] <= best_threshold;
        });
    const int mid = static_cast<int>(mid_it - idx.begin());

    TreeNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.n_samples = n;
    const std::int32_t self = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(node);
    const std::int32_t left = build(begin, mid, depth + 1);
    const std::int32_t right = build(mid, end, depth + 1);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    nodes[static_cast<std::size_t>(self)].count0 =
        nodes[static_cast<std::size_t>(left)].count0 + nodes[static_cast<std::size_t>(right)].count0;
    nodes[static_cast<std::size_t>(self)].count1 =
        nodes[static_cast<std::size_t>(left)].count1 + nodes[static_cast<std::size_t>(right)].count1;
    nodes[static_cast<std::size_t>(self)].value =
        nodes[static_cast<std::size_t>(self)].count1 /
        (nodes[static_cast<std::size_t>(self)].count0 + nodes[static_cast<std::size_t>(self)].count1);
    return self;
  }
};

}  // namespace

ExtraTreesModel train_extra_trees(const Dataset& data, std::uint64_t seed,
                                  ForestHyperparams params) {
  const int n = data.n_samples();
  require(n >= params.min_samples_split, errc::too_few_samples,
          "need at least min_samples_split samples to train");
  int n1 = 0;
  for (const int label : data.y) {
    require(label == 0 || label == 1, errc::bad_label, "labels must be 0 or 1");
    n1 += label;
  }
  require(n1 > 0 && n1 < n, errc::single_class,
          "training data must contain both classes");

  if (params.k_features <= 0)
    params.k_features = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(data.n_features))));
  params.k_features = std::min(params.k_features, data.n_features);

  ExtraTreesModel model;
  model.params = params;
  model.n_features = data.n_features;
  model.training_seed = seed;
  model.schema_version = std::string(feature_schema_version());
  if (data.n_features == kFeatureCount) {
    for (const auto& name : feature_names()) model.feature_names.emplace_back(name);
  } else {
    for (int f = 0; f < data.n_features; ++f)
      model.feature_names.push_back("f" + std::to_string(f));
  }

  // Class weights balance the Gini criterion and the leaf posteriors when
  // enabled; raw counts otherwise.
  const double w0 = params.class_weighted ? static_cast<double>(n) / (2.0 * (n - n1)) : 1.0;
  const double w1 = params.class_weighted ? static_cast<double>(n) / (2.0 * n1) : 1.0;

  model.trees.resize(static_cast<std::size_t>(params.n_estimators));
  const Rng root(seed);

  // Per-tree substreams keep tree construction order-independent, so the
  // build can fan out across workers and still reproduce bit-for-bit.
  parallel_for(static_cast<std::size_t>(params.n_estimators), worker_thread_cap(),
               [&](std::size_t t) {
                 TreeBuilder builder{data, params, w0, w1, params.k_features,
                                     root.stream(t), {}, {}};
                 builder.idx.resize(static_cast<std::size_t>(n));
                 for (int i = 0; i < n; ++i) builder.idx[static_cast<std::size_t>(i)] = i;
                 builder.nodes.reserve(64);
                 builder.build(0, n, 0);
                 model.trees[t].nodes = std::move(builder.nodes);
               });
  return model;
}

ForestAudit audit_forest(const ExtraTreesModel& model) {
  ForestAudit audit;
  audit.min_leaf_samples = std::numeric_limits<std::int64_t>::max();
  audit.min_split_samples = std::numeric_limits<std::int64_t>::max();
  for (const Tree& tree : model.trees) {
    audit.max_depth = std::max(audit.max_depth, tree.max_leaf_depth());
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf()) {
        audit.min_leaf_samples = std::min<std::int64_t>(audit.min_leaf_samples, node.n_samples);
        const double total = node.count0 + node.count1;
        if (total <= 0.0 || std::fabs(node.value - node.count1 / total) > 1e-12)
          audit.leaf_values_consistent = false;
      } else {
        audit.min_split_samples = std::min<std::int64_t>(audit.min_split_samples, node.n_samples);
        if (node.feature >= model.n_features) audit.feature_indices_valid = false;
        if (!std::isfinite(node.threshold)) audit.feature_indices_valid = false;
        const TreeNode& l = tree.nodes[static_cast<std::size_t>(node.left)];
        const TreeNode& r = tree.nodes[static_cast<std::size_t>(node.right)];
        if (l.n_samples + r.n_samples != node.n_samples)
          audit.children_partition = false;
      }
    }
  }
  if (audit.min_leaf_samples == std::numeric_limits<std::int64_t>::max())
    audit.min_leaf_samples = 0;
  if (audit.min_split_samples == std::numeric_limits<std::int64_t>::max())
    audit.min_split_samples = 0;
  return audit;
}

bool forests_identical(const ExtraTreesModel& a, const ExtraTreesModel& b) {
  if (a.trees.size() != b.trees.size() || a.n_features != b.n_features)
    return false;
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    const auto& na = a.trees[t].nodes;
    const auto& nb = b.trees[t].nodes;
    if (na.size() != nb.size()) return false;
    for (std::size_t i = 0; i < na.size(); ++i) {
      if (na[i].feature != nb[i].feature || na[i].threshold != nb[i].threshold ||
          na[i].left != nb[i].left || na[i].right != nb[i].right ||
          na[i].n_samples != nb[i].n_samples || na[i].count0 != nb[i].count0 ||
          na[i].count1 != nb[i].count1 || na[i].value != nb[i].value)
        return false;
    }
  }
  return true;
}

}  // namespace oodgate
