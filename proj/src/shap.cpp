#include "oodgate/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "oodgate/error.hpp"

namespace oodgate {

double tree_expected_value(const Tree& tree) {
  // cover-weighted mean of leaf values
  double acc = 0.0;
  const double root_n = static_cast<double>(tree.nodes[0].n_samples);
  for (const TreeNode& node : tree.nodes)
    if (node.is_leaf())
      acc += node.value * static_cast<double>(node.n_samples) / root_n;
  return acc;
}

namespace {

// One entry of the unique-feature path maintained by the recursion.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;  // cover fraction that flows through when absent
  double one_fraction = 0.0;   // 1 if x follows this branch, else 0
  double pweight = 0.0;        // permutation weight polynomial coefficient
};

void extend_path(PathElement* path, int depth, double zero_fraction,
                 double one_fraction, int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].pweight +=
        one_fraction * path[i].pweight * (i + 1) / static_cast<double>(depth + 1);
    path[i].pweight =
        zero_fraction * path[i].pweight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one = path[depth].pweight;

  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next_one * (depth + 1) / static_cast<double>((i + 1) * one_fraction);
      next_one = tmp - path[i].pweight * zero_fraction * (depth - i) /
                           static_cast<double>(depth + 1);
    } else {
      path[i].pweight =
          path[i].pweight * (depth + 1) / (zero_fraction * static_cast<double>(depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one = path[depth].pweight;
  double total = 0.0;
  if (one_fraction != 0.0) {
    for (int i = depth - 1; i >= 0; --i) {
      const double tmp = next_one / static_cast<double>((i + 1) * one_fraction);
      total += tmp;
      next_one = path[i].pweight - tmp * zero_fraction * (depth - i);
    }
  } else {
    for (int i = depth - 1; i >= 0; --i)
      total += path[i].pweight / (zero_fraction * static_cast<double>(depth - i));
  }
  return total * (depth + 1);
}

struct ShapWalker {
  const Tree& tree;
  std::span<const double> x;
  std::vector<double>& phi;
  std::vector<PathElement> storage;

  void run() {
    // Each level copies its parent's path, so the buffer holds the full
    // triangle of prefixes.
    const int depth_cap = tree.max_leaf_depth() + 2;
    storage.resize(static_cast<std::size_t>((depth_cap + 1) * (depth_cap + 2)) / 2);
    recurse(0, 0, storage.data(), 1.0, 1.0, -1);
  }

  void recurse(std::int32_t node_index, int depth, PathElement* parent_path,
               double zero_fraction, double one_fraction, int feature) {
    PathElement* path = parent_path + depth;
    std::copy(parent_path, parent_path + depth, path);
    extend_path(path, depth, zero_fraction, one_fraction, feature);

    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
    if (node.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        phi[static_cast<std::size_t>(path[i].feature)] +=
            w * (path[i].one_fraction - path[i].zero_fraction) * node.value;
      }
      return;
    }

    const bool go_left = x[static_cast<std::size_t>(node.feature)] <= node.threshold;
    const std::int32_t hot = go_left ? node.left : node.right;
    const std::int32_t cold = go_left ? node.right : node.left;
    const double cover = static_cast<double>(node.n_samples);
    const double hot_fraction =
        static_cast<double>(tree.nodes[static_cast<std::size_t>(hot)].n_samples) / cover;
    const double cold_fraction =
        static_cast<double>(tree.nodes[static_cast<std::size_t>(cold)].n_samples) / cover;

    // A feature met twice on one path folds into a single coalition player.
    double incoming_zero = 1.0, incoming_one = 1.0;
    int found = -1;
    for (int i = 0; i <= depth; ++i) {
      if (path[i].feature == node.feature) {
        found = i;
        break;
      }
    }
    int next_depth = depth;
    if (found >= 0) {
      incoming_zero = path[found].zero_fraction;
      incoming_one = path[found].one_fraction;
      unwind_path(path, depth, found);
      next_depth = depth - 1;
    }

    recurse(hot, next_depth + 1, path, hot_fraction * incoming_zero,
            incoming_one, node.feature);
    recurse(cold, next_depth + 1, path, cold_fraction * incoming_zero, 0.0,
            node.feature);
  }
};

}  // namespace

std::vector<double> tree_shap_single(const Tree& tree, std::span<const double> x,
                                     int n_features) {
  std::vector<double> phi(static_cast<std::size_t>(n_features), 0.0);
  ShapWalker walker{tree, x, phi, {}};
  walker.run();
  return phi;
}

AttributionResult tree_shap(const ExtraTreesModel& model,
                            std::span<const double> x) {
  require(static_cast<int>(x.size()) == model.n_features, errc::schema_mismatch,
          "feature vector length does not match the model");
  AttributionResult result;
  result.contributions.assign(static_cast<std::size_t>(model.n_features), 0.0);
  const double n_trees = static_cast<double>(model.trees.size());
  for (const Tree& tree : model.trees) {
    const std::vector<double> phi = tree_shap_single(tree, x, model.n_features);
    for (std::size_t f = 0; f < phi.size(); ++f)
      result.contributions[f] += phi[f] / n_trees;
    result.base_value += tree_expected_value(tree) / n_trees;
  }
  result.prediction = model.predict_probability(x);
  return result;
}

namespace {

// Conditional expectation with absent features marginalized by cover.
double cover_expectation(const Tree& tree, std::int32_t node_index,
                         std::span<const double> x, std::uint32_t present,
                         std::span<const int> features) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
  if (node.is_leaf()) return node.value;

  int player = -1;
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i] == node.feature) player = static_cast<int>(i);

  if (player >= 0 && (present & (1u << player))) {
    const std::int32_t next =
        x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    return cover_expectation(tree, next, x, present, features);
  }
  const TreeNode& l = tree.nodes[static_cast<std::size_t>(node.left)];
  const TreeNode& r = tree.nodes[static_cast<std::size_t>(node.right)];
  const double n = static_cast<double>(node.n_samples);
  return cover_expectation(tree, node.left, x, present, features) * l.n_samples / n +
         cover_expectation(tree, node.right, x, present, features) * r.n_samples / n;
}

}  // namespace

std::vector<double> brute_force_shapley(const Tree& tree,
                                        std::span<const double> x,
                                        std::span<const int> features) {
  const int m = static_cast<int>(features.size());
  require(m <= 12, errc::too_many_features,
          "subset enumeration is limited to 12 features");

  double factorial[13];
  factorial[0] = 1.0;
  for (int i = 1; i <= 12; ++i) factorial[i] = factorial[i - 1] * i;

  // v(S) for every coalition
  std::vector<double> value(static_cast<std::size_t>(1) << m);
  for (std::uint32_t s = 0; s < value.size(); ++s)
    value[s] = cover_expectation(tree, 0, x, s, features);

  std::vector<double> phi(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    for (std::uint32_t s = 0; s < value.size(); ++s) {
      if (s & (1u << i)) continue;
      const int size = std::popcount(s);
      const double weight =
          factorial[size] * factorial[m - size - 1] / factorial[m];
      phi[static_cast<std::size_t>(i)] += weight * (value[s | (1u << i)] - value[s]);
    }
  }
  return phi;
}

std::vector<std::pair<std::string, double>> rank_global_importance(
    const ExtraTreesModel& model, const std::vector<FeatureVector>& sample) {
  require(!sample.empty(), errc::empty_sample,
          "importance ranking needs a non-empty sample");
  std::vector<double> mean_abs(static_cast<std::size_t>(model.n_features), 0.0);
  for (const FeatureVector& v : sample) {
    const AttributionResult r = tree_shap(model, v.span());
    for (std::size_t f = 0; f < mean_abs.size(); ++f)
      mean_abs[f] += std::fabs(r.contributions[f]);
  }
  for (double& v : mean_abs) v /= static_cast<double>(sample.size());

  std::vector<std::pair<std::string, double>> ranking;
  ranking.reserve(mean_abs.size());
  for (std::size_t f = 0; f < mean_abs.size(); ++f)
    ranking.emplace_back(model.feature_names[f], mean_abs[f]);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranking;
}

void write_attribution_csv(std::ostream& out, const ExtraTreesModel& model,
                           const AttributionResult& result) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", result.base_value);
  out << "base_value," << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", result.prediction);
  out << "prediction," << buf << '\n';
  out << "feature,contribution\n";
  for (std::size_t f = 0; f < result.contributions.size(); ++f) {
    std::snprintf(buf, sizeof(buf), "%.17g", result.contributions[f]);
    out << model.feature_names[f] << ',' << buf << '\n';
  }
}

void write_importance_csv(
    std::ostream& out,
    const std::vector<std::pair<std::string, double>>& ranking) {
  out << "feature,mean_abs_contribution\n";
  char buf[32];
  for (const auto& [name, value] : ranking) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << name << ',' << buf << '\n';
  }
}

}  // namespace oodgate
