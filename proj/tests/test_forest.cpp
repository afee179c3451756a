#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oodgate/error.hpp"
#include "oodgate/forest.hpp"

using namespace oodgate;

namespace {

// Two well-separated 1-D clusters: feature0 ~ U(0,1) labeled 0,
// feature0 ~ U(2,3) labeled 1.
Dataset separable_toy(int per_class, std::uint64_t seed) {
  Dataset data;
  data.n_features = 1;
  Rng rng(seed);
  for (int i = 0; i < per_class; ++i) {
    const double v = rng.uniform_real(0.0, 1.0);
    data.push_row({&v, 1}, 0);
  }
  for (int i = 0; i < per_class; ++i) {
    const double v = rng.uniform_real(2.0, 3.0);
    data.push_row({&v, 1}, 1);
  }
  return data;
}

// Independent per-tree traversal, used as the prediction oracle.
double traverse_oracle(const Tree& tree, std::span<const double> x) {
  int node = 0;
  while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].value;
}

}  // namespace

namespace {

bool leaf_is_pure(const Tree& tree, std::span<const double> x) {
  int node = 0;
  while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(node)];
  return leaf.count0 == 0.0 || leaf.count1 == 0.0;
}

}  // namespace

TEST_CASE("separable toy set trains to perfect training accuracy") {
  const Dataset data = separable_toy(50, 2024);
  const ExtraTreesModel model = train_extra_trees(data, 17);
  CHECK(model.params.k_features == 1);
  int correct = 0;
  for (int i = 0; i < data.n_samples(); ++i) {
    const double p = model.predict_probability(data.row(i));
    correct += (p >= 0.5 ? 1 : 0) == data.y[static_cast<std::size_t>(i)];
    // when every tree resolves the point to a pure leaf, the ensemble
    // output must be exactly 0 or 1
    bool all_pure = true;
    for (const Tree& tree : model.trees)
      all_pure = all_pure && leaf_is_pure(tree, data.row(i));
    if (all_pure) CHECK((p == 0.0 || p == 1.0));
  }
  CHECK(correct == data.n_samples());
}

TEST_CASE("an ensemble of pure leaves yields exact 0/1 probabilities") {
  auto pure_tree = [](double threshold) {
    Tree tree;
    TreeNode root;
    root.feature = 0;
    root.threshold = threshold;
    root.n_samples = 20;
    root.left = 1;
    root.right = 2;
    TreeNode left, right;
    left.n_samples = 10;
    left.count0 = 10.0;
    left.value = 0.0;
    right.n_samples = 10;
    right.count1 = 10.0;
    right.value = 1.0;
    root.count0 = 10.0;
    root.count1 = 10.0;
    root.value = 0.5;
    tree.nodes = {root, left, right};
    return tree;
  };
  ExtraTreesModel model;
  model.n_features = 1;
  model.feature_names = {"f0"};
  for (const double t : {1.2, 1.5, 1.8}) model.trees.push_back(pure_tree(t));
  const double low = 0.5, high = 2.5;
  CHECK(model.predict_probability({&low, 1}) == 0.0);
  CHECK(model.predict_probability({&high, 1}) == 1.0);
}

TEST_CASE("structural constraints hold on a trained forest") {
  Dataset data;
  data.n_features = 5;
  Rng rng(5150);
  for (int i = 0; i < 400; ++i) {
    double row[5];
    for (double& v : row) v = rng.uniform_real();
    const int label = (row[2] > 0.5) == (rng.uniform_real() < 0.95) ? 1 : 0;
    data.push_row({row, 5}, label);
  }
  const ExtraTreesModel model = train_extra_trees(data, 88);
  const ForestAudit audit = audit_forest(model);
  CHECK(audit.max_depth <= 10);
  CHECK(audit.min_leaf_samples >= 2);
  CHECK(audit.min_split_samples >= 10);
  CHECK(audit.children_partition);
  CHECK(audit.leaf_values_consistent);
  CHECK(audit.feature_indices_valid);
  CHECK(static_cast<int>(model.trees.size()) == 100);
}

TEST_CASE("same seed reproduces the forest structurally, different seed does not") {
  const Dataset data = separable_toy(30, 7);
  const ExtraTreesModel a = train_extra_trees(data, 99);
  const ExtraTreesModel b = train_extra_trees(data, 99);
  const ExtraTreesModel c = train_extra_trees(data, 100);
  CHECK(forests_identical(a, b));
  CHECK_FALSE(forests_identical(a, c));
}

TEST_CASE("single-leaf tree predicts its leaf value") {
  ExtraTreesModel model;
  model.n_features = 39;
  Tree tree;
  TreeNode leaf;
  leaf.n_samples = 10;
  leaf.count0 = 3.0;
  leaf.count1 = 7.0;
  leaf.value = 0.7;
  tree.nodes.push_back(leaf);
  model.trees.push_back(tree);
  const std::vector<double> x(39, 0.0);
  CHECK(model.predict_probability(x) == doctest::Approx(0.7));
}

TEST_CASE("ensemble probability equals the mean of per-tree traversals") {
  Dataset data;
  data.n_features = 6;
  Rng rng(808);
  for (int i = 0; i < 200; ++i) {
    double row[6];
    for (double& v : row) v = rng.uniform_real();
    data.push_row({row, 6}, row[0] + row[3] > 1.0 ? 1 : 0);
  }
  const ExtraTreesModel model = train_extra_trees(data, 3);
  for (int rep = 0; rep < 20; ++rep) {
    double x[6];
    for (double& v : x) v = rng.uniform_real(-0.2, 1.2);
    double mean = 0.0;
    for (const Tree& tree : model.trees) mean += traverse_oracle(tree, {x, 6});
    mean /= static_cast<double>(model.trees.size());
    CHECK(model.predict_probability({x, 6}) == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("prediction depends only on threshold comparisons") {
  const Dataset data = separable_toy(40, 11);
  const ExtraTreesModel model = train_extra_trees(data, 4);
  // smallest gap between the probe and any threshold in the forest
  const double probe = 0.37;
  double gap = 1e9;
  for (const Tree& tree : model.trees)
    for (const TreeNode& node : tree.nodes)
      if (!node.is_leaf()) gap = std::min(gap, std::fabs(probe - node.threshold));
  REQUIRE(gap > 0.0);
  const double base = model.predict_probability({&probe, 1});
  for (const double delta : {gap / 3.0, -gap / 3.0}) {
    const double moved = probe + delta;
    CHECK(model.predict_probability({&moved, 1}) == base);
  }
}

TEST_CASE("probability is always a valid probability") {
  Dataset data;
  data.n_features = 3;
  Rng rng(606);
  for (int i = 0; i < 100; ++i) {
    double row[3] = {rng.uniform_real(), rng.uniform_real(), rng.uniform_real()};
    data.push_row({row, 3}, static_cast<int>(rng.uniform_u32(2)));
  }
  const ExtraTreesModel model = train_extra_trees(data, 12);
  for (int rep = 0; rep < 50; ++rep) {
    double x[3] = {rng.uniform_real(-1, 2), rng.uniform_real(-1, 2), rng.uniform_real(-1, 2)};
    const double p = model.predict_probability({x, 3});
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("training errors") {
  Dataset single;
  single.n_features = 1;
  for (int i = 0; i < 20; ++i) {
    const double v = i;
    single.push_row({&v, 1}, 1);
  }
  try {
    train_extra_trees(single, 1);
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == errc::single_class);
  }

  Dataset tiny;
  tiny.n_features = 1;
  for (int i = 0; i < 5; ++i) {
    const double v = i;
    tiny.push_row({&v, 1}, i % 2);
  }
  try {
    train_extra_trees(tiny, 1);
    FAIL("expected TooFewSamples");
  } catch (const Error& e) {
    CHECK(e.code() == errc::too_few_samples);
  }
}

TEST_CASE("prediction rejects wrong vector length") {
  const Dataset data = separable_toy(20, 3);
  const ExtraTreesModel model = train_extra_trees(data, 8);
  const std::vector<double> wrong(2, 0.0);
  try {
    model.predict_probability(wrong);
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == errc::schema_mismatch);
  }
}

TEST_CASE("k_features resolves to ceil(sqrt(n_features))") {
  Dataset data;
  data.n_features = 39;
  Rng rng(2);
  for (int i = 0; i < 60; ++i) {
    double row[39];
    for (double& v : row) v = rng.uniform_real();
    data.push_row({row, 39}, i % 2);
  }
  const ExtraTreesModel model = train_extra_trees(data, 5);
  CHECK(model.params.k_features == 7);
}

TEST_CASE("class weighting keeps leaf posteriors consistent") {
  Dataset data;
  data.n_features = 2;
  Rng rng(31337);
  for (int i = 0; i < 300; ++i) {
    double row[2] = {rng.uniform_real(), rng.uniform_real()};
    data.push_row({row, 2}, rng.uniform_real() < 0.1 ? 1 : 0);
  }
  ForestHyperparams hp;
  hp.class_weighted = true;
  const ExtraTreesModel model = train_extra_trees(data, 5, hp);
  const ForestAudit audit = audit_forest(model);
  CHECK(audit.leaf_values_consistent);
  CHECK(audit.min_leaf_samples >= 2);
}
