#pragma once

// Shared builders and independent oracles for the test suites. Everything in
// here stays deliberately naive: oracles must not share code paths with the
// implementation they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "oodgate/features.hpp"
#include "oodgate/forest.hpp"
#include "oodgate/image.hpp"
#include "oodgate/rng.hpp"

namespace helpers {

using namespace oodgate;

// ------------------------------------------------------------- image builders

inline GrayImage make_gray(int w, int h,
                           const std::function<double(int, int)>& fn) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.values.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.values[static_cast<std::size_t>(y) * w + x] = fn(x, y);
  return img;
}

inline RasterImage make_rgb(int w, int h,
                            const std::function<std::array<int, 3>(int, int)>& fn) {
  RasterImage img;
  img.width = w;
  img.height = h;
  img.channels = 3;
  img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto c = fn(x, y);
      for (int k = 0; k < 3; ++k)
        img.pixels[(static_cast<std::size_t>(y) * w + x) * 3 + k] =
            static_cast<std::uint8_t>(c[static_cast<std::size_t>(k)]);
    }
  }
  return img;
}

inline bool in_disc(int x, int y, double cx, double cy, double r) {
  const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
  return dx * dx + dy * dy <= r * r;
}

// Pixel-count oracle for disc area: every pixel whose center lies within r.
inline std::int64_t disc_area_oracle(double cx, double cy, double r, int size) {
  std::int64_t n = 0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      if (in_disc(x, y, cx, cy, r)) ++n;
  return n;
}

inline BinaryMask make_mask(int size,
                            const std::function<bool(int, int)>& fn) {
  BinaryMask m;
  m.width = m.height = size;
  m.bits.resize(static_cast<std::size_t>(size) * size, 0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (fn(x, y)) {
        m.bits[static_cast<std::size_t>(y) * size + x] = 1;
        ++m.area;
      }
    }
  }
  return m;
}

inline BinaryMask disc_mask(double r, int size, double shift_x = 0.0,
                            double shift_y = 0.0) {
  const double c = size / 2.0;
  return make_mask(size, [&](int x, int y) {
    return in_disc(x, y, c + shift_x, c + shift_y, r);
  });
}

inline BinaryMask ellipse_mask(double a, double b, int size) {
  const double c = size / 2.0;
  return make_mask(size, [&](int x, int y) {
    const double dx = (x + 0.5 - c) / a, dy = (y + 0.5 - c) / b;
    return dx * dx + dy * dy <= 1.0;
  });
}

inline BinaryMask square_mask(int side, int size) {
  const int o = (size - side) / 2;
  return make_mask(size, [&](int x, int y) {
    return x >= o && x < o + side && y >= o && y < o + side;
  });
}

inline GrayImage random_gray(int w, int h, Rng& rng, double lo = 0.0,
                             double hi = 255.0) {
  return make_gray(w, h, [&](int, int) { return rng.uniform_real(lo, hi); });
}

// ------------------------------------------------------------------- oracles

// GLCM by explicit pair enumeration, symmetrized and normalized.
inline Glcm naive_glcm(const GrayImage& gray) {
  Glcm g;
  double total = 0.0;
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x + 1 < gray.width; ++x) {
      const int a = std::min(31, static_cast<int>(gray.at(x, y) / 8.0));
      const int b = std::min(31, static_cast<int>(gray.at(x + 1, y) / 8.0));
      g.at(a, b) += 1.0;
      g.at(b, a) += 1.0;
      total += 2.0;
    }
  }
  for (double& v : g.p) v /= total;
  return g;
}

// Haralick statistics by direct summation over the matrix.
inline GlcmFeatures naive_glcm_features(const Glcm& g) {
  GlcmFeatures f;
  double mu = 0.0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      f.contrast += g.at(i, j) * (i - j) * (i - j);
      f.homogeneity += g.at(i, j) / (1.0 + (i - j) * (i - j));
      f.energy += g.at(i, j) * g.at(i, j);
      mu += g.at(i, j) * i;
    }
  double var = 0.0, cov = 0.0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      var += g.at(i, j) * (i - mu) * (i - mu);
      cov += g.at(i, j) * (i - mu) * (j - mu);
    }
  f.correlation = var < 1e-12 ? 0.0 : cov / var;
  return f;
}

// Per-pixel LBP recompute with an independently derived uniform table.
inline int lbp_transitions(unsigned code) {
  int t = 0;
  for (int i = 0; i < 8; ++i) {
    const unsigned a = (code >> i) & 1u;
    const unsigned b = (code >> ((i + 1) % 8)) & 1u;
    t += a != b;
  }
  return static_cast<int>(t);
}

inline std::vector<std::int64_t> naive_lbp_histogram(const GrayImage& gray) {
  std::vector<int> bin_of(256);
  int next = 0;
  for (unsigned c = 0; c < 256; ++c)
    bin_of[c] = lbp_transitions(c) <= 2 ? next++ : 58;
  std::vector<std::int64_t> bins(59, 0);
  const int dx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  const int dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  for (int y = 1; y + 1 < gray.height; ++y) {
    for (int x = 1; x + 1 < gray.width; ++x) {
      unsigned code = 0;
      for (int k = 0; k < 8; ++k)
        if (gray.at(x + dx[k], y + dy[k]) >= gray.at(x, y)) code |= 1u << k;
      ++bins[static_cast<std::size_t>(bin_of[code])];
    }
  }
  return bins;
}

// O(n^2) pairwise AUROC with the 0.5 tie convention.
inline double pairwise_auroc(const std::vector<double>& scores,
                             const std::vector<int>& labels) {
  double wins = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// ------------------------------------------------- random trees (attribution)

// Random binary tree over n_features with random covers, depth-bounded.
// Leaf values in [0, 1]; covers behave like sample counts.
inline void random_tree_grow(Tree& tree, int node, int depth, int max_depth,
                             int n_features, Rng& rng) {
  const bool splittable = tree.nodes[static_cast<std::size_t>(node)].n_samples >= 2;
  const bool make_leaf =
      depth >= max_depth || !splittable || rng.uniform_real() < 0.3;
  TreeNode& self = tree.nodes[static_cast<std::size_t>(node)];
  if (make_leaf) {
    self.feature = -1;
    self.value = rng.uniform_real();
    const double c1 = self.value * self.n_samples;
    self.count1 = c1;
    self.count0 = self.n_samples - c1;
    return;
  }
  self.feature = static_cast<std::int32_t>(rng.uniform_u32(static_cast<std::uint32_t>(n_features)));
  self.threshold = rng.uniform_real();
  const int total = self.n_samples;
  const int left_n = 1 + static_cast<int>(rng.uniform_u32(static_cast<std::uint32_t>(total - 1)));

  TreeNode left_child, right_child;
  left_child.n_samples = left_n;
  right_child.n_samples = total - left_n;
  const int left = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(left_child);
  const int right = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(right_child);
  tree.nodes[static_cast<std::size_t>(node)].left = left;
  tree.nodes[static_cast<std::size_t>(node)].right = right;
  random_tree_grow(tree, left, depth + 1, max_depth, n_features, rng);
  random_tree_grow(tree, right, depth + 1, max_depth, n_features, rng);
  // counts roll up so cover-weighted expectations stay consistent
  tree.nodes[static_cast<std::size_t>(node)].count0 =
      tree.nodes[static_cast<std::size_t>(left)].count0 + tree.nodes[static_cast<std::size_t>(right)].count0;
  tree.nodes[static_cast<std::size_t>(node)].count1 =
      tree.nodes[static_cast<std::size_t>(left)].count1 + tree.nodes[static_cast<std::size_t>(right)].count1;
  tree.nodes[static_cast<std::size_t>(node)].value =
      tree.nodes[static_cast<std::size_t>(node)].count1 /
      (tree.nodes[static_cast<std::size_t>(node)].count0 + tree.nodes[static_cast<std::size_t>(node)].count1);
}

inline Tree random_tree(int n_features, int max_depth, Rng& rng) {
  Tree tree;
  TreeNode root;
  root.n_samples = 20 + static_cast<int>(rng.uniform_u32(200));
  tree.nodes.push_back(root);
  random_tree_grow(tree, 0, 0, max_depth, n_features, rng);
  return tree;
}

}  // namespace helpers
