#include <array>
#include <bit>
#include <cstdint>

#include "oodgate/error.hpp"
#include "oodgate/features.hpp"

namespace oodgate {
namespace {

inline int glcm_level(double y) {
  int level = static_cast<int>(y / 8.0);
  if (level < 0) level = 0;
  if (level >= Glcm::kLevels) level = Glcm::kLevels - 1;
  return level;
}

// Circular 0/1 transition count of an 8-bit code.
inline int transitions(unsigned code) {
  const unsigned rotated = ((code << 1) | (code >> 7)) & 0xFFu;
  return std::popcount((code ^ rotated) & 0xFFu);
}

// code -> histogram bin; uniform codes (<= 2 transitions) get dedicated bins
// in ascending code order, everything else lands in the catch-all.
const std::array<std::uint8_t, 256>& lbp_bin_table() {
  static const std::array<std::uint8_t, 256> table = [] {
    std::array<std::uint8_t, 256> t{};
    int next = 0;
    for (unsigned code = 0; code < 256; ++code) {
      t[code] = transitions(code) <= 2 ? static_cast<std::uint8_t>(next++)
                                       : static_cast<std::uint8_t>(LbpHistogram::kBins - 1);
    }
    // 58 uniform patterns for P=8; the table construction guarantees it.
    return t;
  }();
  return table;
}

}  // namespace

Glcm compute_glcm(const GrayImage& gray) {
  require(gray.width >= 2, errc::too_narrow, "GLCM needs width >= 2");

  std::array<std::int64_t, Glcm::kLevels * Glcm::kLevels> counts{};
  std::vector<std::uint8_t> levels(gray.values.size());
  for (std::size_t i = 0; i < gray.values.size(); ++i)
    levels[i] = static_cast<std::uint8_t>(glcm_level(gray.values[i]));

  for (int y = 0; y < gray.height; ++y) {
    const std::uint8_t* row = levels.data() + static_cast<std::size_t>(y) * gray.width;
    for (int x = 0; x + 1 < gray.width; ++x)
      ++counts[static_cast<std::size_t>(row[x]) * Glcm::kLevels + row[x + 1]];
  }

  Glcm g;
  std::int64_t total = 0;
  for (int i = 0; i < Glcm::kLevels; ++i)
    for (int j = 0; j < Glcm::kLevels; ++j)
      total += counts[static_cast<std::size_t>(i) * Glcm::kLevels + j];
  const double denom = 2.0 * static_cast<double>(total);
  for (int i = 0; i < Glcm::kLevels; ++i) {
    for (int j = 0; j < Glcm::kLevels; ++j) {
      const std::int64_t sym =
          counts[static_cast<std::size_t>(i) * Glcm::kLevels + j] +
          counts[static_cast<std::size_t>(j) * Glcm::kLevels + i];
      g.at(i, j) = static_cast<double>(sym) / denom;
    }
  }
  return g;
}

GlcmFeatures glcm_features(const Glcm& g) {
  GlcmFeatures out;
  std::array<double, Glcm::kLevels> marginal{};
  for (int i = 0; i < Glcm::kLevels; ++i) {
    for (int j = 0; j < Glcm::kLevels; ++j) {
      const double p = g.at(i, j);
      const double d = static_cast<double>(i - j);
      out.contrast += p * d * d;
      out.homogeneity += p / (1.0 + d * d);
      out.energy += p * p;
      marginal[static_cast<std::size_t>(i)] += p;
    }
  }
  double mu = 0.0;
  for (int i = 0; i < Glcm::kLevels; ++i) mu += static_cast<double>(i) * marginal[static_cast<std::size_t>(i)];
  double var = 0.0;
  for (int i = 0; i < Glcm::kLevels; ++i) {
    const double d = static_cast<double>(i) - mu;
    var += d * d * marginal[static_cast<std::size_t>(i)];
  }
  if (var >= 1e-12) {
    double cov = 0.0;
    for (int i = 0; i < Glcm::kLevels; ++i)
      for (int j = 0; j < Glcm::kLevels; ++j)
        cov += g.at(i, j) * (static_cast<double>(i) - mu) * (static_cast<double>(j) - mu);
    out.correlation = cov / var;
  }
  return out;
}

LbpHistogram compute_lbp(const GrayImage& gray) {
  require(gray.width >= 3 && gray.height >= 3, errc::too_small,
          "LBP needs at least a 3x3 image");

  // Neighbor order: east first, then counter-clockwise.
  static constexpr int dx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

  LbpHistogram h;
  h.code_width = gray.width - 2;
  h.code_height = gray.height - 2;
  h.code_image.resize(static_cast<std::size_t>(h.code_width) * h.code_height);
  const auto& table = lbp_bin_table();

  for (int y = 1; y + 1 < gray.height; ++y) {
    for (int x = 1; x + 1 < gray.width; ++x) {
      const double center = gray.at(x, y);
      unsigned code = 0;
      for (int k = 0; k < 8; ++k)
        if (gray.at(x + dx[k], y + dy[k]) >= center) code |= 1u << k;
      h.code_image[static_cast<std::size_t>(y - 1) * h.code_width + (x - 1)] =
          static_cast<std::uint8_t>(code);
      ++h.bins[table[code]];
    }
  }
  return h;
}

LbpFeatures lbp_features(const LbpHistogram& h) {
  LbpFeatures out;
  if (h.code_image.empty()) return out;
  const double n = static_cast<double>(h.code_image.size());
  double sum = 0.0;
  for (const std::uint8_t c : h.code_image) sum += c;
  out.mean = sum / n;
  double ss = 0.0;
  for (const std::uint8_t c : h.code_image) {
    const double d = static_cast<double>(c) - out.mean;
    ss += d * d;
  }
  out.variance = ss / n;
  return out;
}

}  // namespace oodgate
