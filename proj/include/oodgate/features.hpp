#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodgate/image.hpp"

namespace oodgate {

// ------------------------------------------------------------------ schema

inline constexpr int kFeatureCount = 39;

// Bump whenever a feature is renamed, reordered, added or removed. Model
// files record it and refuse to run against a different schema.
std::string_view feature_schema_version();

// The 39 feature names, in pipeline order:
// intensity/background (7), color/texture (12), spatial (8), shape (8),
// global (4).
const std::array<std::string_view, kFeatureCount>& feature_names();
int feature_index(std::string_view name);  // -1 when unknown

enum FeatureIndex : int {
  F_GRAY_MIN = 0,
  F_GRAY_MAX,
  F_GRAY_MEAN,
  F_GRAY_VAR,
  F_GRAY_P05,
  F_GRAY_P95,
  F_BACKGROUND_DARK_FLAG,
  F_HUE_MEAN,
  F_HUE_VAR,
  F_SAT_MEAN,
  F_SAT_VAR,
  F_VAL_MEAN,
  F_VAL_VAR,
  F_GLCM_CONTRAST,
  F_GLCM_HOMOGENEITY,
  F_GLCM_ENERGY,
  F_GLCM_CORRELATION,
  F_LBP_MEAN,
  F_LBP_VAR,
  F_RADIAL_SLOPE_MEAN,
  F_RADIAL_PROFILE_VAR,
  F_CENTER_MEAN,
  F_OUTER_RING_MEAN,
  F_CENTER_MINUS_OUTER,
  F_HEMISPHERE_ASYMMETRY_TB,
  F_HEMISPHERE_ASYMMETRY_LR,
  F_QUADRANT_MEAN_VAR,
  F_CIRCULARITY,
  F_ECCENTRICITY,
  F_SOLIDITY,
  F_EXTENT,
  F_CIRCLE_RESIDUAL_MEAN,
  F_CIRCLE_RESIDUAL_MAX,
  F_MASK_AREA_RATIO,
  F_BOUNDARY_SMOOTHNESS,
  F_IS_RGB,
  F_BLACK_PIXEL_RATIO,
  F_ALL_CORNERS_DARK_FLAG,
  F_ASPECT_RATIO,
};

// Value-range class per feature, used by invariant checks.
enum class FeatureKind { flag, unit_ratio, nonnegative, real };
FeatureKind feature_kind(int index);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  std::span<const double> span() const { return {values.data(), values.size()}; }
};

// Documented constants of the extractor; all overridable through the config
// file.
struct FeatureConfig {
  double border_dark_threshold = 32.0;  // border ring mean for background_dark_flag
  double black_pixel_threshold = 10.0;  // Y below this counts toward black_pixel_ratio
  double corner_dark_threshold = 32.0;  // corner patch mean for all_corners_dark_flag
  double corner_patch_fraction = 0.05;
  double mask_min_area_fraction = 0.005;  // below this the mask is declared empty
  double rgb_spread_threshold = 2.0;      // channel spread that marks a color pixel
  double rgb_min_fraction = 0.01;         // fraction of color pixels for is_rgb
  int radial_bins = 10;
  double center_disk_fraction = 0.25;
  double outer_ring_fraction = 0.75;
};

// ------------------------------------------------------------------ types

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // one per pixel, 0 or 1
  std::int64_t area = 0;

  bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  bool empty() const { return area == 0; }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct CircleFit {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
  double residual_mean = 0.0;
  double residual_max = 0.0;
};

struct Glcm {
  static constexpr int kLevels = 32;
  std::array<double, kLevels * kLevels> p{};  // normalized, symmetric

  double at(int i, int j) const {
    return p[static_cast<std::size_t>(i) * kLevels + j];
  }
  double& at(int i, int j) {
    return p[static_cast<std::size_t>(i) * kLevels + j];
  }
};

struct LbpHistogram {
  static constexpr int kBins = 59;  // 58 uniform patterns + 1 catch-all
  std::array<std::int64_t, kBins> bins{};
  std::vector<std::uint8_t> code_image;  // interior codes, row-major
  int code_width = 0;                    // width - 2
  int code_height = 0;                   // height - 2
};

// ------------------------------------------------------------- operations

// Otsu threshold (256-bin histogram), keep the largest 4-connected
// component, fill interior holes. Below the minimum area fraction the empty
// mask is returned.
BinaryMask extract_mask(const GrayImage& gray, const FeatureConfig& cfg = {});

struct ShapeFeatures {
  double circularity = 0.0;
  double eccentricity = 0.0;
  double solidity = 0.0;
  double extent = 0.0;
  double circle_residual_mean = 0.0;
  double circle_residual_max = 0.0;
  double mask_area_ratio = 0.0;
  double boundary_smoothness = 0.0;
};
ShapeFeatures shape_features(const BinaryMask& mask);

// Algebraic least-squares circle (Kasa). Throws Degenerate for fewer than 3
// points or collinear input; shape_features substitutes zeros in that case.
CircleFit fit_circle(std::span<const Point2> points);

// 32-level, distance-1 horizontal co-occurrence, symmetrized and normalized.
Glcm compute_glcm(const GrayImage& gray);

struct GlcmFeatures {
  double contrast = 0.0;
  double homogeneity = 0.0;
  double energy = 0.0;
  double correlation = 0.0;
};
GlcmFeatures glcm_features(const Glcm& g);

// LBP with P=8, R=1, uniform mapping; bit 0 = east neighbor, then
// counter-clockwise; a bit is set when neighbor >= center.
LbpHistogram compute_lbp(const GrayImage& gray);

struct LbpFeatures {
  double mean = 0.0;
  double variance = 0.0;
};
LbpFeatures lbp_features(const LbpHistogram& h);

struct IntensityFeatures {
  double gray_min = 0.0;
  double gray_max = 0.0;
  double gray_mean = 0.0;
  double gray_var = 0.0;
  double gray_p05 = 0.0;
  double gray_p95 = 0.0;
  double background_dark_flag = 0.0;
};
IntensityFeatures intensity_background_features(const GrayImage& gray,
                                                const FeatureConfig& cfg = {});

struct ColorFeatures {
  double hue_mean = 0.0;
  double hue_var = 0.0;
  double sat_mean = 0.0;
  double sat_var = 0.0;
  double val_mean = 0.0;
  double val_var = 0.0;
};
// Grayscale inputs (no HSV plane): hue/sat stats are 0 and the value stats
// come from Y/255.
ColorFeatures color_features(const std::optional<HsvImage>& hsv,
                             const GrayImage& gray);

struct SpatialFeatures {
  double radial_slope_mean = 0.0;
  double radial_profile_var = 0.0;
  double center_mean = 0.0;
  double outer_ring_mean = 0.0;
  double center_minus_outer = 0.0;
  double hemisphere_asymmetry_tb = 0.0;
  double hemisphere_asymmetry_lr = 0.0;
  double quadrant_mean_var = 0.0;
};
SpatialFeatures spatial_features(const GrayImage& gray,
                                 const FeatureConfig& cfg = {});

struct GlobalFeatures {
  double is_rgb = 0.0;
  double black_pixel_ratio = 0.0;
  double all_corners_dark_flag = 0.0;
  double aspect_ratio = 0.0;
};
GlobalFeatures global_features(const RasterImage& img, const GrayImage& gray,
                               const FeatureConfig& cfg = {});

// Full pipeline: downsample, derive gray/HSV/mask, run every extractor and
// assemble the 39 values in schema order. Deterministic; never emits
// NaN or Inf.
FeatureVector extract_feature_vector(const RasterImage& img, int factor,
                                     const FeatureConfig& cfg = {});

// percentile by nearest rank: 1-based rank = round-half-up(p * n).
double nearest_rank_percentile(std::vector<double> values, double p);

// CSV export: header "path,label,<names...>", one row per image.
void write_features_csv(std::ostream& out,
                        const std::vector<std::string>& paths,
                        const std::vector<int>& labels,
                        const std::vector<FeatureVector>& features);

}  // namespace oodgate
