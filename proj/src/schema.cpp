#include <array>
#include <string_view>

#include "oodgate/features.hpp"

namespace oodgate {

std::string_view feature_schema_version() { return "1"; }

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      // intensity / background
      "gray_min", "gray_max", "gray_mean", "gray_var", "gray_p05", "gray_p95",
      "background_dark_flag",
      // color / texture
      "hue_mean", "hue_var", "sat_mean", "sat_var", "val_mean", "val_var",
      "glcm_contrast", "glcm_homogeneity", "glcm_energy", "glcm_correlation",
      "lbp_mean", "lbp_var",
      // spatial
      "radial_slope_mean", "radial_profile_var", "center_mean",
      "outer_ring_mean", "center_minus_outer", "hemisphere_asymmetry_tb",
      "hemisphere_asymmetry_lr", "quadrant_mean_var",
      // shape
      "circularity", "eccentricity", "solidity", "extent",
      "circle_residual_mean", "circle_residual_max", "mask_area_ratio",
      "boundary_smoothness",
      // global
      "is_rgb", "black_pixel_ratio", "all_corners_dark_flag", "aspect_ratio"};
  return names;
}

int feature_index(std::string_view name) {
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureCount; ++i)
    if (names[static_cast<std::size_t>(i)] == name) return i;
  return -1;
}

FeatureKind feature_kind(int index) {
  switch (index) {
    case F_BACKGROUND_DARK_FLAG:
    case F_IS_RGB:
    case F_ALL_CORNERS_DARK_FLAG:
      return FeatureKind::flag;
    case F_HUE_VAR:
    case F_SAT_MEAN:
    case F_SAT_VAR:
    case F_VAL_MEAN:
    case F_VAL_VAR:
    case F_HEMISPHERE_ASYMMETRY_TB:
    case F_HEMISPHERE_ASYMMETRY_LR:
    case F_ECCENTRICITY:
    case F_SOLIDITY:
    case F_EXTENT:
    case F_MASK_AREA_RATIO:
    case F_BOUNDARY_SMOOTHNESS:
    case F_BLACK_PIXEL_RATIO:
    case F_GLCM_HOMOGENEITY:
    case F_GLCM_ENERGY:
      return FeatureKind::unit_ratio;
    case F_GRAY_MIN:
    case F_GRAY_MAX:
    case F_GRAY_MEAN:
    case F_GRAY_VAR:
    case F_GRAY_P05:
    case F_GRAY_P95:
    case F_HUE_MEAN:
    case F_GLCM_CONTRAST:
    case F_LBP_MEAN:
    case F_LBP_VAR:
    case F_RADIAL_PROFILE_VAR:
    case F_CENTER_MEAN:
    case F_OUTER_RING_MEAN:
    case F_QUADRANT_MEAN_VAR:
    case F_CIRCULARITY:
    case F_CIRCLE_RESIDUAL_MEAN:
    case F_CIRCLE_RESIDUAL_MAX:
    case F_ASPECT_RATIO:
      return FeatureKind::nonnegative;
    default:
      return FeatureKind::real;  // slope, center_minus_outer, glcm_correlation
  }
}

}  // namespace oodgate
