#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "oodgate/error.hpp"
#include "oodgate/features.hpp"

namespace oodgate {
namespace {

double population_variance(std::span<const double> values, double mean) {
  double ss = 0.0;
  for (const double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return values.empty() ? 0.0 : ss / static_cast<double>(values.size());
}

double mean_of(std::span<const double> values) {
  double s = 0.0;
  for (const double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

}  // namespace

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  long rank = static_cast<long>(std::floor(p * n + 0.5));  // 1-based
  rank = std::clamp(rank, 1L, static_cast<long>(values.size()));
  auto nth = values.begin() + (rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

IntensityFeatures intensity_background_features(const GrayImage& gray,
                                                const FeatureConfig& cfg) {
  IntensityFeatures out;
  if (gray.values.empty()) return out;

  double mn = gray.values[0], mx = gray.values[0], sum = 0.0;
  for (const double v : gray.values) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    sum += v;
  }
  out.gray_min = mn;
  out.gray_max = mx;
  out.gray_mean = sum / static_cast<double>(gray.values.size());
  out.gray_var = population_variance(gray.values, out.gray_mean);
  out.gray_p05 = nearest_rank_percentile(gray.values, 0.05);
  out.gray_p95 = nearest_rank_percentile(gray.values, 0.95);

  // 1-pixel border ring.
  double border_sum = 0.0;
  std::int64_t border_n = 0;
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      if (y != 0 && y != gray.height - 1 && x != 0 && x != gray.width - 1)
        continue;
      border_sum += gray.at(x, y);
      ++border_n;
    }
  }
  const double border_mean = border_n ? border_sum / static_cast<double>(border_n) : 0.0;
  out.background_dark_flag = border_mean < cfg.border_dark_threshold ? 1.0 : 0.0;
  return out;
}

ColorFeatures color_features(const std::optional<HsvImage>& hsv,
                             const GrayImage& gray) {
  ColorFeatures out;
  if (!hsv.has_value()) {
    // grayscale input: value stats from Y/255, chroma stats stay 0
    const double n = static_cast<double>(gray.values.size());
    if (n == 0) return out;
    out.val_mean = mean_of(gray.values) / 255.0;
    double ss = 0.0;
    for (const double v : gray.values) {
      const double d = v / 255.0 - out.val_mean;
      ss += d * d;
    }
    out.val_var = ss / n;
    return out;
  }

  const HsvImage& img = *hsv;
  const double n = static_cast<double>(img.hue.size());
  if (n == 0) return out;

  double sum_sin = 0.0, sum_cos = 0.0, max_sat = 0.0;
  for (std::size_t i = 0; i < img.hue.size(); ++i) {
    const double rad = img.hue[i] * std::numbers::pi / 180.0;
    sum_sin += std::sin(rad);
    sum_cos += std::cos(rad);
    max_sat = std::max(max_sat, img.sat[i]);
  }
  const double resultant = std::hypot(sum_sin, sum_cos) / n;
  if (max_sat == 0.0) {
    // fully achromatic image: hue carries no information
    out.hue_mean = 0.0;
    out.hue_var = 0.0;
  } else if (resultant < 1e-12) {
    out.hue_mean = 0.0;  // zero resultant, direction undefined
    out.hue_var = 1.0;
  } else {
    double deg = std::atan2(sum_sin, sum_cos) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    out.hue_mean = deg;
    out.hue_var = std::clamp(1.0 - resultant, 0.0, 1.0);
  }

  out.sat_mean = mean_of(img.sat);
  out.sat_var = population_variance(img.sat, out.sat_mean);
  out.val_mean = mean_of(img.val);
  out.val_var = population_variance(img.val, out.val_mean);
  return out;
}

SpatialFeatures spatial_features(const GrayImage& gray,
                                 const FeatureConfig& cfg) {
  require(std::min(gray.width, gray.height) >= 16, errc::too_small,
          "spatial features need min(width, height) >= 16");
  SpatialFeatures out;

  const double cx = gray.width / 2.0;
  const double cy = gray.height / 2.0;
  const double r_max = std::min(gray.width, gray.height) / 2.0;
  const int bins = cfg.radial_bins;
  const double center_r = cfg.center_disk_fraction * r_max;
  const double outer_r = cfg.outer_ring_fraction * r_max;

  std::vector<double> bin_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::int64_t> bin_n(static_cast<std::size_t>(bins), 0);
  double center_sum = 0.0, outer_sum = 0.0;
  std::int64_t center_n = 0, outer_n = 0;
  double top_sum = 0.0, bottom_sum = 0.0, left_sum = 0.0, right_sum = 0.0;
  std::int64_t top_n = 0, bottom_n = 0, left_n = 0, right_n = 0;
  double quad_sum[4] = {0, 0, 0, 0};
  std::int64_t quad_n[4] = {0, 0, 0, 0};

  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      const double v = gray.at(x, y);
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      const double r = std::hypot(dx, dy);

      const int bin = static_cast<int>(r / r_max * bins);
      if (bin < bins) {
        bin_sum[static_cast<std::size_t>(bin)] += v;
        ++bin_n[static_cast<std::size_t>(bin)];
      }
      if (r <= center_r) {
        center_sum += v;
        ++center_n;
      }
      if (r > outer_r) {
        outer_sum += v;
        ++outer_n;
      }

      const bool top = 2 * y < gray.height;
      const bool left = 2 * x < gray.width;
      (top ? top_sum : bottom_sum) += v;
      ++(top ? top_n : bottom_n);
      (left ? left_sum : right_sum) += v;
      ++(left ? left_n : right_n);
      const int q = (top ? 0 : 2) + (left ? 0 : 1);
      quad_sum[q] += v;
      ++quad_n[q];
    }
  }

  // Least-squares slope of bin mean vs. bin index over non-empty bins.
  std::vector<double> bin_means;
  std::vector<double> bin_idx;
  for (int b = 0; b < bins; ++b) {
    if (bin_n[static_cast<std::size_t>(b)] == 0) continue;
    bin_means.push_back(bin_sum[static_cast<std::size_t>(b)] /
                        static_cast<double>(bin_n[static_cast<std::size_t>(b)]));
    bin_idx.push_back(static_cast<double>(b));
  }
  if (bin_means.size() >= 2) {
    const double mean_i = mean_of(bin_idx);
    const double mean_m = mean_of(bin_means);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < bin_means.size(); ++k) {
      num += (bin_idx[k] - mean_i) * (bin_means[k] - mean_m);
      den += (bin_idx[k] - mean_i) * (bin_idx[k] - mean_i);
    }
    if (den > 0.0) out.radial_slope_mean = num / den;
    out.radial_profile_var = population_variance(bin_means, mean_m);
  }

  out.center_mean = center_n ? center_sum / static_cast<double>(center_n) : 0.0;
  out.outer_ring_mean = outer_n ? outer_sum / static_cast<double>(outer_n) : 0.0;
  out.center_minus_outer = out.center_mean - out.outer_ring_mean;

  const double top_mean = top_n ? top_sum / static_cast<double>(top_n) : 0.0;
  const double bottom_mean = bottom_n ? bottom_sum / static_cast<double>(bottom_n) : 0.0;
  const double left_mean = left_n ? left_sum / static_cast<double>(left_n) : 0.0;
  const double right_mean = right_n ? right_sum / static_cast<double>(right_n) : 0.0;
  out.hemisphere_asymmetry_tb =
      std::fabs(top_mean - bottom_mean) / (top_mean + bottom_mean + 1e-6);
  out.hemisphere_asymmetry_lr =
      std::fabs(left_mean - right_mean) / (left_mean + right_mean + 1e-6);

  double quad_means[4];
  for (int q = 0; q < 4; ++q)
    quad_means[q] = quad_n[q] ? quad_sum[q] / static_cast<double>(quad_n[q]) : 0.0;
  out.quadrant_mean_var = population_variance({quad_means, 4}, mean_of({quad_means, 4}));
  return out;
}

GlobalFeatures global_features(const RasterImage& img, const GrayImage& gray,
                               const FeatureConfig& cfg) {
  GlobalFeatures out;
  const std::size_t n = img.pixel_count();
  if (n == 0) return out;

  if (img.channels == 3) {
    std::size_t colorful = 0;
    const std::uint8_t* p = img.pixels.data();
    for (std::size_t i = 0; i < n; ++i, p += 3) {
      const int mx = std::max({p[0], p[1], p[2]});
      const int mn = std::min({p[0], p[1], p[2]});
      if (mx - mn > cfg.rgb_spread_threshold) ++colorful;
    }
    out.is_rgb = static_cast<double>(colorful) >=
                         cfg.rgb_min_fraction * static_cast<double>(n)
                     ? 1.0
                     : 0.0;
  }

  std::size_t black = 0;
  for (const double v : gray.values)
    if (v < cfg.black_pixel_threshold) ++black;
  out.black_pixel_ratio = static_cast<double>(black) / static_cast<double>(n);

  const int pw = std::max(1, static_cast<int>(cfg.corner_patch_fraction * img.width));
  const int ph = std::max(1, static_cast<int>(cfg.corner_patch_fraction * img.height));
  const int x0[4] = {0, img.width - pw, 0, img.width - pw};
  const int y0[4] = {0, 0, img.height - ph, img.height - ph};
  bool all_dark = true;
  for (int c = 0; c < 4; ++c) {
    double s = 0.0;
    for (int y = y0[c]; y < y0[c] + ph; ++y)
      for (int x = x0[c]; x < x0[c] + pw; ++x) s += gray.at(x, y);
    if (s / (static_cast<double>(pw) * ph) >= cfg.corner_dark_threshold) {
      all_dark = false;
      break;
    }
  }
  out.all_corners_dark_flag = all_dark ? 1.0 : 0.0;
  out.aspect_ratio = static_cast<double>(img.width) / static_cast<double>(img.height);
  return out;
}

FeatureVector extract_feature_vector(const RasterImage& img, int factor,
                                     const FeatureConfig& cfg) {
  const RasterImage scaled = downsample(img, factor);
  const GrayImage gray = to_grayscale(scaled);
  std::optional<HsvImage> hsv;
  if (scaled.channels == 3) hsv = to_hsv(scaled);

  const IntensityFeatures intensity = intensity_background_features(gray, cfg);
  const ColorFeatures color = color_features(hsv, gray);
  const GlcmFeatures glcm = glcm_features(compute_glcm(gray));
  const LbpFeatures lbp = lbp_features(compute_lbp(gray));
  const SpatialFeatures spatial = spatial_features(gray, cfg);
  const ShapeFeatures shape = shape_features(extract_mask(gray, cfg));
  const GlobalFeatures global = global_features(scaled, gray, cfg);

  FeatureVector v;
  v[F_GRAY_MIN] = intensity.gray_min;
  v[F_GRAY_MAX] = intensity.gray_max;
  v[F_GRAY_MEAN] = intensity.gray_mean;
  v[F_GRAY_VAR] = intensity.gray_var;
  v[F_GRAY_P05] = intensity.gray_p05;
  v[F_GRAY_P95] = intensity.gray_p95;
  v[F_BACKGROUND_DARK_FLAG] = intensity.background_dark_flag;
  v[F_HUE_MEAN] = color.hue_mean;
  v[F_HUE_VAR] = color.hue_var;
  v[F_SAT_MEAN] = color.sat_mean;
  v[F_SAT_VAR] = color.sat_var;
  v[F_VAL_MEAN] = color.val_mean;
  v[F_VAL_VAR] = color.val_var;
  v[F_GLCM_CONTRAST] = glcm.contrast;
  v[F_GLCM_HOMOGENEITY] = glcm.homogeneity;
  v[F_GLCM_ENERGY] = glcm.energy;
  v[F_GLCM_CORRELATION] = glcm.correlation;
  v[F_LBP_MEAN] = lbp.mean;
  v[F_LBP_VAR] = lbp.variance;
  v[F_RADIAL_SLOPE_MEAN] = spatial.radial_slope_mean;
  v[F_RADIAL_PROFILE_VAR] = spatial.radial_profile_var;
  v[F_CENTER_MEAN] = spatial.center_mean;
  v[F_OUTER_RING_MEAN] = spatial.outer_ring_mean;
  v[F_CENTER_MINUS_OUTER] = spatial.center_minus_outer;
  v[F_HEMISPHERE_ASYMMETRY_TB] = spatial.hemisphere_asymmetry_tb;
  v[F_HEMISPHERE_ASYMMETRY_LR] = spatial.hemisphere_asymmetry_lr;
  v[F_QUADRANT_MEAN_VAR] = spatial.quadrant_mean_var;
  v[F_CIRCULARITY] = shape.circularity;
  v[F_ECCENTRICITY] = shape.eccentricity;
  v[F_SOLIDITY] = shape.solidity;
  v[F_EXTENT] = shape.extent;
  v[F_CIRCLE_RESIDUAL_MEAN] = shape.circle_residual_mean;
  v[F_CIRCLE_RESIDUAL_MAX] = shape.circle_residual_max;
  v[F_MASK_AREA_RATIO] = shape.mask_area_ratio;
  v[F_BOUNDARY_SMOOTHNESS] = shape.boundary_smoothness;
  v[F_IS_RGB] = global.is_rgb;
  v[F_BLACK_PIXEL_RATIO] = global.black_pixel_ratio;
  v[F_ALL_CORNERS_DARK_FLAG] = global.all_corners_dark_flag;
  v[F_ASPECT_RATIO] = global.aspect_ratio;

  // The classifier must never see missing values.
  for (double& x : v.values)
    if (!std::isfinite(x)) x = 0.0;
  return v;
}

void write_features_csv(std::ostream& out,
                        const std::vector<std::string>& paths,
                        const std::vector<int>& labels,
                        const std::vector<FeatureVector>& features) {
  out << "path,label";
  for (const auto& name : feature_names()) out << ',' << name;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < features.size(); ++i) {
    out << paths[i] << ',' << labels[i];
    for (const double v : features[i].values) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace oodgate
