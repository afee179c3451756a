#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oodgate/error.hpp"
#include "oodgate/features.hpp"

namespace oodgate {
namespace {

// Otsu's threshold over a 256-bin histogram. Returns the bin index t that
// maximizes between-class variance; foreground is every pixel whose bin
// index exceeds t. Ties take the lowest t.
int otsu_threshold(const GrayImage& gray) {
  std::array<std::int64_t, 256> hist{};
  for (const double v : gray.values) {
    int bin = static_cast<int>(v);
    if (bin < 0) bin = 0;
    if (bin > 255) bin = 255;
    ++hist[static_cast<std::size_t>(bin)];
  }
  const double total = static_cast<double>(gray.values.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * static_cast<double>(hist[static_cast<std::size_t>(i)]);

  double w_bg = 0.0, sum_bg = 0.0, best = -1.0;
  int threshold = 0;
  for (int t = 0; t < 256; ++t) {
    w_bg += static_cast<double>(hist[static_cast<std::size_t>(t)]);
    if (w_bg == 0.0) continue;
    const double w_fg = total - w_bg;
    if (w_fg == 0.0) break;
    sum_bg += static_cast<double>(t) * static_cast<double>(hist[static_cast<std::size_t>(t)]);
    const double mean_bg = sum_bg / w_bg;
    const double mean_fg = (sum_all - sum_bg) / w_fg;
    const double between = w_bg * w_fg * (mean_bg - mean_fg) * (mean_bg - mean_fg);
    if (between > best) {
      best = between;
      threshold = t;
    }
  }
  return threshold;
}

// Largest 4-connected component of `fg`, via iterative flood fill.
// Returns its label map slot in `out` and its area (0 when no foreground).
std::int64_t keep_largest_component(const std::vector<std::uint8_t>& fg,
                                    int width, int height,
                                    std::vector<std::uint8_t>& out) {
  const std::size_t n = fg.size();
  std::vector<std::int32_t> label(n, 0);
  std::vector<std::size_t> stack;
  std::int32_t next_label = 0;
  std::int32_t best_label = 0;
  std::int64_t best_area = 0;

  for (std::size_t start = 0; start < n; ++start) {
    if (!fg[start] || label[start] != 0) continue;
    ++next_label;
    std::int64_t area = 0;
    stack.clear();
    stack.push_back(start);
    label[start] = next_label;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++area;
      const int x = static_cast<int>(i % static_cast<std::size_t>(width));
      const int y = static_cast<int>(i / static_cast<std::size_t>(width));
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= width || ny[k] < 0 || ny[k] >= height) continue;
        const std::size_t j =
            static_cast<std::size_t>(ny[k]) * static_cast<std::size_t>(width) + static_cast<std::size_t>(nx[k]);
        if (fg[j] && label[j] == 0) {
          label[j] = next_label;
          stack.push_back(j);
        }
      }
    }
    if (area > best_area) {
      best_area = area;
      best_label = next_label;
    }
  }

  out.assign(n, 0);
  if (best_area > 0)
    for (std::size_t i = 0; i < n; ++i) out[i] = label[i] == best_label ? 1 : 0;
  return best_area;
}

// Fills background regions not reachable from the image border (4-connected).
std::int64_t fill_holes(std::vector<std::uint8_t>& mask, int width, int height) {
  const std::size_t n = mask.size();
  std::vector<std::uint8_t> outside(n, 0);
  std::vector<std::size_t> stack;
  auto push = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    if (!mask[i] && !outside[i]) {
      outside[i] = 1;
      stack.push_back(i);
    }
  };
  for (int x = 0; x < width; ++x) {
    push(x, 0);
    push(x, height - 1);
  }
  for (int y = 0; y < height; ++y) {
    push(0, y);
    push(width - 1, y);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % static_cast<std::size_t>(width));
    const int y = static_cast<int>(i / static_cast<std::size_t>(width));
    if (x > 0) push(x - 1, y);
    if (x + 1 < width) push(x + 1, y);
    if (y > 0) push(x, y - 1);
    if (y + 1 < height) push(x, y + 1);
  }
  std::int64_t area = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i] && !outside[i]) mask[i] = 1;  // enclosed hole
    area += mask[i];
  }
  return area;
}

bool mask_at(const BinaryMask& m, int x, int y) {
  if (x < 0 || x >= m.width || y < 0 || y >= m.height) return false;
  return m.at(x, y);
}

// Weighted border-pixel perimeter (the skimage estimator): border pixels are
// classified by how many straight and diagonal border neighbors they have,
// and contribute 1, sqrt(2) or (1+sqrt(2))/2 accordingly. Calibrated so a
// digital disc scores within a few percent of 2*pi*r while an axis-aligned
// square keeps P = 4(s-1).
double border_perimeter(const BinaryMask& m,
                        const std::vector<std::size_t>& border,
                        const std::vector<std::uint8_t>& is_border) {
  const double sqrt2 = std::numbers::sqrt2;
  std::array<double, 50> weights{};
  weights[5] = weights[7] = weights[15] = weights[17] = weights[25] = weights[27] = 1.0;
  weights[21] = weights[33] = sqrt2;
  weights[13] = weights[23] = (1.0 + sqrt2) / 2.0;

  auto border_at = [&](int x, int y) -> bool {
    if (x < 0 || x >= m.width || y < 0 || y >= m.height) return false;
    return is_border[static_cast<std::size_t>(y) * static_cast<std::size_t>(m.width) + static_cast<std::size_t>(x)] != 0;
  };

  double total = 0.0;
  for (const std::size_t i : border) {
    const int x = static_cast<int>(i % static_cast<std::size_t>(m.width));
    const int y = static_cast<int>(i / static_cast<std::size_t>(m.width));
    int straight = 0, diagonal = 0;
    straight += border_at(x - 1, y);
    straight += border_at(x + 1, y);
    straight += border_at(x, y - 1);
    straight += border_at(x, y + 1);
    diagonal += border_at(x - 1, y - 1);
    diagonal += border_at(x + 1, y - 1);
    diagonal += border_at(x - 1, y + 1);
    diagonal += border_at(x + 1, y + 1);
    const int code = 1 + 2 * straight + 10 * diagonal;
    if (code < static_cast<int>(weights.size())) total += weights[static_cast<std::size_t>(code)];
  }
  return total;
}

// Monotone-chain convex hull; returns vertices in counter-clockwise order.
std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2& a, const Point2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Point2>& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return std::fabs(a) / 2.0;
}

double polygon_perimeter(const std::vector<Point2>& poly) {
  double p = 0.0;
  const std::size_t n = poly.size();
  if (n < 2) return 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    p += std::hypot(b.x - a.x, b.y - a.y);
  }
  if (n == 2) p /= 2.0;  // degenerate two-point "hull": single segment
  return p;
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

BinaryMask extract_mask(const GrayImage& gray, const FeatureConfig& cfg) {
  BinaryMask mask;
  mask.width = gray.width;
  mask.height = gray.height;
  const std::size_t n = gray.values.size();
  mask.bits.assign(n, 0);
  if (n == 0) return mask;

  const int t = otsu_threshold(gray);
  std::vector<std::uint8_t> fg(n, 0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    int bin = static_cast<int>(gray.values[i]);
    if (bin > 255) bin = 255;
    if (bin > t) {
      fg[i] = 1;
      any = true;
    }
  }
  if (!any) return mask;

  std::vector<std::uint8_t> largest;
  std::int64_t area = keep_largest_component(fg, gray.width, gray.height, largest);
  if (area == 0) return mask;
  area = fill_holes(largest, gray.width, gray.height);

  if (static_cast<double>(area) <
      cfg.mask_min_area_fraction * static_cast<double>(n))
    return mask;  // too small to be a field of view; report empty

  mask.bits = std::move(largest);
  mask.area = area;
  return mask;
}

CircleFit fit_circle(std::span<const Point2> points) {
  require(points.size() >= 3, errc::degenerate_points,
          "circle fit needs at least 3 points");
  const double n = static_cast<double>(points.size());

  // Center and scale-normalize for conditioning; the degeneracy test below
  // is on the normalized, averaged normal matrix.
  double cx = 0.0, cy = 0.0;
  for (const Point2& p : points) {
    cx += p.x;
    cy += p.y;
  }
  cx /= n;
  cy /= n;
  double scale2 = 0.0;
  for (const Point2& p : points) {
    const double dx = p.x - cx, dy = p.y - cy;
    scale2 += dx * dx + dy * dy;
  }
  scale2 /= n;
  const double scale = std::sqrt(scale2);
  if (!(scale > 0.0))
    fail(errc::degenerate_points, "all points coincide");

  double suu = 0, suv = 0, svv = 0, su = 0, sv = 0;
  double suq = 0, svq = 0, sq = 0;
  for (const Point2& p : points) {
    const double u = (p.x - cx) / scale;
    const double v = (p.y - cy) / scale;
    const double q = u * u + v * v;
    suu += u * u;
    suv += u * v;
    svv += v * v;
    su += u;
    sv += v;
    suq += u * q;
    svq += v * q;
    sq += q;
  }
  // Averaged normal matrix of min ||q + D u + E v + F||^2.
  const double a11 = suu / n, a12 = suv / n, a13 = su / n;
  const double a22 = svv / n, a23 = sv / n, a33 = 1.0;
  const double b1 = -suq / n, b2 = -svq / n, b3 = -sq / n;

  const double det = a11 * (a22 * a33 - a23 * a23) -
                     a12 * (a12 * a33 - a23 * a13) +
                     a13 * (a12 * a23 - a22 * a13);
  require(std::fabs(det) >= 1e-9, errc::degenerate_points,
          "points are collinear within tolerance");

  const double d1 = b1 * (a22 * a33 - a23 * a23) -
                    a12 * (b2 * a33 - a23 * b3) +
                    a13 * (b2 * a23 - a22 * b3);
  const double d2 = a11 * (b2 * a33 - b3 * a23) -
                    b1 * (a12 * a33 - a23 * a13) +
                    a13 * (a12 * b3 - b2 * a13);
  const double d3 = a11 * (a22 * b3 - a23 * b2) -
                    a12 * (a12 * b3 - a23 * b1) +
                    b1 * (a12 * a23 - a22 * a13);
  const double D = d1 / det, E = d2 / det, F = d3 / det;

  const double ux = -D / 2.0, uy = -E / 2.0;
  const double r2 = std::max(0.0, ux * ux + uy * uy - F);

  CircleFit fit;
  fit.center_x = cx + scale * ux;
  fit.center_y = cy + scale * uy;
  fit.radius = scale * std::sqrt(r2);

  double sum = 0.0, mx = 0.0;
  for (const Point2& p : points) {
    const double d = std::fabs(std::hypot(p.x - fit.center_x, p.y - fit.center_y) - fit.radius);
    sum += d;
    mx = std::max(mx, d);
  }
  fit.residual_mean = sum / n;
  fit.residual_max = mx;
  return fit;
}

ShapeFeatures shape_features(const BinaryMask& mask) {
  ShapeFeatures out;
  if (mask.empty()) return out;

  const double area = static_cast<double>(mask.area);

  // Border pixels (4-connectivity against background or the image edge),
  // bounding box and centroid in one sweep.
  std::vector<std::size_t> border;
  std::vector<std::uint8_t> is_border(mask.bits.size(), 0);
  int min_x = mask.width, max_x = -1, min_y = mask.height, max_y = -1;
  double sum_x = 0.0, sum_y = 0.0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
      sum_x += x + 0.5;
      sum_y += y + 0.5;
      if (!mask_at(mask, x - 1, y) || !mask_at(mask, x + 1, y) ||
          !mask_at(mask, x, y - 1) || !mask_at(mask, x, y + 1)) {
        const std::size_t i =
            static_cast<std::size_t>(y) * static_cast<std::size_t>(mask.width) + static_cast<std::size_t>(x);
        border.push_back(i);
        is_border[i] = 1;
      }
    }
  }

  const double perimeter = border_perimeter(mask, border, is_border);
  if (perimeter > 0.0)
    out.circularity = 4.0 * std::numbers::pi * area / (perimeter * perimeter);

  // Eccentricity from the central second moments of the pixel centers.
  const double mean_x = sum_x / area, mean_y = sum_y / area;
  double mu20 = 0.0, mu02 = 0.0, mu11 = 0.0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      const double dx = x + 0.5 - mean_x;
      const double dy = y + 0.5 - mean_y;
      mu20 += dx * dx;
      mu02 += dy * dy;
      mu11 += dx * dy;
    }
  }
  mu20 /= area;
  mu02 /= area;
  mu11 /= area;
  const double trace_half = (mu20 + mu02) / 2.0;
  const double delta = std::sqrt(std::max(
      0.0, trace_half * trace_half - (mu20 * mu02 - mu11 * mu11)));
  const double lambda1 = trace_half + delta;
  const double lambda2 = trace_half - delta;
  if (lambda1 > 0.0)
    out.eccentricity = std::sqrt(std::max(0.0, 1.0 - lambda2 / lambda1));

  // Solidity against the hull of the border-pixel corners (the corner hull
  // always contains the pixel squares, so the ratio stays in [0, 1]).
  std::vector<Point2> corners;
  corners.reserve(border.size() * 4);
  std::vector<Point2> centers;
  centers.reserve(border.size());
  for (const std::size_t i : border) {
    const double x = static_cast<double>(i % static_cast<std::size_t>(mask.width));
    const double y = static_cast<double>(i / static_cast<std::size_t>(mask.width));
    corners.push_back({x, y});
    corners.push_back({x + 1.0, y});
    corners.push_back({x, y + 1.0});
    corners.push_back({x + 1.0, y + 1.0});
    centers.push_back({x + 0.5, y + 0.5});
  }
  const auto corner_hull = convex_hull(std::move(corners));
  const double hull_area = polygon_area(corner_hull);
  if (hull_area > 0.0) out.solidity = clamp_unit(area / hull_area);

  const double bbox_area = static_cast<double>(max_x - min_x + 1) *
                           static_cast<double>(max_y - min_y + 1);
  out.extent = clamp_unit(area / bbox_area);

  // Circle residuals, normalized by the fitted radius.
  try {
    const CircleFit fit = fit_circle(centers);
    if (fit.radius > 0.0) {
      out.circle_residual_mean = fit.residual_mean / fit.radius;
      out.circle_residual_max = fit.residual_max / fit.radius;
    }
  } catch (const Error& e) {
    if (e.code() != errc::degenerate_points) throw;
    // degenerate boundary: residuals stay 0
  }

  out.mask_area_ratio =
      clamp_unit(area / (static_cast<double>(mask.width) * mask.height));

  // Hull perimeter over border-pixel centers; ratios above 1 can only come
  // from discretization of near-convex shapes, so clamp.
  const auto center_hull = convex_hull(std::move(centers));
  if (perimeter > 0.0)
    out.boundary_smoothness = clamp_unit(polygon_perimeter(center_hull) / perimeter);

  return out;
}

}  // namespace oodgate
