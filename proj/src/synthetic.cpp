#include "oodgate/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "oodgate/error.hpp"
#include "oodgate/manifest.hpp"
#include "oodgate/rng.hpp"

namespace fs = std::filesystem;

namespace oodgate {
namespace {

// Float RGB canvas in [0, 255]; quantized once at the end.
struct Canvas {
  int size;
  std::vector<double> r, g, b;

  explicit Canvas(int s)
      : size(s),
        r(static_cast<std::size_t>(s) * s, 0.0),
        g(static_cast<std::size_t>(s) * s, 0.0),
        b(static_cast<std::size_t>(s) * s, 0.0) {}

  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * size + x;
  }

  RasterImage to_rgb() const {
    RasterImage img;
    img.width = img.height = size;
    img.channels = 3;
    img.pixels.resize(r.size() * 3);
    for (std::size_t i = 0; i < r.size(); ++i) {
      img.pixels[i * 3 + 0] = quantize8(r[i]);
      img.pixels[i * 3 + 1] = quantize8(g[i]);
      img.pixels[i * 3 + 2] = quantize8(b[i]);
    }
    return img;
  }

  RasterImage to_gray() const {
    RasterImage img;
    img.width = img.height = size;
    img.channels = 1;
    img.pixels.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) img.pixels[i] = quantize8(r[i]);
    return img;
  }
};

void stamp_disc(Canvas& c, double cx, double cy, double radius, double mul_r,
                double mul_g, double mul_b) {
  const int x0 = std::max(0, static_cast<int>(cx - radius - 1));
  const int x1 = std::min(c.size - 1, static_cast<int>(cx + radius + 1));
  const int y0 = std::max(0, static_cast<int>(cy - radius - 1));
  const int y1 = std::min(c.size - 1, static_cast<int>(cy + radius + 1));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      if (d > radius) continue;
      const std::size_t i = c.idx(x, y);
      c.r[i] *= mul_r;
      c.g[i] *= mul_g;
      c.b[i] *= mul_b;
    }
  }
}

}  // namespace

RasterImage synth_fundus_image(std::uint64_t seed, int index, int size) {
  Rng rng = Rng(seed).stream(0x0Fu).stream(static_cast<std::uint64_t>(index));
  Canvas canvas(size);

  // near-black background with faint sensor noise
  for (std::size_t i = 0; i < canvas.r.size(); ++i) {
    const double n = rng.uniform_real(0.0, 6.0);
    canvas.r[i] = n;
    canvas.g[i] = n * 0.9;
    canvas.b[i] = n * 0.8;
  }

  const double cx = size * (0.5 + rng.uniform_real(-0.05, 0.05));
  const double cy = size * (0.5 + rng.uniform_real(-0.05, 0.05));
  const double radius = size * rng.uniform_real(0.35, 0.48);
  const double base_r = rng.uniform_real(185.0, 235.0);
  const double base_g = rng.uniform_real(80.0, 130.0);
  const double base_b = rng.uniform_real(25.0, 60.0);

  // field of view: vignetted disc with a one-pixel soft rim
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      if (d > radius + 1.0) continue;
      const double alpha = d <= radius - 1.0 ? 1.0 : (radius + 1.0 - d) / 2.0;
      const double rel = std::min(1.0, d / radius);
      const double vignette = 1.0 - 0.35 * rel * rel;
      const double texture = rng.normal() * 4.0;
      const std::size_t i = canvas.idx(x, y);
      canvas.r[i] = canvas.r[i] * (1.0 - alpha) +
                    alpha * std::clamp(base_r * vignette + texture, 0.0, 255.0);
      canvas.g[i] = canvas.g[i] * (1.0 - alpha) +
                    alpha * std::clamp(base_g * vignette + texture * 0.7, 0.0, 255.0);
      canvas.b[i] = canvas.b[i] * (1.0 - alpha) +
                    alpha * std::clamp(base_b * vignette + texture * 0.5, 0.0, 255.0);
    }
  }

  // optic-disc-like bright spot
  {
    const double angle = rng.uniform_real(0.0, 2.0 * std::numbers::pi);
    const double dist = rng.uniform_real(0.2, 0.45) * radius;
    stamp_disc(canvas, cx + std::cos(angle) * dist, cy + std::sin(angle) * dist,
               rng.uniform_real(0.08, 0.13) * radius, 1.18, 1.35, 1.5);
  }

  // vessel-like dark curves radiating from a nucleus, kept inside the disc
  const double nx = cx + rng.uniform_real(-0.25, 0.25) * radius;
  const double ny = cy + rng.uniform_real(-0.25, 0.25) * radius;
  const int n_vessels = 3 + static_cast<int>(rng.uniform_u32(5));
  for (int v = 0; v < n_vessels; ++v) {
    double px = nx, py = ny;
    double theta = rng.uniform_real(0.0, 2.0 * std::numbers::pi);
    double curvature = rng.uniform_real(-0.012, 0.012);
    const double length = rng.uniform_real(0.45, 0.8) * radius;
    const double width = rng.uniform_real(1.2, 2.8);
    for (double s = 0.0; s < length; s += 1.0) {
      px += std::cos(theta);
      py += std::sin(theta);
      theta += curvature + rng.normal() * 0.02;
      if (std::hypot(px - cx, py - cy) > 0.86 * radius) break;
      stamp_disc(canvas, px, py, width / 2.0 + 0.5, 0.42, 0.3, 0.35);
    }
  }

  return canvas.to_rgb();
}

RasterImage synth_nonfundus_image(std::uint64_t seed, int index, int size) {
  Rng rng = Rng(seed).stream(0xA0u).stream(static_cast<std::uint64_t>(index));
  const int kind = index % 3;
  Canvas canvas(size);

  if (kind == 0) {
    // radiograph-like: full-frame gray noise with smooth bright lobes
    const double base = rng.uniform_real(90.0, 170.0);
    struct Lobe { double x, y, amp, sigma; };
    std::vector<Lobe> lobes;
    const int n_lobes = 3 + static_cast<int>(rng.uniform_u32(4));
    for (int i = 0; i < n_lobes; ++i)
      lobes.push_back({rng.uniform_real(0.1, 0.9) * size,
                       rng.uniform_real(0.1, 0.9) * size,
                       rng.uniform_real(-45.0, 60.0),
                       rng.uniform_real(size * 0.08, size * 0.25)});
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double v = base + rng.normal() * 12.0;
        for (const Lobe& l : lobes) {
          const double dx = x - l.x, dy = y - l.y;
          v += l.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * l.sigma * l.sigma));
        }
        canvas.r[canvas.idx(x, y)] = std::clamp(v, 0.0, 255.0);
      }
    }
    return canvas.to_gray();
  }

  if (kind == 1) {
    // endoscopy-like: bright pinkish field, low-frequency waves, specular spots
    const double base_r = rng.uniform_real(175.0, 225.0);
    const double base_g = rng.uniform_real(95.0, 140.0);
    const double base_b = rng.uniform_real(85.0, 135.0);
    const double fx = rng.uniform_real(1.5, 4.0) / size;
    const double fy = rng.uniform_real(1.5, 4.0) / size;
    const double phase_x = rng.uniform_real(0.0, 2.0 * std::numbers::pi);
    const double phase_y = rng.uniform_real(0.0, 2.0 * std::numbers::pi);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double wave =
            1.0 + 0.14 * std::sin(2.0 * std::numbers::pi * fx * x + phase_x) *
                      std::sin(2.0 * std::numbers::pi * fy * y + phase_y);
        const double n = rng.normal() * 5.0;
        const std::size_t i = canvas.idx(x, y);
        canvas.r[i] = std::clamp(base_r * wave + n, 0.0, 255.0);
        canvas.g[i] = std::clamp(base_g * wave + n * 0.8, 0.0, 255.0);
        canvas.b[i] = std::clamp(base_b * wave + n * 0.8, 0.0, 255.0);
      }
    }
    const int n_spots = 2 + static_cast<int>(rng.uniform_u32(4));
    for (int s = 0; s < n_spots; ++s)
      stamp_disc(canvas, rng.uniform_real(0.15, 0.85) * size,
                 rng.uniform_real(0.15, 0.85) * size,
                 rng.uniform_real(size * 0.01, size * 0.04), 1.25, 1.35, 1.4);
    return canvas.to_rgb();
  }

  // grid: bright background with dark rectangular rulings
  const double bg = rng.uniform_real(195.0, 240.0);
  const double line = rng.uniform_real(10.0, 50.0);
  const int cell_x = 18 + static_cast<int>(rng.uniform_u32(45));
  const int cell_y = 18 + static_cast<int>(rng.uniform_u32(45));
  const int line_w = 2 + static_cast<int>(rng.uniform_u32(3));
  const int offset_x = static_cast<int>(rng.uniform_u32(static_cast<std::uint32_t>(cell_x)));
  const int offset_y = static_cast<int>(rng.uniform_u32(static_cast<std::uint32_t>(cell_y)));
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const bool on_line = ((x + offset_x) % cell_x) < line_w ||
                           ((y + offset_y) % cell_y) < line_w;
      canvas.r[canvas.idx(x, y)] =
          std::clamp((on_line ? line : bg) + rng.normal() * 4.0, 0.0, 255.0);
    }
  }
  return canvas.to_gray();
}

DatasetManifest generate_synthetic_corpus(const std::string& out_dir,
                                          const CorpusSpec& spec) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(errc::io_failure, "cannot create " + out_dir + ": " + ec.message());

  DatasetManifest manifest;
  char name[64];
  const int per_class = spec.n_internal_per_class + spec.n_external_per_class;
  for (int label = 0; label <= 1; ++label) {
    for (int i = 0; i < per_class; ++i) {
      const RasterImage img =
          label == 1 ? synth_fundus_image(spec.seed, i, spec.size)
                     : synth_nonfundus_image(spec.seed, i, spec.size);
      std::snprintf(name, sizeof(name), "%s_%05d.png",
                    label == 1 ? "fundus" : "nonfundus", i);
      const std::string path = fs::absolute(fs::path(out_dir) / name).string();
      write_png(img, path);

      ManifestEntry entry;
      entry.path = path;
      entry.label = label;
      entry.split = i < spec.n_internal_per_class ? Split::internal : Split::external;
      manifest.entries.push_back(std::move(entry));
    }
  }
  save_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
  return manifest;
}

DatasetManifest generate_synthetic_corpus(const std::string& out_dir,
                                          int n_per_class, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_internal_per_class =
      static_cast<int>(std::lround(0.7 * static_cast<double>(n_per_class)));
  spec.n_external_per_class = n_per_class - spec.n_internal_per_class;
  spec.seed = seed;
  return generate_synthetic_corpus(out_dir, spec);
}

}  // namespace oodgate
