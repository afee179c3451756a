#include "oodgate/image.hpp"

#include <algorithm>
#include <fstream>

#include "oodgate/error.hpp"

namespace oodgate {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::missing_file, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) fail(errc::io_failure, "read failed for " + path);
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_failure, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(errc::io_failure, "write failed for " + path);
}

RasterImage load_image(const std::string& path) {
  const auto bytes = read_file(path);
  return decode_image(bytes);
}

bool is_valid_factor(int factor) {
  return factor == 1 || factor == 2 || factor == 4 || factor == 8;
}

GrayImage to_grayscale(const RasterImage& img) {
  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.values.resize(img.pixel_count());
  const std::size_t n = img.pixel_count();
  if (img.channels == 1) {
    for (std::size_t i = 0; i < n; ++i) out.values[i] = img.pixels[i];
  } else {
    const std::uint8_t* p = img.pixels.data();
    for (std::size_t i = 0; i < n; ++i, p += 3) {
      out.values[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  }
  return out;
}

HsvImage to_hsv(const RasterImage& img) {
  require(img.channels == 3, errc::not_color, "HSV conversion needs 3 channels");
  HsvImage out;
  out.width = img.width;
  out.height = img.height;
  const std::size_t n = img.pixel_count();
  out.hue.resize(n);
  out.sat.resize(n);
  out.val.resize(n);
  const std::uint8_t* p = img.pixels.data();
  for (std::size_t i = 0; i < n; ++i, p += 3) {
    const int r = p[0], g = p[1], b = p[2];
    const int mx = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    const int d = mx - mn;
    out.val[i] = mx / 255.0;
    out.sat[i] = mx == 0 ? 0.0 : static_cast<double>(d) / mx;
    double h = 0.0;
    if (d != 0) {
      if (mx == r) {
        h = 60.0 * (g - b) / d;
      } else if (mx == g) {
        h = 60.0 * (b - r) / d + 120.0;
      } else {
        h = 60.0 * (r - g) / d + 240.0;
      }
      if (h < 0.0) h += 360.0;
      if (h >= 360.0) h -= 360.0;
    }
    out.hue[i] = h;
  }
  return out;
}

RasterImage hsv_to_rgb(const HsvImage& img) {
  RasterImage out;
  out.width = img.width;
  out.height = img.height;
  out.channels = 3;
  out.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  for (std::size_t i = 0; i < img.hue.size(); ++i) {
    const double h = img.hue[i];
    const double s = img.sat[i];
    const double v = img.val[i] * 255.0;
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)       { r = c; g = x; }
    else if (hp < 2)  { r = x; g = c; }
    else if (hp < 3)  { g = c; b = x; }
    else if (hp < 4)  { g = x; b = c; }
    else if (hp < 5)  { r = x; b = c; }
    else              { r = c; b = x; }
    const double m = v - c;
    out.pixels[i * 3 + 0] = quantize8(r + m);
    out.pixels[i * 3 + 1] = quantize8(g + m);
    out.pixels[i * 3 + 2] = quantize8(b + m);
  }
  return out;
}

RasterImage downsample(const RasterImage& img, int factor) {
  require(is_valid_factor(factor), errc::too_small,
          "downsample factor must be one of 1, 2, 4, 8");
  if (factor == 1) return img;
  require(img.width >= factor && img.height >= factor, errc::too_small,
          "image smaller than downsample factor");

  RasterImage out;
  out.width = img.width / factor;
  out.height = img.height / factor;
  out.channels = img.channels;
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);

  const unsigned block = static_cast<unsigned>(factor) * static_cast<unsigned>(factor);
  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      for (int c = 0; c < out.channels; ++c) {
        unsigned sum = 0;
        for (int dy = 0; dy < factor; ++dy) {
          const std::uint8_t* row =
              img.pixels.data() +
              (static_cast<std::size_t>(oy * factor + dy) * img.width +
               static_cast<std::size_t>(ox) * factor) * img.channels + c;
          for (int dx = 0; dx < factor; ++dx) sum += row[dx * img.channels];
        }
        // integer round-half-up of sum / block
        out.at(ox, oy, c) = static_cast<std::uint8_t>((2 * sum + block) / (2 * block));
      }
    }
  }
  return out;
}

}  // namespace oodgate
