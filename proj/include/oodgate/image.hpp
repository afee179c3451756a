#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace oodgate {

// Decoded 8-bit pixel grid, row-major, channel-interleaved.
// channels is 1 (gray) or 3 (RGB); alpha is dropped at decode time.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

// Luminance plane kept real-valued so later statistics see no second
// quantization.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // each in [0, 255]

  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Hue in degrees [0, 360); saturation and value as fractions in [0, 1].
struct HsvImage {
  int width = 0;
  int height = 0;
  std::vector<double> hue;
  std::vector<double> sat;
  std::vector<double> val;
};

// Project-wide 8-bit rounding rule: round half up.
inline std::uint8_t quantize8(double v) {
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v + 0.5));
}

// Decoding. Accepts PNG, JPEG, and binary PPM (P6) / PGM (P5).
// Errors: UnsupportedFormat, CorruptStream, ZeroDimension.
RasterImage decode_image(std::span<const std::uint8_t> bytes);
RasterImage load_image(const std::string& path);  // read file + decode

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

// Encoders (corpus generation and tests).
std::vector<std::uint8_t> encode_png(const RasterImage& img);
std::vector<std::uint8_t> encode_pnm(const RasterImage& img);  // P6 / P5
void write_png(const RasterImage& img, const std::string& path);

// Y = 0.299 R + 0.587 G + 0.114 B; single-channel input passes through.
GrayImage to_grayscale(const RasterImage& img);

// Standard hexcone RGB -> HSV. Errors: NotColor for channels != 3.
HsvImage to_hsv(const RasterImage& img);

// Inverse conversion, 8-bit output (round half up). Test/round-trip helper.
RasterImage hsv_to_rgb(const HsvImage& img);

// Box-filter downsampling by factor in {1, 2, 4, 8}; each output pixel is the
// rounded mean of its factor x factor block. factor 1 returns a copy.
// Errors: TooSmall when either dimension < factor.
RasterImage downsample(const RasterImage& img, int factor);

inline constexpr int kDownsampleFactors[4] = {1, 2, 4, 8};
bool is_valid_factor(int factor);

}  // namespace oodgate
