#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "oodgate/error.hpp"
#include "oodgate/image.hpp"

namespace oodgate {
namespace {

// ---------------------------------------------------------------- PNG

struct PngReadCtx {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
  if (ctx->pos + n > ctx->size) png_error(png, "truncated stream");
  std::memcpy(out, ctx->data + ctx->pos, n);
  ctx->pos += n;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_cb(png_structp) {}

void png_error_cb(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void png_warning_cb(png_structp, png_const_charp) {}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_cb, png_warning_cb);
  if (!png) fail(errc::io_failure, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(errc::io_failure, "png_create_info_struct failed");
  }

  PngReadCtx ctx{bytes.data(), bytes.size(), 0};
  RasterImage out;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(errc::corrupt_stream, "invalid or truncated PNG stream");
  }

  png_set_read_fn(png, &ctx, png_read_cb);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  // Normalize everything to 8-bit gray or RGB; alpha is dropped.
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(errc::corrupt_stream, "unexpected PNG channel layout");
  }

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.pixels.resize(static_cast<std::size_t>(width) * height * channels);
  rows.resize(height);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (png_uint_32 y = 0; y < height; ++y)
    rows[y] = out.pixels.data() + y * stride;

  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

// ---------------------------------------------------------------- JPEG

struct JpegErrorMgr {
  jpeg_error_mgr mgr;
  std::jmp_buf env;
};

void jpeg_error_exit_cb(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->env, 1);
}

void jpeg_output_message_cb(j_common_ptr) {}

RasterImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.mgr);
  jerr.mgr.error_exit = jpeg_error_exit_cb;
  jerr.mgr.output_message = jpeg_output_message_cb;

  RasterImage out;

  if (setjmp(jerr.env)) {
    jpeg_destroy_decompress(&cinfo);
    fail(errc::corrupt_stream, "invalid or truncated JPEG stream");
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space =
      cinfo.jpeg_color_space == JCS_GRAYSCALE ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int channels = cinfo.output_components;
  if (channels != 1 && channels != 3) {
    jpeg_destroy_decompress(&cinfo);
    fail(errc::corrupt_stream, "unsupported JPEG color layout");
  }

  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = channels;
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height * channels);
  const std::size_t stride = static_cast<std::size_t>(out.width) * channels;
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.pixels.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

// ---------------------------------------------------------------- PNM

// Reads the next header token, skipping whitespace and '#' comments.
bool pnm_token(std::span<const std::uint8_t> bytes, std::size_t& pos,
               std::string& token) {
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  token.clear();
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
    token.push_back(c);
    ++pos;
  }
  return !token.empty();
}

long pnm_number(std::span<const std::uint8_t> bytes, std::size_t& pos,
                const char* what) {
  std::string tok;
  if (!pnm_token(bytes, pos, tok))
    fail(errc::corrupt_stream, std::string("PNM header missing ") + what);
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (!end || *end != '\0' || v < 0)
    fail(errc::corrupt_stream, std::string("bad PNM ") + what + ": " + tok);
  return v;
}

RasterImage decode_pnm(std::span<const std::uint8_t> bytes) {
  const int channels = bytes[1] == '6' ? 3 : 1;
  std::size_t pos = 2;
  const long width = pnm_number(bytes, pos, "width");
  const long height = pnm_number(bytes, pos, "height");
  const long maxval = pnm_number(bytes, pos, "maxval");
  if (width == 0 || height == 0)
    fail(errc::zero_dimension, "PNM with zero width or height");
  if (maxval < 1 || maxval > 255)
    fail(errc::corrupt_stream, "PNM maxval out of 8-bit range");
  if (pos >= bytes.size())
    fail(errc::corrupt_stream, "PNM header not followed by payload");
  ++pos;  // single whitespace byte after maxval

  RasterImage out;
  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  const std::size_t need =
      static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos < need)
    fail(errc::corrupt_stream, "truncated PNM payload");
  out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return out;
}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  static const std::uint8_t png_sig[4] = {0x89, 'P', 'N', 'G'};
  RasterImage out;
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), png_sig, 4) == 0) {
    out = decode_png(bytes);
  } else if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 &&
             bytes[2] == 0xFF) {
    out = decode_jpeg(bytes);
  } else if (bytes.size() >= 2 && bytes[0] == 'P' &&
             (bytes[1] == '5' || bytes[1] == '6')) {
    out = decode_pnm(bytes);
  } else {
    fail(errc::unsupported_format, "unrecognized image magic bytes");
  }
  if (out.width <= 0 || out.height <= 0)
    fail(errc::zero_dimension, "decoded image has zero dimension");
  return out;
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  require(img.channels == 1 || img.channels == 3, errc::corrupt_stream,
          "encode_png expects 1 or 3 channels");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_cb, png_warning_cb);
  if (!png) fail(errc::io_failure, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(errc::io_failure, "png_create_info_struct failed");
  }

  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(errc::io_failure, "PNG encoding failed");
  }

  png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  rows.resize(static_cast<std::size_t>(img.height));
  const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y)
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(img.pixels.data() + y * stride);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const RasterImage& img, const std::string& path) {
  write_file(path, encode_png(img));
}

std::vector<std::uint8_t> encode_pnm(const RasterImage& img) {
  require(img.channels == 1 || img.channels == 3, errc::corrupt_stream,
          "encode_pnm expects 1 or 3 channels");
  char header[64];
  const int n = std::snprintf(header, sizeof(header), "P%c\n%d %d\n255\n",
                              img.channels == 3 ? '6' : '5', img.width,
                              img.height);
  std::vector<std::uint8_t> out(header, header + n);
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

}  // namespace oodgate
