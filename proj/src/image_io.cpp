#include "spmamba/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace spm {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png_gray8(const std::string& path, const GrayImage& img) {
  require(img.height > 0 && img.width > 0, "write-image", "empty image for " + path);
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("write-image: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("write-image: libpng init failed for " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("write-image: libpng info init failed for " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("write-image: libpng failure while writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<size_t>(img.width));
  for (int64_t r = 0; r < img.height; ++r) {
    for (int64_t c = 0; c < img.width; ++c) {
      float v = img.at(r, c);
      if (v < 0.0f) v = 0.0f;
      if (v > 1.0f) v = 1.0f;
      row[static_cast<size_t>(c)] = static_cast<png_byte>(std::lround(v * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage read_png_gray8(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("read-image: cannot open " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError("read-image: not a PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("read-image: libpng init failed for " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("read-image: libpng info init failed for " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("read-image: corrupt PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);

  // normalize everything to 8-bit gray
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (depth == 16) png_set_strip_16(png);
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);

  GrayImage img = GrayImage::zeros(static_cast<int64_t>(h), static_cast<int64_t>(w));
  std::vector<png_byte> row(static_cast<size_t>(png_get_rowbytes(png, info)));
  for (png_uint_32 r = 0; r < h; ++r) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 c = 0; c < w; ++c)
      img.at(static_cast<int64_t>(r), static_cast<int64_t>(c)) =
          static_cast<float>(row[c]) / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

GrayImage resize_bilinear(const GrayImage& img, int64_t h, int64_t w) {
  require(h >= 1 && w >= 1, "resize", "target size must be positive");
  if (h == img.height && w == img.width) return img;
  GrayImage out = GrayImage::zeros(h, w);
  const double sy = static_cast<double>(img.height) / static_cast<double>(h);
  const double sx = static_cast<double>(img.width) / static_cast<double>(w);
  for (int64_t r = 0; r < h; ++r) {
    double fy = (static_cast<double>(r) + 0.5) * sy - 0.5;
    if (fy < 0) fy = 0;
    if (fy > static_cast<double>(img.height - 1)) fy = static_cast<double>(img.height - 1);
    const int64_t y0 = std::min<int64_t>(static_cast<int64_t>(fy), img.height - 1);
    const int64_t y1 = std::min<int64_t>(y0 + 1, img.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (int64_t c = 0; c < w; ++c) {
      double fx = (static_cast<double>(c) + 0.5) * sx - 0.5;
      if (fx < 0) fx = 0;
      if (fx > static_cast<double>(img.width - 1)) fx = static_cast<double>(img.width - 1);
      const int64_t x0 = std::min<int64_t>(static_cast<int64_t>(fx), img.width - 1);
      const int64_t x1 = std::min<int64_t>(x0 + 1, img.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double v = (1 - wy) * ((1 - wx) * img.at(y0, x0) + wx * img.at(y0, x1)) +
                       wy * ((1 - wx) * img.at(y1, x0) + wx * img.at(y1, x1));
      out.at(r, c) = static_cast<float>(v);
    }
  }
  return out;
}

GrayImage read_image(const std::string& path, int64_t target_size) {
  GrayImage img = read_png_gray8(path);
  if (target_size > 0 && (img.height != target_size || img.width != target_size))
    img = resize_bilinear(img, target_size, target_size);
  return img;
}

}  // namespace spm
