#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spmamba/common.hpp"

namespace spm {

// Grayscale image with values in [0,1].
struct GrayImage {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<float> pixels;

  float at(int64_t r, int64_t c) const { return pixels[static_cast<size_t>(r * width + c)]; }
  float& at(int64_t r, int64_t c) { return pixels[static_cast<size_t>(r * width + c)]; }

  static GrayImage zeros(int64_t h, int64_t w) {
    GrayImage img;
    img.height = h;
    img.width = w;
    img.pixels.assign(static_cast<size_t>(h * w), 0.0f);
    return img;
  }
};

// 8-bit grayscale PNG IO. Writing quantizes with round-to-nearest, so a
// write/read round trip is within 1/255 and quantized values are lossless.
void write_png_gray8(const std::string& path, const GrayImage& img);
GrayImage read_png_gray8(const std::string& path);

// Bilinear resize (half-pixel centers).
GrayImage resize_bilinear(const GrayImage& img, int64_t h, int64_t w);

// Reads a PNG and optionally resizes to target_size x target_size.
GrayImage read_image(const std::string& path, int64_t target_size = 0);

}  // namespace spm
