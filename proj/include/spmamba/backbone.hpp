#pragma once

#include <array>
#include <string>

#include "spmamba/params.hpp"
#include "spmamba/tensor.hpp"

namespace spm {

// Three feature grids at strides 4, 8 and 16 of the input image.
template <typename T>
struct FeaturePyramid {
  Tensor<T> l1, l2, l3;

  const Tensor<T>& level(int l) const {
    switch (l) {
      case 1: return l1;
      case 2: return l2;
      default: return l3;
    }
  }
};

struct EncoderConfig {
  int64_t input_size = 256;
  int stem_channels = 16;
  std::array<int, 3> widths = {32, 64, 128};
};

// Small trainable CNN: 7x7/2 stem plus three stages of (3x3/2 conv, 3x3
// conv), silu throughout. Stage outputs form the pyramid.
template <typename T>
class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, ParamStore<T>& store, Rng& rng) : cfg_(cfg) {
    auto P = [&](const std::string& n, Tensor<T> t) { return store.add("encoder." + n, t); };
    stem_w_ = P("stem.w", init::he_normal<T>({cfg.stem_channels, 1, 7, 7}, 49, rng));
    stem_b_ = P("stem.b", Tensor<T>::zeros({cfg.stem_channels}));
    int cin = cfg.stem_channels;
    for (int s = 0; s < 3; ++s) {
      const int cout = cfg.widths[static_cast<size_t>(s)];
      down_w_[static_cast<size_t>(s)] =
          P("stage" + std::to_string(s + 1) + ".down.w", init::he_normal<T>({cout, cin, 3, 3}, 9 * cin, rng));
      down_b_[static_cast<size_t>(s)] =
          P("stage" + std::to_string(s + 1) + ".down.b", Tensor<T>::zeros({cout}));
      refine_w_[static_cast<size_t>(s)] =
          P("stage" + std::to_string(s + 1) + ".refine.w", init::he_normal<T>({cout, cout, 3, 3}, 9 * cout, rng));
      refine_b_[static_cast<size_t>(s)] =
          P("stage" + std::to_string(s + 1) + ".refine.b", Tensor<T>::zeros({cout}));
      cin = cout;
    }
  }

  FeaturePyramid<T> forward(const Tensor<T>& image) const {
    require(image.ndim() == 3 && image.dim(0) == 1 && image.dim(1) == cfg_.input_size &&
                image.dim(2) == cfg_.input_size,
            "encoder",
            "expected (1," + std::to_string(cfg_.input_size) + "," +
                std::to_string(cfg_.input_size) + ") image, got " + shape_str(image.shape()));
    Tensor<T> x = silu(conv2d(image, stem_w_, stem_b_, 2, 3));
    FeaturePyramid<T> pyr;
    for (int s = 0; s < 3; ++s) {
      x = silu(conv2d(x, down_w_[static_cast<size_t>(s)], down_b_[static_cast<size_t>(s)], 2, 1));
      x = silu(conv2d(x, refine_w_[static_cast<size_t>(s)], refine_b_[static_cast<size_t>(s)], 1, 1));
      if (s == 0) pyr.l1 = x;
      if (s == 1) pyr.l2 = x;
      if (s == 2) pyr.l3 = x;
    }
    return pyr;
  }

  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  Tensor<T> stem_w_, stem_b_;
  std::array<Tensor<T>, 3> down_w_, down_b_, refine_w_, refine_b_;
};

// Fuses the pyramid into a single stride-8 grid: 1x1 projection of each
// level to a common width, resize to the stride-8 geometry, sum. Purely
// linear in each level's features.
template <typename T>
class HalfFpn {
 public:
  HalfFpn(const std::array<int, 3>& level_widths, int fused_channels, ParamStore<T>& store,
          Rng& rng)
      : fused_channels_(fused_channels) {
    for (int l = 0; l < 3; ++l) {
      const int cin = level_widths[static_cast<size_t>(l)];
      proj_w_[static_cast<size_t>(l)] = store.add(
          "fpn.proj_l" + std::to_string(l + 1) + ".w",
          init::he_normal<T>({fused_channels, cin, 1, 1}, cin, rng));
      proj_b_[static_cast<size_t>(l)] =
          store.add("fpn.proj_l" + std::to_string(l + 1) + ".b", Tensor<T>::zeros({fused_channels}));
    }
  }

  Tensor<T> forward(const FeaturePyramid<T>& pyr) const {
    require(pyr.l1.size() > 0 && pyr.l2.size() > 0 && pyr.l3.size() > 0, "half-fpn",
            "incomplete pyramid");
    Tensor<T> p1 = avg_pool2x2(conv2d(pyr.l1, proj_w_[0], proj_b_[0], 1, 0));
    Tensor<T> p2 = conv2d(pyr.l2, proj_w_[1], proj_b_[1], 1, 0);
    Tensor<T> p3 = upsample_nearest2x(conv2d(pyr.l3, proj_w_[2], proj_b_[2], 1, 0));
    return add(add(p1, p2), p3);
  }

  int fused_channels() const { return fused_channels_; }

 private:
  int fused_channels_ = 0;
  std::array<Tensor<T>, 3> proj_w_, proj_b_;
};

}  // namespace spm
