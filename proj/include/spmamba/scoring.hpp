#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spmamba/backbone.hpp"
#include "spmamba/common.hpp"
#include "spmamba/tensor.hpp"

namespace spm {

// Non-negative per-pixel anomaly evidence with its cached maximum. Ties on
// the maximum resolve to the first position in row-major order.
template <typename T>
struct AnomalyMap {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<T> values;
  T max_value = T(0);
  int64_t max_row = 0;
  int64_t max_col = 0;

  static AnomalyMap from_values(int64_t h, int64_t w, std::vector<T> v) {
    require(h >= 1 && w >= 1 && static_cast<int64_t>(v.size()) == h * w, "anomaly-map",
            "values must be h*w");
    AnomalyMap m;
    m.height = h;
    m.width = w;
    m.values = std::move(v);
    m.max_value = m.values[0];
    for (int64_t i = 1; i < h * w; ++i)
      if (m.values[static_cast<size_t>(i)] > m.max_value) {
        m.max_value = m.values[static_cast<size_t>(i)];
        m.max_row = i / w;
        m.max_col = i % w;
      }
    return m;
  }

  T at(int64_t r, int64_t c) const { return values[static_cast<size_t>(r * width + c)]; }
};

struct ContrastParams {
  double sigma = 0.6;
  double k_sigma = 1.2;
  int radius = 0;  // 0 = ceil(3 * k_sigma)

  int effective_radius() const {
    const int min_r = static_cast<int>(std::ceil(3.0 * k_sigma));
    return radius > min_r ? radius : min_r;
  }

  void validate() const {
    require(sigma > 0 && k_sigma > sigma, "contrast-params",
            "needs k_sigma > sigma > 0, got sigma=" + std::to_string(sigma) +
                " k_sigma=" + std::to_string(k_sigma));
  }
};

struct ScoreWeights {
  double alpha = 1.0;
  double beta = -0.025;
  double gamma = 400.0;
};

template <typename T>
struct ScoreBreakdown {
  T s_org = T(0);
  T s_p_dist = T(0);
  T s_concen = T(0);
  T s_contra = T(0);
  T s_total = T(0);
};

namespace detail {

inline int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

inline double gauss2d(double x, double y, double sigma) {
  const double s2 = sigma * sigma;
  return std::exp(-(x * x + y * y) / (2.0 * s2)) / (2.0 * 3.14159265358979323846 * s2);
}

}  // namespace detail

// Isotropic 2-d Gaussian blur with reflect padding; kernel normalized to
// sum 1 so values stay within the input range.
template <typename T>
std::vector<T> gaussian_smooth(const std::vector<T>& map, int64_t h, int64_t w, double sigma) {
  if (sigma <= 0) return map;
  const int64_t r = static_cast<int64_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<size_t>(2 * r + 1));
  double sum = 0;
  for (int64_t i = -r; i <= r; ++i) {
    const double v = std::exp(-(static_cast<double>(i * i)) / (2.0 * sigma * sigma));
    k[static_cast<size_t>(i + r)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  std::vector<T> tmp(map.size()), out(map.size());
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x) {
      double acc = 0;
      for (int64_t i = -r; i <= r; ++i)
        acc += k[static_cast<size_t>(i + r)] *
               static_cast<double>(map[static_cast<size_t>(y * w + detail::reflect_index(x + i, w))]);
      tmp[static_cast<size_t>(y * w + x)] = static_cast<T>(acc);
    }
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x) {
      double acc = 0;
      for (int64_t i = -r; i <= r; ++i)
        acc += k[static_cast<size_t>(i + r)] *
               static_cast<double>(tmp[static_cast<size_t>(detail::reflect_index(y + i, h) * w + x)]);
      out[static_cast<size_t>(y * w + x)] = static_cast<T>(acc);
    }
  return out;
}

// Multi-scale reconstruction distance: per level, 1 - cosine over channels
// at each position, upsampled bilinearly to (H,W) and summed over the three
// levels, then Gaussian-smoothed; negatives clamp to zero.
template <typename T>
AnomalyMap<T> recon_anomaly_map(const FeaturePyramid<T>& org, const FeaturePyramid<T>& rec,
                                int64_t h, int64_t w, double smooth_sigma) {
  std::vector<T> summed(static_cast<size_t>(h * w), T(0));
  for (int l = 1; l <= 3; ++l) {
    const Tensor<T>& fo = org.level(l);
    const Tensor<T>& fr = rec.level(l);
    require(fo.shape() == fr.shape(), "recon-anomaly-map",
            "pyramid mismatch at level " + std::to_string(l) + ": " + shape_str(fo.shape()) +
                " vs " + shape_str(fr.shape()));
    const int64_t C = fo.dim(0), gh = fo.dim(1), gw = fo.dim(2);
    Tensor<T> level_map = Tensor<T>::zeros({gh, gw});
    for (int64_t y = 0; y < gh; ++y)
      for (int64_t x = 0; x < gw; ++x) {
        T dot = T(0), na = T(0), nb = T(0);
        for (int64_t c = 0; c < C; ++c) {
          const T a = fo.data()[(c * gh + y) * gw + x];
          const T b = fr.data()[(c * gh + y) * gw + x];
          dot += a * b;
          na += a * a;
          nb += b * b;
        }
        const T cs = (na == T(0) || nb == T(0)) ? T(0) : dot / (std::sqrt(na) * std::sqrt(nb));
        level_map.data()[y * gw + x] = T(1) - cs;
      }
    Tensor<T> up = bilinear_upsample(level_map, h, w);
    for (int64_t i = 0; i < h * w; ++i) summed[static_cast<size_t>(i)] += up.data()[i];
  }
  std::vector<T> smoothed = gaussian_smooth(summed, h, w, smooth_sigma);
  for (auto& v : smoothed)
    if (v < T(0)) v = T(0);
  return AnomalyMap<T>::from_values(h, w, std::move(smoothed));
}

// Mean of squared deviation from the map maximum, weighted by Euclidean
// pixel distance to the maximum's position.
template <typename T>
T s_concen(const AnomalyMap<T>& map) {
  require(map.height >= 1 && map.width >= 1, "s-concen", "empty map");
  double acc = 0;
  for (int64_t r = 0; r < map.height; ++r)
    for (int64_t c = 0; c < map.width; ++c) {
      const double e = static_cast<double>(map.at(r, c)) - static_cast<double>(map.max_value);
      const double dr = static_cast<double>(r - map.max_row);
      const double dc = static_cast<double>(c - map.max_col);
      acc += e * e * std::sqrt(dr * dr + dc * dc);
    }
  return static_cast<T>(acc / static_cast<double>(map.height * map.width));
}

// Difference-of-Gaussians kernel sampled on the integer grid and shifted to
// zero sum, so constant maps produce a zero response.
inline std::vector<double> dog_kernel(const ContrastParams& params) {
  params.validate();
  const int r = params.effective_radius();
  const int side = 2 * r + 1;
  std::vector<double> k(static_cast<size_t>(side * side));
  double sum = 0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double v = detail::gauss2d(x, y, params.k_sigma) - detail::gauss2d(x, y, params.sigma);
      k[static_cast<size_t>((y + r) * side + (x + r))] = v;
      sum += v;
    }
  const double shift = sum / static_cast<double>(side * side);
  for (auto& v : k) v -= shift;
  return k;
}

// Mean absolute response of the zero-sum DoG filter (reflect padding).
template <typename T>
T s_contra(const AnomalyMap<T>& map, const ContrastParams& params) {
  const std::vector<double> k = dog_kernel(params);
  const int r = params.effective_radius();
  const int side = 2 * r + 1;
  double acc = 0;
  for (int64_t y = 0; y < map.height; ++y)
    for (int64_t x = 0; x < map.width; ++x) {
      double resp = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int64_t sy = detail::reflect_index(y + dy, map.height);
          const int64_t sx = detail::reflect_index(x + dx, map.width);
          resp += k[static_cast<size_t>((dy + r) * side + (dx + r))] *
                  static_cast<double>(map.at(sy, sx));
        }
      acc += std::abs(resp);
    }
  return static_cast<T>(acc / static_cast<double>(map.height * map.width));
}

// Image-level score: max of the anomaly map, mean of the upsampled prototype
// distance, plus the weighted concentration and contrast terms.
template <typename T>
ScoreBreakdown<T> image_scores(const AnomalyMap<T>& map, const std::vector<T>& d_up,
                               const ScoreWeights& weights, const ContrastParams& contrast) {
  require(static_cast<int64_t>(d_up.size()) == map.height * map.width, "image-scores",
          "distance map size " + std::to_string(d_up.size()) + " vs map " +
              std::to_string(map.height * map.width));
  ScoreBreakdown<T> s;
  s.s_org = map.max_value;
  double mean_d = 0;
  for (T v : d_up) mean_d += static_cast<double>(v);
  s.s_p_dist = static_cast<T>(mean_d / static_cast<double>(d_up.size()));
  s.s_concen = s_concen(map);
  s.s_contra = s_contra(map, contrast);
  s.s_total = static_cast<T>(static_cast<double>(s.s_org) +
                             weights.alpha * static_cast<double>(s.s_p_dist) +
                             weights.beta * static_cast<double>(s.s_concen) +
                             weights.gamma * static_cast<double>(s.s_contra));
  return s;
}

}  // namespace spm
