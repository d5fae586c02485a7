#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "spmamba/rng.hpp"
#include "spmamba/tensor.hpp"

namespace spm {

// Side length of the sliding window used for prototype matching.
struct WindowConfig {
  int p = 3;

  void validate(int64_t gh, int64_t gw) const {
    require(p >= 1 && p % 2 == 1, "window", "window side must be odd and positive, got " + std::to_string(p));
    require(p <= gh && p <= gw, "window",
            "window side " + std::to_string(p) + " exceeds grid " + std::to_string(gh) + "x" +
                std::to_string(gw));
  }
};

namespace detail {

template <typename T>
T cos_sim(const T* a, const T* b, int64_t d) {
  T dot = T(0), na = T(0), nb = T(0);
  for (int64_t j = 0; j < d; ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == T(0) || nb == T(0)) return T(0);
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

// Window-sliding distance between a bank of K prototype grids (K,gh*gw,C)
// and a feature grid (gh*gw,C). For each position, each prototype patch is
// compared against every feature patch in the p x p window centered there
// (clipped at borders); the best similarity per prototype gives a distance
// 1 - max_sim, and the map takes the minimum over prototypes. Ties select
// the first window cell in row-major order and the lowest prototype index,
// so evaluation is bit-stable. Gradients flow only through the selected
// prototype/feature pair.
template <typename T>
Tensor<T> window_distance(const Tensor<T>& bank, const Tensor<T>& feature, int64_t gh, int64_t gw,
                          const WindowConfig& cfg) {
  require(bank.ndim() == 3 && feature.ndim() == 2, "window-distance",
          "expects bank(K,HW,C) and feature(HW,C), got " + shape_str(bank.shape()) + " and " +
              shape_str(feature.shape()));
  const int64_t K = bank.dim(0), HW = bank.dim(1), C = bank.dim(2);
  require(HW == gh * gw, "window-distance",
          "bank positions " + std::to_string(HW) + " vs grid " + std::to_string(gh) + "x" +
              std::to_string(gw));
  require(feature.dim(0) == HW && feature.dim(1) == C, "window-distance",
          "feature shape " + shape_str(feature.shape()) + " does not match bank");
  cfg.validate(gh, gw);
  const int64_t r = cfg.p / 2;

  Tensor<T> out = Tensor<T>::zeros({HW});
  std::vector<int64_t> sel_k(static_cast<size_t>(HW)), sel_j(static_cast<size_t>(HW));
  for (int64_t row = 0; row < gh; ++row) {
    for (int64_t col = 0; col < gw; ++col) {
      const int64_t i = row * gw + col;
      T best_d = T(0);
      int64_t best_k = -1, best_j = -1;
      for (int64_t k = 0; k < K; ++k) {
        const T* proto = bank.data() + (k * HW + i) * C;
        T best_sim = T(0);
        int64_t best_cell = -1;
        for (int64_t u = std::max<int64_t>(0, row - r); u <= std::min(gh - 1, row + r); ++u) {
          for (int64_t v = std::max<int64_t>(0, col - r); v <= std::min(gw - 1, col + r); ++v) {
            const int64_t j = u * gw + v;
            const T sim = detail::cos_sim(proto, feature.data() + j * C, C);
            if (best_cell < 0 || sim > best_sim) {
              best_sim = sim;
              best_cell = j;
            }
          }
        }
        const T dist = T(1) - best_sim;
        if (best_k < 0 || dist < best_d) {
          best_d = dist;
          best_k = k;
          best_j = best_cell;
        }
      }
      out.data()[i] = best_d;
      sel_k[static_cast<size_t>(i)] = best_k;
      sel_j[static_cast<size_t>(i)] = best_j;
    }
  }
  if (detail::tracing<T>({&bank, &feature})) {
    detail::mark_output(out);
    Tape<T>::active()->record([bn = bank.node(), fn = feature.node(), on = out.node(),
                               sel_k = std::move(sel_k), sel_j = std::move(sel_j), HW, C] {
      for (int64_t i = 0; i < HW; ++i) {
        const T g = -on->grad[i];  // d(1 - sim)/d(sim)
        if (g == T(0)) continue;
        const int64_t k = sel_k[static_cast<size_t>(i)];
        const int64_t j = sel_j[static_cast<size_t>(i)];
        const T* pa = bn->value.data() + (k * HW + i) * C;
        const T* pb = fn->value.data() + j * C;
        T dot = T(0), na2 = T(0), nb2 = T(0);
        for (int64_t c = 0; c < C; ++c) {
          dot += pa[c] * pb[c];
          na2 += pa[c] * pa[c];
          nb2 += pb[c] * pb[c];
        }
        if (na2 == T(0) || nb2 == T(0)) continue;
        const T na = std::sqrt(na2), nb = std::sqrt(nb2);
        const T cs = dot / (na * nb);
        for (int64_t c = 0; c < C; ++c) {
          if (bn->requires_grad)
            bn->grad[(k * HW + i) * C + c] += g * (pb[c] / (na * nb) - cs * pa[c] / na2);
          if (fn->requires_grad)
            fn->grad[j * C + c] += g * (pa[c] / (na * nb) - cs * pb[c] / nb2);
        }
      }
    });
  }
  return out;
}

// Picks, per position, the prototype patch with the highest windowed
// similarity across the bank (lowest index on ties). Value-only.
template <typename T>
Tensor<T> assemble_final_prototype(const Tensor<T>& bank, const Tensor<T>& feature, int64_t gh,
                                   int64_t gw, const WindowConfig& cfg) {
  require(bank.ndim() == 3 && feature.ndim() == 2, "final-prototype",
          "expects bank(K,HW,C) and feature(HW,C)");
  const int64_t K = bank.dim(0), HW = bank.dim(1), C = bank.dim(2);
  cfg.validate(gh, gw);
  const int64_t r = cfg.p / 2;
  Tensor<T> out = Tensor<T>::zeros({HW, C});
  for (int64_t row = 0; row < gh; ++row)
    for (int64_t col = 0; col < gw; ++col) {
      const int64_t i = row * gw + col;
      T best_sim = T(0);
      int64_t best_k = -1;
      for (int64_t k = 0; k < K; ++k) {
        const T* proto = bank.data() + (k * HW + i) * C;
        T sim_k = T(0);
        bool any = false;
        for (int64_t u = std::max<int64_t>(0, row - r); u <= std::min(gh - 1, row + r); ++u)
          for (int64_t v = std::max<int64_t>(0, col - r); v <= std::min(gw - 1, col + r); ++v) {
            const T sim = detail::cos_sim(proto, feature.data() + (u * gw + v) * C, C);
            if (!any || sim > sim_k) {
              sim_k = sim;
              any = true;
            }
          }
        if (best_k < 0 || sim_k > best_sim) {
          best_sim = sim_k;
          best_k = k;
        }
      }
      for (int64_t c = 0; c < C; ++c) out.data()[i * C + c] = bank.data()[(best_k * HW + i) * C + c];
    }
  return out;
}

// Number of window cells at each position, matching the corner/edge/center
// counts (p+1)^2/4, p(p+1)/2 and p^2 for p x p windows.
inline int64_t window_cardinality(int64_t gh, int64_t gw, int64_t row, int64_t col, int p) {
  const int64_t r = p / 2;
  const int64_t rows = std::min(gh - 1, row + r) - std::max<int64_t>(0, row - r) + 1;
  const int64_t cols = std::min(gw - 1, col + r) - std::max<int64_t>(0, col - r) + 1;
  return rows * cols;
}

// Fills a bank (K,HW,C) by sampling K feature grids without replacement.
template <typename T>
void init_prototypes(Tensor<T>& bank, const std::vector<Tensor<T>>& samples, Rng& rng) {
  const int64_t K = bank.dim(0), HW = bank.dim(1), C = bank.dim(2);
  require(static_cast<int64_t>(samples.size()) >= K, "init-prototypes",
          "need at least " + std::to_string(K) + " sample grids, got " +
              std::to_string(samples.size()));
  std::vector<int64_t> pool(samples.size());
  for (size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int64_t>(i);
  for (int64_t k = 0; k < K; ++k) {
    const uint64_t pick = rng.below(static_cast<uint64_t>(pool.size()));
    const int64_t s = pool[static_cast<size_t>(pick)];
    pool.erase(pool.begin() + static_cast<int64_t>(pick));
    const Tensor<T>& src = samples[static_cast<size_t>(s)];
    require(src.size() == HW * C, "init-prototypes",
            "sample shape " + shape_str(src.shape()) + " does not match bank grid");
    std::copy(src.data(), src.data() + HW * C, bank.data() + k * HW * C);
  }
}

}  // namespace spm
