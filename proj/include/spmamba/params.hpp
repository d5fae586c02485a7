#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "spmamba/rng.hpp"
#include "spmamba/tensor.hpp"

namespace spm {

// Ordered registry of learnable tensors. Registration order is fixed by
// model construction, which makes checkpoints and optimizer state stable.
template <typename T>
class ParamStore {
 public:
  Tensor<T> add(const std::string& name, Tensor<T> t) {
    t.set_name(name);
    t.set_requires_grad(true);
    params_.emplace_back(name, t);
    return t;
  }

  std::vector<std::pair<std::string, Tensor<T>>>& items() { return params_; }
  const std::vector<std::pair<std::string, Tensor<T>>>& items() const { return params_; }

  void zero_grad() {
    for (auto& [name, t] : params_) t.zero_grad();
  }

  int64_t count() const {
    int64_t n = 0;
    for (const auto& [name, t] : params_) n += t.size();
    return n;
  }

  Tensor<T> find(const std::string& name) const {
    for (const auto& [n, t] : params_)
      if (n == name) return t;
    throw ValueError("parameter not found: " + name);
  }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> params_;
};

namespace init {

template <typename T>
Tensor<T> he_normal(Shape shape, int64_t fan_in, Rng& rng) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (int64_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(rng.normal(0.0, std));
  return t;
}

template <typename T>
Tensor<T> normal(Shape shape, double mean, double std, Rng& rng) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(rng.normal(mean, std));
  return t;
}

}  // namespace init

}  // namespace spm
