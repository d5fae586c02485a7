#include "spmamba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spm {

namespace {

void check_binary(const std::vector<double>& scores, const std::vector<int>& labels,
                  const char* op) {
  require(scores.size() == labels.size() && !scores.empty(), op,
          "scores and labels must be non-empty and equal length");
  int64_t pos = 0;
  for (int y : labels) {
    require(y == 0 || y == 1, op, "labels must be 0/1");
    pos += y;
  }
  require(pos > 0 && pos < static_cast<int64_t>(labels.size()), op,
          "both classes must be present");
}

}  // namespace

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_binary(scores, labels, "auroc");
  const size_t n = scores.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // average ranks over tie groups
  std::vector<double> rank(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
    i = j + 1;
  }
  double rank_pos = 0;
  int64_t n_pos = 0;
  for (size_t k = 0; k < n; ++k)
    if (labels[k] == 1) {
      rank_pos += rank[k];
      ++n_pos;
    }
  const int64_t n_neg = static_cast<int64_t>(n) - n_pos;
  const double u = rank_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  require(scores.size() == labels.size() && !scores.empty(), "average-precision",
          "scores and labels must be non-empty and equal length");
  int64_t total_pos = 0;
  for (int y : labels) total_pos += y;
  require(total_pos > 0, "average-precision", "no positive labels");

  std::vector<size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  double ap = 0;
  int64_t tp = 0, fp = 0;
  double prev_recall = 0;
  size_t i = 0;
  const size_t n = idx.size();
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    for (size_t k = i; k <= j; ++k) {
      if (labels[idx[k]] == 1)
        ++tp;
      else
        ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j + 1;
  }
  return ap;
}

ThresholdMetrics f1_acc_at_best_threshold(const std::vector<double>& scores,
                                          const std::vector<int>& labels) {
  check_binary(scores, labels, "f1-threshold");
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  ThresholdMetrics best;
  bool found = false;
  const double n = static_cast<double>(scores.size());
  for (double t : thresholds) {
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t k = 0; k < scores.size(); ++k) {
      const bool pred = scores[k] >= t;
      if (pred && labels[k] == 1) ++tp;
      if (pred && labels[k] == 0) ++fp;
      if (!pred && labels[k] == 1) ++fn;
      if (!pred && labels[k] == 0) ++tn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    const double f1 = denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    if (!found || f1 > best.f1) {
      best.f1 = f1;
      best.accuracy = static_cast<double>(tp + tn) / n;
      best.threshold = t;
      found = true;
    }
  }
  return best;
}

PixelMetrics pixel_metrics(const std::vector<std::vector<double>>& maps,
                           const std::vector<std::vector<uint8_t>>& masks) {
  require(maps.size() == masks.size() && !maps.empty(), "pixel-metrics",
          "maps and masks must be non-empty and aligned");
  std::vector<double> scores;
  std::vector<int> labels;
  for (size_t i = 0; i < maps.size(); ++i) {
    require(maps[i].size() == masks[i].size(), "pixel-metrics",
            "map/mask size mismatch at image " + std::to_string(i));
    for (size_t j = 0; j < maps[i].size(); ++j) {
      scores.push_back(maps[i][j]);
      labels.push_back(masks[i][j] ? 1 : 0);
    }
  }
  int64_t pos = 0;
  for (int y : labels) pos += y;
  require(pos > 0, "pixel-metrics", "no anomalous pixels in masks");
  PixelMetrics out;
  out.auroc = auroc(scores, labels);
  out.average_precision = average_precision(scores, labels);
  out.f1 = f1_acc_at_best_threshold(scores, labels).f1;
  return out;
}

}  // namespace spm
