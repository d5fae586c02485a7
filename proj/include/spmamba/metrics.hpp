#pragma once

#include <cstdint>
#include <vector>

#include "spmamba/common.hpp"

namespace spm {

// Rank-based AUROC with the half-credit tie convention. Requires both
// classes present.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Step-interpolated area under the precision-recall curve, sweeping
// thresholds downward with tied scores grouped. Requires positives.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

struct ThresholdMetrics {
  double f1 = 0;
  double accuracy = 0;
  double threshold = 0;
};

// Sweeps every attained score as a >= threshold and returns the F1-best one
// (lowest threshold on ties) with the accuracy at that same threshold.
ThresholdMetrics f1_acc_at_best_threshold(const std::vector<double>& scores,
                                          const std::vector<int>& labels);

struct PixelMetrics {
  double auroc = 0;
  double average_precision = 0;
  double f1 = 0;
};

// Metrics over the pooled pixel population of all maps against their masks.
PixelMetrics pixel_metrics(const std::vector<std::vector<double>>& maps,
                           const std::vector<std::vector<uint8_t>>& masks);

}  // namespace spm
