#pragma once

#include <cstdint>

#include "agf/tensor.hpp"

namespace agf {

// A metric whose denominator vanished is reported as 1 (the condition is
// vacuously satisfied) with the degenerate flag set.
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }

  MetricValue accuracy() const;     // (tp + tn) / total
  MetricValue sensitivity() const;  // tp / (tp + fn)
  MetricValue specificity() const;  // tn / (tn + fp)
  MetricValue iou() const;          // tp / (tp + fp + fn)
};

// Pixel counts of a binary prediction against a binary ground truth. Inputs
// must contain exactly 0 or 1.
ConfusionCounts confusion(const Tensor& pred, const Tensor& gt);

// Exact rank-based AUC: the probability that a random positive outscores a
// random negative, ties counted half. Computed with tie-averaged ranks, not
// binned thresholds.
double auc(const Tensor& scores, const Tensor& gt);

// Overlapping error between a ground-truth mask and a segmented mask:
// 1 - |intersection| / |union|.
double overlap_error(const Tensor& gt_mask, const Tensor& segmented_mask);

}  // namespace agf
