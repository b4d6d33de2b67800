#include "agf/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace agf {

namespace {

MetricValue ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return {1.0, true};
  return {static_cast<double>(num) / static_cast<double>(den), false};
}

void require_binary(const Tensor& t, const char* name) {
  for (float v : t.values())
    if (v != 0.0f && v != 1.0f)
      throw NonBinaryInput(std::string(name) + " must contain exactly 0 or 1");
}

}  // namespace

MetricValue ConfusionCounts::accuracy() const { return ratio(tp + tn, total()); }
MetricValue ConfusionCounts::sensitivity() const { return ratio(tp, tp + fn); }
MetricValue ConfusionCounts::specificity() const { return ratio(tn, tn + fp); }
MetricValue ConfusionCounts::iou() const { return ratio(tp, tp + fp + fn); }

ConfusionCounts confusion(const Tensor& pred, const Tensor& gt) {
  if (!pred.same_shape(gt)) throw ShapeMismatch("confusion: prediction and ground truth differ");
  require_binary(pred, "prediction");
  require_binary(gt, "ground truth");
  ConfusionCounts c;
  const auto vp = pred.values();
  const auto vg = gt.values();
  for (std::size_t i = 0; i < vp.size(); ++i) {
    const bool p = vp[i] != 0.0f;
    const bool g = vg[i] != 0.0f;
    if (p && g)
      ++c.tp;
    else if (p && !g)
      ++c.fp;
    else if (!p && g)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

double auc(const Tensor& scores, const Tensor& gt) {
  if (!scores.same_shape(gt)) throw ShapeMismatch("auc: scores and ground truth differ");
  require_binary(gt, "ground truth");
  const auto vs = scores.values();
  const auto vg = gt.values();
  const std::size_t n = vs.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return vs[a] < vs[b]; });

  // Tie-averaged ranks; the rank sum of positives gives the Mann-Whitney U.
  double positive_rank_sum = 0.0;
  std::uint64_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && vs[order[j]] == vs[order[i]]) ++j;
    const double mean_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (vg[order[k]] != 0.0f) {
        positive_rank_sum += mean_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::uint64_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw DegenerateLabels("auc requires at least one positive and one negative");
  const double u = positive_rank_sum -
                   0.5 * static_cast<double>(positives) * (static_cast<double>(positives) + 1.0);
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double overlap_error(const Tensor& gt_mask, const Tensor& segmented_mask) {
  if (!gt_mask.same_shape(segmented_mask))
    throw ShapeMismatch("overlap_error: mask shapes differ");
  require_binary(gt_mask, "ground truth mask");
  require_binary(segmented_mask, "segmented mask");
  std::uint64_t inter = 0;
  std::uint64_t uni = 0;
  const auto va = gt_mask.values();
  const auto vb = segmented_mask.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const bool a = va[i] != 0.0f;
    const bool b = vb[i] != 0.0f;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  if (uni == 0) throw EmptyUnion("overlap_error: both masks are empty");
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace agf
