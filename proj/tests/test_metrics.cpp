#include <doctest.h>

#include "agf/metrics.hpp"
#include "oracles.hpp"

using agf::Tensor;

namespace {

Tensor random_mask(std::mt19937& rng, int h, int w, double p_one) {
  Tensor t(h, w, 1);
  for (auto& v : t.values()) v = oracles::uniform(rng, 0.0, 1.0) < p_one ? 1.0f : 0.0f;
  return t;
}

Tensor negate(const Tensor& t) {
  Tensor out(t.height(), t.width(), t.channels());
  for (std::size_t i = 0; i < t.size(); ++i)
    out.values()[i] = t.values()[i] == 0.0f ? 1.0f : 0.0f;
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect prediction") {
  std::mt19937 rng(81);
  const Tensor gt = random_mask(rng, 8, 8, 0.4);
  const auto c = agf::confusion(gt, gt);
  CHECK(c.accuracy().value == 1.0);
  CHECK(c.iou().value == 1.0);
  CHECK_FALSE(c.accuracy().degenerate);
}

TEST_CASE("total disagreement on a half-positive image") {
  Tensor gt(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 2; ++x) gt.at(y, x) = 1.0f;
  const Tensor pred = negate(gt);
  const auto c = agf::confusion(pred, gt);
  CHECK(c.accuracy().value == 0.0);
  CHECK(c.sensitivity().value == 0.0);
  CHECK(c.specificity().value == 0.0);
}

TEST_CASE("counts match a per-pixel loop oracle exactly") {
  std::mt19937 rng(82);
  const Tensor pred = random_mask(rng, 16, 16, 0.5);
  const Tensor gt = random_mask(rng, 16, 16, 0.3);
  const auto c = agf::confusion(pred, gt);
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const bool p = pred.at(y, x) != 0.0f;
      const bool g = gt.at(y, x) != 0.0f;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
      tn += !p && !g;
    }
  CHECK(c.tp == tp);
  CHECK(c.fp == fp);
  CHECK(c.tn == tn);
  CHECK(c.fn == fn);
  CHECK(c.total() == 256);
}

TEST_CASE("degenerate denominators report the sentinel value with a flag") {
  const Tensor zeros(4, 4, 1);
  const auto c = agf::confusion(zeros, zeros);  // no positives anywhere
  CHECK(c.sensitivity().value == 1.0);
  CHECK(c.sensitivity().degenerate);
  CHECK(c.iou().value == 1.0);
  CHECK(c.iou().degenerate);
  CHECK_FALSE(c.specificity().degenerate);
}

TEST_CASE("non-binary input is rejected") {
  Tensor bad = Tensor::full(4, 4, 1, 0.5f);
  const Tensor good(4, 4, 1);
  CHECK_THROWS_AS((void)agf::confusion(bad, good), agf::NonBinaryInput);
  CHECK_THROWS_AS((void)agf::confusion(good, bad), agf::NonBinaryInput);
  const Tensor other(4, 5, 1);
  CHECK_THROWS_AS((void)agf::confusion(good, other), agf::ShapeMismatch);
}

TEST_CASE("auc on cleanly separated and fully tied scores") {
  Tensor scores(1, 6, 1), gt(1, 6, 1);
  for (int x = 0; x < 6; ++x) {
    scores.at(0, x) = x < 3 ? 0.1f + 0.05f * x : 0.7f + 0.05f * x;
    gt.at(0, x) = x < 3 ? 0.0f : 1.0f;
  }
  CHECK(agf::auc(scores, gt) == 1.0);

  const Tensor tied = Tensor::full(1, 6, 1, 0.5f);
  CHECK(agf::auc(tied, gt) == 0.5);
}

TEST_CASE("auc matches the pairwise oracle within 1e-12") {
  std::mt19937 rng(83);
  Tensor scores(10, 20, 1);
  Tensor gt(10, 20, 1);
  std::vector<double> s;
  std::vector<int> l;
  for (auto& v : scores.values()) {
    // Coarse quantization forces plenty of ties.
    v = static_cast<float>(static_cast<int>(oracles::uniform(rng, 0.0, 8.0)) / 8.0);
    s.push_back(v);
  }
  for (auto& v : gt.values()) {
    v = oracles::uniform(rng, 0.0, 1.0) < 0.35 ? 1.0f : 0.0f;
    l.push_back(static_cast<int>(v));
  }
  CHECK(std::abs(agf::auc(scores, gt) - oracles::pairwise_auc(s, l)) <= 1e-12);
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  std::mt19937 rng(84);
  Tensor scores(8, 8, 1);
  Tensor gt = random_mask(rng, 8, 8, 0.4);
  for (auto& v : scores.values()) v = static_cast<float>(oracles::uniform(rng, 0.0, 1.0));
  const double base = agf::auc(scores, gt);
  Tensor cubed = scores;
  for (auto& v : cubed.values()) v = v * v * v;
  CHECK(agf::auc(cubed, gt) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("auc rejects single-class ground truth") {
  const Tensor scores = Tensor::full(4, 4, 1, 0.3f);
  const Tensor gt(4, 4, 1);
  CHECK_THROWS_AS((void)agf::auc(scores, gt), agf::DegenerateLabels);
}

TEST_CASE("overlap error basics") {
  std::mt19937 rng(85);
  const Tensor m = random_mask(rng, 8, 8, 0.5);
  CHECK(agf::overlap_error(m, m) == 0.0);

  Tensor left(10, 10, 1);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 5; ++x) left.at(y, x) = 1.0f;
  const Tensor full = Tensor::full(10, 10, 1, 1.0f);
  CHECK(agf::overlap_error(left, full) == doctest::Approx(0.5));

  const Tensor right = negate(left);
  CHECK(agf::overlap_error(left, right) == 1.0);

  const Tensor empty(10, 10, 1);
  CHECK_THROWS_AS((void)agf::overlap_error(empty, empty), agf::EmptyUnion);
}

TEST_CASE("overlap error equals one minus IOU") {
  std::mt19937 rng(86);
  const Tensor pred = random_mask(rng, 12, 12, 0.45);
  const Tensor gt = random_mask(rng, 12, 12, 0.5);
  const auto c = agf::confusion(pred, gt);
  CHECK(agf::overlap_error(gt, pred) == 1.0 - c.iou().value);
}

TEST_CASE("accuracy is symmetric under joint label negation") {
  std::mt19937 rng(87);
  const Tensor pred = random_mask(rng, 9, 9, 0.5);
  const Tensor gt = random_mask(rng, 9, 9, 0.5);
  const auto c1 = agf::confusion(pred, gt);
  const auto c2 = agf::confusion(negate(pred), negate(gt));
  CHECK(c1.accuracy().value == c2.accuracy().value);
  CHECK(c1.sensitivity().value == c2.specificity().value);
}

}  // TEST_SUITE
