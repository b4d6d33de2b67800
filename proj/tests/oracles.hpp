// Independent reference implementations used as test oracles. Everything here
// is a direct double-precision loop over window pixel lists; nothing calls
// the library's integral-image or elementwise kernels.
#pragma once

#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "agf/tensor.hpp"

namespace oracles {

// --- deterministic synthetic inputs ---------------------------------------
// Raw mt19937 draws scaled explicitly; distributions are not pinned across
// standard libraries, raw generator output is.

inline double uniform(std::mt19937& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 5) * 0x1.0p-27;
  return lo + u * (hi - lo);
}

inline agf::Tensor random_tensor(std::mt19937& rng, int h, int w, int c, float lo, float hi) {
  agf::Tensor t(h, w, c);
  for (auto& v : t.values()) v = static_cast<float>(uniform(rng, lo, hi));
  return t;
}

inline agf::TensorD random_tensor_d(std::mt19937& rng, int h, int w, int c, double lo, double hi) {
  agf::TensorD t(h, w, c);
  for (auto& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

// Box-Muller from raw uniforms.
inline double gaussian(std::mt19937& rng, double sigma) {
  const double u1 = std::max(uniform(rng, 0.0, 1.0), 1e-12);
  const double u2 = uniform(rng, 0.0, 1.0);
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// --- windowed statistics ----------------------------------------------------

template <typename S>
agf::TensorD naive_windowed_sum(const agf::TensorT<S>& t, int radius) {
  const int h = t.height();
  const int w = t.width();
  agf::TensorD out(h, w, t.channels());
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int yy = std::max(y - radius, 0); yy <= std::min(y + radius, h - 1); ++yy)
          for (int xx = std::max(x - radius, 0); xx <= std::min(x + radius, w - 1); ++xx)
            acc += static_cast<double>(t.at(yy, xx, c));
        out.at(y, x, c) = acc;
      }
  return out;
}

template <typename S>
agf::TensorD naive_windowed_mean(const agf::TensorT<S>& t, int radius) {
  const int h = t.height();
  const int w = t.width();
  agf::TensorD out(h, w, t.channels());
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        int n = 0;
        for (int yy = std::max(y - radius, 0); yy <= std::min(y + radius, h - 1); ++yy)
          for (int xx = std::max(x - radius, 0); xx <= std::min(x + radius, w - 1); ++xx) {
            acc += static_cast<double>(t.at(yy, xx, c));
            ++n;
          }
        out.at(y, x, c) = acc / n;
      }
  return out;
}

// --- the printed closed-form solution, evaluated literally ------------------
// For every window: gather the pixel list, form the attention ratio
// X_i = T_i / sum(T), and evaluate
//   a_k = (mean(T^2 I O) - N mean(X T I) mean(T O))
//         / (mean(T^2 I^2) - N mean(X T I) mean(T I) + lambda)
//   b_k = (mean(T O) - a_k mean(T I)) / mean(T)
// Single-channel inputs; multi-channel cases are exercised channel by channel.
inline std::pair<agf::TensorD, agf::TensorD> brute_force_coefficients(
    const agf::Tensor& guidance, const agf::Tensor& filtering, const agf::Tensor& attention,
    int radius, double lambda) {
  const int h = guidance.height();
  const int w = guidance.width();
  agf::TensorD a_map(h, w, 1);
  agf::TensorD b_map(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sum_t = 0.0;
      int n = 0;
      for (int yy = std::max(y - radius, 0); yy <= std::min(y + radius, h - 1); ++yy)
        for (int xx = std::max(x - radius, 0); xx <= std::min(x + radius, w - 1); ++xx) {
          sum_t += static_cast<double>(attention.at(yy, xx));
          ++n;
        }
      double mean_t2io = 0.0, mean_xti = 0.0, mean_to = 0.0;
      double mean_t2ii = 0.0, mean_ti = 0.0, mean_t = 0.0;
      for (int yy = std::max(y - radius, 0); yy <= std::min(y + radius, h - 1); ++yy)
        for (int xx = std::max(x - radius, 0); xx <= std::min(x + radius, w - 1); ++xx) {
          const double ti = static_cast<double>(attention.at(yy, xx));
          const double ii = static_cast<double>(guidance.at(yy, xx));
          const double oi = static_cast<double>(filtering.at(yy, xx));
          const double xi = ti / sum_t;
          mean_t2io += ti * ti * ii * oi;
          mean_xti += xi * ti * ii;
          mean_to += ti * oi;
          mean_t2ii += ti * ti * ii * ii;
          mean_ti += ti * ii;
          mean_t += ti;
        }
      mean_t2io /= n;
      mean_xti /= n;
      mean_to /= n;
      mean_t2ii /= n;
      mean_ti /= n;
      mean_t /= n;
      const double a = (mean_t2io - n * mean_xti * mean_to) /
                       (mean_t2ii - n * mean_xti * mean_ti + lambda);
      const double b = (mean_to - a * mean_ti) / mean_t;
      a_map.at(y, x) = a;
      b_map.at(y, x) = b;
    }
  return {std::move(a_map), std::move(b_map)};
}

// --- covariance-form guided filter ------------------------------------------
// The classic formulation a = cov(I,O)/(var(I)+lambda), b = mean(O) - a mean(I),
// followed by coefficient averaging and the linear blend, all with naive
// loops at a single resolution.
inline agf::TensorD covariance_guided_filter(const agf::Tensor& guidance,
                                             const agf::Tensor& filtering, int radius,
                                             double lambda) {
  const int h = guidance.height();
  const int w = guidance.width();
  agf::TensorD a_map(h, w, 1);
  agf::TensorD b_map(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double mean_i = 0.0, mean_o = 0.0, mean_ii = 0.0, mean_io = 0.0;
      int n = 0;
      for (int yy = std::max(y - radius, 0); yy <= std::min(y + radius, h - 1); ++yy)
        for (int xx = std::max(x - radius, 0); xx <= std::min(x + radius, w - 1); ++xx) {
          const double ii = static_cast<double>(guidance.at(yy, xx));
          const double oi = static_cast<double>(filtering.at(yy, xx));
          mean_i += ii;
          mean_o += oi;
          mean_ii += ii * ii;
          mean_io += ii * oi;
          ++n;
        }
      mean_i /= n;
      mean_o /= n;
      mean_ii /= n;
      mean_io /= n;
      const double var = mean_ii - mean_i * mean_i;
      const double cov = mean_io - mean_i * mean_o;
      const double a = cov / (var + lambda);
      a_map.at(y, x) = a;
      b_map.at(y, x) = mean_o - a * mean_i;
    }
  const agf::TensorD a_avg = naive_windowed_mean(a_map, radius);
  const agf::TensorD b_avg = naive_windowed_mean(b_map, radius);
  agf::TensorD out(h, w, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.at(y, x) = a_avg.at(y, x) * static_cast<double>(guidance.at(y, x)) + b_avg.at(y, x);
  return out;
}

// --- metrics ----------------------------------------------------------------

// O(n^2) pairwise AUC: P(score+ > score-) + 0.5 P(tie).
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// --- error measures ----------------------------------------------------------

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  double m = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(va[i]) - static_cast<double>(vb[i])));
  return m;
}

inline double rmse(const agf::Tensor& a, const agf::Tensor& b) {
  double acc = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = static_cast<double>(va[i]) - static_cast<double>(vb[i]);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(va.size()));
}

inline double psnr(const agf::Tensor& a, const agf::Tensor& b) {
  const double e = rmse(a, b);
  return 20.0 * std::log10(1.0 / std::max(e, 1e-300));
}

}  // namespace oracles
