#pragma once

#include <string>
#include <utility>

#include "agf/boxfilter.hpp"
#include "agf/tensor.hpp"

namespace agf {

// Window radius and least-squares regularizer of the attention guided filter.
struct FilterParams {
  int radius = 2;
  float lambda = 0.01f;

  void validate() const {
    if (radius < 1) throw InvalidDimension("filter radius must be at least 1");
    if (!(lambda >= 0.0f)) throw ValueOutOfRange("regularizer lambda must be nonnegative");
  }
};

enum class CoefficientGrid { low, high };

// Paired slope/offset maps of the local linear model, tagged with the grid
// they live on.
template <typename S>
struct AGCoefficientsT {
  TensorT<S> slope;
  TensorT<S> offset;
  CoefficientGrid grid = CoefficientGrid::low;
};

using AGCoefficients = AGCoefficientsT<float>;

// Everything the forward pass computes, kept alive so the backward pass can
// reuse the identical intermediates.
template <typename S>
struct FilterTrace {
  TensorT<S> guidance_low;                       // I_l
  TensorT<S> weighted_sq;                        // T*T
  TensorT<S> ti, to, t2i, t2ii, t2io;            // products feeding the window stats
  TensorT<S> mean_t, sum_t;                      // window stats of T
  TensorT<S> mean_ti, mean_to, mean_t2ii, mean_t2io, sum_t2i;
  TensorT<S> ratio;                              // sum(T^2 I) / sum(T) per window
  TensorT<S> numer, denom;                       // slope numerator / denominator
  TensorT<S> slope, offset;                      // per-window a, b
  AGCoefficientsT<S> averaged;                   // A_l, B_l
  TensorT<S> slope_high, offset_high;            // A_h, B_h
  TensorT<S> output;                             // final blend
};

namespace detail {

template <typename S>
void require_attention_positive(const TensorT<S>& attention) {
  if (attention.channels() != 1)
    throw ShapeMismatch("attention map must have a single channel");
  for (S v : attention.values())
    if (!(v > S(0))) throw AttentionOutOfRange("attention weights must be strictly positive");
}

template <typename S>
bool all_ones(const TensorT<S>& t) {
  for (S v : t.values())
    if (v != S(1)) return false;
  return true;
}

// a = numer / denom with the degeneracy guard. Under the plain guided filter
// (T identically 1, lambda > 0) the denominator is a window variance plus
// lambda, so anything below lambda/2 indicates a broken invariant; with
// lambda = 0 a vanishing denominator is a degenerate instance.
template <typename S>
TensorT<S> checked_slope_divide(const TensorT<S>& numer, const TensorT<S>& denom, double lambda,
                                bool uniform_attention) {
  const double floor =
      (uniform_attention && lambda > 0.0) ? lambda / 2.0 : 1e-12;
  TensorT<S> out(numer.height(), numer.width(), numer.channels());
  const auto vn = numer.values();
  const auto vd = denom.values();
  auto vo = out.values();
  for (std::size_t i = 0; i < vn.size(); ++i) {
    const double d = static_cast<double>(vd[i]);
    if (std::abs(d) < floor)
      throw DegenerateDenominator("slope denominator " + std::to_string(d) +
                                  " below safe floor " + std::to_string(floor));
    vo[i] = static_cast<S>(static_cast<double>(vn[i]) / d);
  }
  return out;
}

}  // namespace detail

// Per-window linear coefficients (a_k, b_k) of the attention-weighted least
// squares fit of O against the low-resolution guidance I_l:
//
//   a_k = (mean(T^2 I O) - q mean(T O)) / (mean(T^2 I^2) - q mean(T I) + lambda)
//   b_k = (mean(T O) - a_k mean(T I)) / mean(T)
//
// where every mean is taken over the truncated window at k and
// q = sum(T^2 I) / sum(T) folds the per-window attention ratio so it is never
// materialized per pixel. Guidance and filtering channels pair one-to-one; a
// single-channel filtering input pairs with every guidance channel.
//
// When `trace` is non-null every intermediate map is recorded for the
// backward pass.
template <typename S>
std::pair<TensorT<S>, TensorT<S>> per_window_coefficients(const TensorT<S>& guidance_low,
                                                          const TensorT<S>& filtering,
                                                          const TensorT<S>& attention,
                                                          const FilterParams& params,
                                                          FilterTrace<S>* trace = nullptr) {
  params.validate();
  if (guidance_low.height() != filtering.height() || guidance_low.width() != filtering.width())
    throw ShapeMismatch("guidance and filtering maps must share spatial dimensions");
  if (guidance_low.channels() != filtering.channels() && filtering.channels() != 1)
    throw ShapeMismatch(
        "filtering channels must match guidance channels or broadcast from one channel");
  if (attention.height() != guidance_low.height() || attention.width() != guidance_low.width())
    throw ShapeMismatch("attention map must match the low-resolution grid");
  detail::require_attention_positive(attention);

  const int r = params.radius;
  const double lambda = static_cast<double>(params.lambda);
  const bool uniform = detail::all_ones(attention);

  // Window statistics run in double regardless of S: the slope numerator and
  // denominator are differences of nearly equal window moments, and constant
  // guidance must cancel to a zero slope up to double rounding.
  const TensorD att = tensor_cast<double>(attention);
  const TensorD gl = tensor_cast<double>(guidance_low);
  const TensorD fl = tensor_cast<double>(filtering);

  const TensorD weighted_sq = mul(att, att);        // T^2
  const TensorD ti = mul(att, gl);                  // T I
  const TensorD to = mul(att, fl);                  // T O
  const TensorD t2i = mul(weighted_sq, gl);         // T^2 I
  const TensorD t2ii = mul(t2i, gl);                // T^2 I^2
  const TensorD t2io = mul(t2i, fl);                // T^2 I O

  const TensorD mean_t = windowed_mean(att, r);
  const TensorD sum_t = windowed_sum(att, r);
  const TensorD mean_ti = windowed_mean(ti, r);
  const TensorD mean_to = windowed_mean(to, r);
  const TensorD mean_t2ii = windowed_mean(t2ii, r);
  const TensorD mean_t2io = windowed_mean(t2io, r);
  const TensorD sum_t2i = windowed_sum(t2i, r);

  const TensorD ratio = div(sum_t2i, sum_t);        // q
  const TensorD numer = sub(mean_t2io, mul(ratio, mean_to));
  const TensorD denom = add(sub(mean_t2ii, mul(ratio, mean_ti)), lambda);
  const TensorD slope_d = detail::checked_slope_divide(numer, denom, lambda, uniform);
  const TensorD offset_d = div(sub(mean_to, mul(slope_d, mean_ti)), mean_t);

  TensorT<S> slope = tensor_cast<S>(slope_d);
  TensorT<S> offset = tensor_cast<S>(offset_d);
  if (trace) {
    trace->weighted_sq = tensor_cast<S>(weighted_sq);
    trace->ti = tensor_cast<S>(ti);
    trace->to = tensor_cast<S>(to);
    trace->t2i = tensor_cast<S>(t2i);
    trace->t2ii = tensor_cast<S>(t2ii);
    trace->t2io = tensor_cast<S>(t2io);
    trace->mean_t = tensor_cast<S>(mean_t);
    trace->sum_t = tensor_cast<S>(sum_t);
    trace->mean_ti = tensor_cast<S>(mean_ti);
    trace->mean_to = tensor_cast<S>(mean_to);
    trace->mean_t2ii = tensor_cast<S>(mean_t2ii);
    trace->mean_t2io = tensor_cast<S>(mean_t2io);
    trace->sum_t2i = tensor_cast<S>(sum_t2i);
    trace->ratio = tensor_cast<S>(ratio);
    trace->numer = tensor_cast<S>(numer);
    trace->denom = tensor_cast<S>(denom);
    trace->slope = slope;
    trace->offset = offset;
  }
  return {std::move(slope), std::move(offset)};
}

// Averages the per-window coefficients over every window that contains each
// pixel, yielding the low-resolution maps A_l, B_l.
template <typename S>
AGCoefficientsT<S> average_coefficients(const TensorT<S>& slope, const TensorT<S>& offset,
                                        const FilterParams& params) {
  params.validate();
  if (!slope.same_shape(offset)) throw ShapeMismatch("slope and offset maps must match");
  return {windowed_mean(slope, params.radius), windowed_mean(offset, params.radius),
          CoefficientGrid::low};
}

// Upsamples the coefficient maps to the guidance resolution and applies the
// linear model: output = A_h * I + B_h.
template <typename S>
TensorT<S> apply_highres(const AGCoefficientsT<S>& coeffs, const TensorT<S>& guidance,
                         FilterTrace<S>* trace = nullptr) {
  if (coeffs.slope.channels() != guidance.channels())
    throw ShapeMismatch("coefficient channels must match guidance channels");
  TensorT<S> slope_high = bilinear_resize(coeffs.slope, guidance.height(), guidance.width());
  TensorT<S> offset_high = bilinear_resize(coeffs.offset, guidance.height(), guidance.width());
  TensorT<S> output = add(mul(slope_high, guidance), offset_high);
  if (trace) {
    trace->slope_high = slope_high;
    trace->offset_high = offset_high;
    trace->output = output;
  }
  return output;
}

// Full pipeline: downsample the guidance to the filtering grid, solve the
// attention-weighted fit per window, average coefficients, upsample them and
// blend with the full-resolution guidance.
template <typename S>
TensorT<S> attention_guided_filter(const TensorT<S>& guidance, const TensorT<S>& filtering,
                                   const TensorT<S>& attention, const FilterParams& params,
                                   FilterTrace<S>* trace = nullptr) {
  params.validate();
  if (filtering.height() > guidance.height() || filtering.width() > guidance.width())
    throw ShapeMismatch("filtering map must not exceed the guidance resolution");
  TensorT<S> guidance_low =
      bilinear_resize(guidance, filtering.height(), filtering.width());
  auto [slope, offset] = per_window_coefficients(guidance_low, filtering, attention, params, trace);
  AGCoefficientsT<S> averaged = average_coefficients(slope, offset, params);
  if (trace) {
    trace->guidance_low = guidance_low;
    trace->averaged = averaged;
  }
  return apply_highres(averaged, guidance, trace);
}

// The original guided filter is the attention guided filter with uniform
// attention.
template <typename S>
TensorT<S> guided_filter(const TensorT<S>& guidance, const TensorT<S>& filtering,
                         const FilterParams& params) {
  const TensorT<S> ones = TensorT<S>::full(filtering.height(), filtering.width(), 1, S(1));
  return attention_guided_filter(guidance, filtering, ones, params);
}

}  // namespace agf
