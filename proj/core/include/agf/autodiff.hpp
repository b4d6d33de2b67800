#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agf/agfilter.hpp"
#include "agf/attention.hpp"
#include "agf/boxfilter.hpp"
#include "agf/tensor.hpp"

namespace agf {

// ---------------------------------------------------------------------------
// Per-primitive vector-Jacobian products. Each returns u^T J for the forward
// primitive's Jacobian J, evaluated against the upstream gradient u.
// ---------------------------------------------------------------------------

// windowed_sum is self-adjoint: pixel j lies in the window of i exactly when
// i lies in the window of j.
template <typename S>
TensorT<S> windowed_sum_vjp(const TensorT<S>& upstream, int radius) {
  return windowed_sum(upstream, radius);
}

// windowed_mean divides each window sum by the truncated population N_i, so
// the adjoint spreads upstream/N_i back over the same windows.
template <typename S>
TensorT<S> windowed_mean_vjp(const TensorT<S>& upstream, int radius) {
  const TensorT<S> counts = pixel_counts<S>(upstream.height(), upstream.width(), radius);
  return windowed_sum(div(upstream, counts), radius);
}

// Scatters each output gradient to its four source taps with the forward's
// blend weights.
template <typename S>
TensorT<S> bilinear_resize_vjp(const TensorT<S>& upstream, int src_h, int src_w) {
  const auto ty = detail::make_resize_taps(src_h, upstream.height());
  const auto tx = detail::make_resize_taps(src_w, upstream.width());
  TensorT<S> grad(src_h, src_w, upstream.channels());
  for (int c = 0; c < upstream.channels(); ++c) {
    const S* pu = upstream.plane(c);
    S* pg = grad.plane(c);
    for (int y = 0; y < upstream.height(); ++y) {
      const double fy = ty.frac[y];
      S* row0 = pg + static_cast<std::size_t>(ty.lo[y]) * src_w;
      S* row1 = pg + static_cast<std::size_t>(ty.hi[y]) * src_w;
      for (int x = 0; x < upstream.width(); ++x) {
        const double fx = tx.frac[x];
        const double u = static_cast<double>(pu[static_cast<std::size_t>(y) * upstream.width() + x]);
        row0[tx.lo[x]] += static_cast<S>((1.0 - fy) * (1.0 - fx) * u);
        row0[tx.hi[x]] += static_cast<S>((1.0 - fy) * fx * u);
        row1[tx.lo[x]] += static_cast<S>(fy * (1.0 - fx) * u);
        row1[tx.hi[x]] += static_cast<S>(fy * fx * u);
      }
    }
  }
  return grad;
}

// Reduces a gradient back to the shape of a broadcast operand: a tensor that
// entered an elementwise op with one channel receives the channel sum.
template <typename S>
TensorT<S> reduce_to_channels(const TensorT<S>& grad, int channels) {
  if (grad.channels() == channels) return grad;
  if (channels != 1) throw ShapeMismatch("reduce_to_channels: invalid broadcast reduction");
  return channel_sum(grad);
}

template <typename S>
TensorT<S> relu_vjp(const TensorT<S>& upstream, const TensorT<S>& input) {
  return detail::binary_op(upstream, input, "relu_vjp",
                           [](S u, S x) { return x > S(0) ? u : S(0); });
}

// Expects the forward *output* y = sigmoid(x); d/dx = y (1 - y).
template <typename S>
TensorT<S> sigmoid_vjp(const TensorT<S>& upstream, const TensorT<S>& output) {
  return detail::binary_op(upstream, output, "sigmoid_vjp",
                           [](S u, S y) { return u * y * (S(1) - y); });
}

template <typename S>
TensorT<S> pow_vjp(const TensorT<S>& upstream, const TensorT<S>& input, S exponent) {
  return detail::binary_op(upstream, input, "pow_vjp", [exponent](S u, S x) {
    return u * exponent * std::pow(x, exponent - S(1));
  });
}

// ---------------------------------------------------------------------------
// End-to-end adjoint of the attention guided filter.
// ---------------------------------------------------------------------------

template <typename S>
struct GradBundleT {
  TensorT<S> d_guidance;   // dL/dI
  TensorT<S> d_filtering;  // dL/dO
  TensorT<S> d_attention;  // dL/dT
};

using GradBundle = GradBundleT<float>;

// Composes the primitive adjoints through the exact forward graph recorded in
// the trace. The upstream gradient lives at the output (guidance) resolution.
template <typename S>
GradBundleT<S> ag_filter_vjp(const TensorT<S>& guidance, const TensorT<S>& filtering,
                             const TensorT<S>& attention, const FilterParams& params,
                             const TensorT<S>& upstream) {
  if (upstream.height() != guidance.height() || upstream.width() != guidance.width() ||
      upstream.channels() != guidance.channels())
    throw ShapeMismatch("upstream gradient must match the filter output shape");

  FilterTrace<S> fwd;
  attention_guided_filter(guidance, filtering, attention, params, &fwd);

  const int r = params.radius;
  const int low_h = filtering.height();
  const int low_w = filtering.width();
  const int fc = filtering.channels();
  const TensorT<S> counts = pixel_counts<S>(low_h, low_w, r);
  auto mean_vjp = [&](const TensorT<S>& u) { return windowed_sum(div(u, counts), r); };

  // out = A_h * I + B_h
  TensorT<S> d_guidance = mul(upstream, fwd.slope_high);
  const TensorT<S> d_slope_high = mul(upstream, guidance);
  const TensorT<S>& d_offset_high = upstream;

  // A_h, B_h = resize(A_l), resize(B_l)
  const TensorT<S> d_slope_low = bilinear_resize_vjp(d_slope_high, low_h, low_w);
  const TensorT<S> d_offset_low = bilinear_resize_vjp(d_offset_high, low_h, low_w);

  // A_l, B_l = windowed_mean(a), windowed_mean(b)
  TensorT<S> d_slope = mean_vjp(d_slope_low);
  const TensorT<S> d_offset = mean_vjp(d_offset_low);

  // b = (mean(TO) - a mean(TI)) / mean(T)
  const TensorT<S> d_offset_scaled = div(d_offset, fwd.mean_t);
  TensorT<S> d_mean_to = reduce_to_channels(d_offset_scaled, fwd.mean_to.channels());
  d_slope = sub(d_slope, mul(d_offset_scaled, fwd.mean_ti));
  TensorT<S> d_mean_ti = scale(mul(d_offset_scaled, fwd.slope), S(-1));
  TensorT<S> d_mean_t = scale(channel_sum(mul(d_offset_scaled, fwd.offset)), S(-1));

  // a = num / den
  const TensorT<S> d_numer = div(d_slope, fwd.denom);
  const TensorT<S> d_denom = scale(mul(d_numer, fwd.slope), S(-1));

  // num = mean(T^2 I O) - q mean(TO)
  const TensorT<S>& d_mean_t2io = d_numer;
  TensorT<S> d_ratio = scale(mul(d_numer, fwd.mean_to), S(-1));
  d_mean_to = sub(d_mean_to, reduce_to_channels(mul(d_numer, fwd.ratio), fwd.mean_to.channels()));

  // den = mean(T^2 I^2) - q mean(TI) + lambda
  const TensorT<S>& d_mean_t2ii = d_denom;
  d_ratio = sub(d_ratio, mul(d_denom, fwd.mean_ti));
  d_mean_ti = sub(d_mean_ti, mul(d_denom, fwd.ratio));

  // q = sum(T^2 I) / sum(T)
  const TensorT<S> d_sum_t2i = div(d_ratio, fwd.sum_t);
  const TensorT<S> d_sum_t =
      scale(channel_sum(div(mul(d_ratio, fwd.ratio), fwd.sum_t)), S(-1));

  // Window statistics back to their product maps.
  const TensorT<S> d_t2io = mean_vjp(d_mean_t2io);
  const TensorT<S> d_t2ii = mean_vjp(d_mean_t2ii);
  const TensorT<S> d_ti = mean_vjp(d_mean_ti);
  const TensorT<S> d_to = mean_vjp(d_mean_to);
  TensorT<S> d_attention = mean_vjp(d_mean_t);
  TensorT<S> d_t2i = windowed_sum_vjp(d_sum_t2i, r);
  d_attention = add(d_attention, windowed_sum_vjp(d_sum_t, r));

  // Product maps back to I_l, O, T.
  // t2io = t2i * O
  d_t2i = add(d_t2i, mul(d_t2io, filtering));
  TensorT<S> d_filtering = reduce_to_channels(mul(d_t2io, fwd.t2i), fc);
  // t2ii = t2i * I_l
  d_t2i = add(d_t2i, mul(d_t2ii, fwd.guidance_low));
  TensorT<S> d_guidance_low = mul(d_t2ii, fwd.t2i);
  // t2i = t2 * I_l
  const TensorT<S> d_weighted_sq = channel_sum(mul(d_t2i, fwd.guidance_low));
  d_guidance_low = add(d_guidance_low, mul(d_t2i, fwd.weighted_sq));
  // to = T * O
  d_attention = add(d_attention, channel_sum(mul(d_to, filtering)));
  d_filtering = add(d_filtering, reduce_to_channels(mul(d_to, attention), fc));
  // ti = T * I_l
  d_attention = add(d_attention, channel_sum(mul(d_ti, fwd.guidance_low)));
  d_guidance_low = add(d_guidance_low, mul(d_ti, attention));
  // t2 = T * T
  d_attention = add(d_attention, scale(mul(d_weighted_sq, attention), S(2)));

  // I_l = resize(I)
  d_guidance =
      add(d_guidance, bilinear_resize_vjp(d_guidance_low, guidance.height(), guidance.width()));

  return {std::move(d_guidance), std::move(d_filtering), std::move(d_attention)};
}

// ---------------------------------------------------------------------------
// Attention block adjoint: gradients for both inputs and all six parameter
// blocks.
// ---------------------------------------------------------------------------

template <typename S>
struct AttentionGradsT {
  TensorT<S> d_filtering;
  TensorT<S> d_guidance;
  AttentionWeightsT<S> d_weights;
};

template <typename S>
AttentionGradsT<S> attention_block_vjp(const TensorT<S>& filtering,
                                       const TensorT<S>& guidance_low,
                                       const AttentionWeightsT<S>& weights,
                                       const TensorT<S>& upstream) {
  if (!filtering.same_shape(guidance_low))
    throw ShapeMismatch("attention_block_vjp: inputs must share H x W x C");
  weights.validate();
  if (upstream.channels() != 1 || upstream.height() != filtering.height() ||
      upstream.width() != filtering.width())
    throw ShapeMismatch("attention_block_vjp: upstream must be a single-channel map");
  const int c = filtering.channels();
  if (weights.channels() != c)
    throw WeightDimensionMismatch("attention weights do not match the input channel count");

  AttentionGradsT<S> g;
  g.d_filtering = TensorT<S>(filtering.height(), filtering.width(), c);
  g.d_guidance = TensorT<S>(filtering.height(), filtering.width(), c);
  LinearMapT<S> zo{TensorT<S>(c, c, 1), TensorT<S>(1, c, 1)};
  LinearMapT<S> zi{TensorT<S>(c, c, 1), TensorT<S>(1, c, 1)};
  LinearMapT<S> zh{TensorT<S>(1, c, 1), TensorT<S>(1, 1, 1)};

  const auto& wo = weights.branch_filtering;
  const auto& wi = weights.branch_guidance;
  const auto& wh = weights.head;

  // Double accumulators for the weight gradients; pixel sums can be long.
  std::vector<double> acc_wo(static_cast<std::size_t>(c) * c, 0.0);
  std::vector<double> acc_wi(static_cast<std::size_t>(c) * c, 0.0);
  std::vector<double> acc_bo(static_cast<std::size_t>(c), 0.0);
  std::vector<double> acc_wh(static_cast<std::size_t>(c), 0.0);
  double acc_bh = 0.0;

  const std::size_t n = filtering.plane_size();
  std::vector<double> fused(static_cast<std::size_t>(c));
  std::vector<bool> active(static_cast<std::size_t>(c));
  const S* pu = upstream.plane(0);
  for (std::size_t p = 0; p < n; ++p) {
    // Recompute the forward pixel exactly as attention_block does.
    for (int oc = 0; oc < c; ++oc) {
      double acc = static_cast<double>(wo.bias.at(0, oc)) + static_cast<double>(wi.bias.at(0, oc));
      for (int ic = 0; ic < c; ++ic) {
        acc += static_cast<double>(wo.weight.at(oc, ic)) *
                   static_cast<double>(filtering.plane(ic)[p]) +
               static_cast<double>(wi.weight.at(oc, ic)) *
                   static_cast<double>(guidance_low.plane(ic)[p]);
      }
      active[oc] = acc > 0.0;
      fused[oc] = active[oc] ? acc : 0.0;
    }
    double z = static_cast<double>(wh.bias.at(0, 0));
    for (int ic = 0; ic < c; ++ic)
      z += static_cast<double>(wh.weight.at(0, ic)) * fused[ic];
    const double y = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));

    const double dz = static_cast<double>(pu[p]) * y * (1.0 - y);
    acc_bh += dz;
    for (int oc = 0; oc < c; ++oc) {
      acc_wh[oc] += dz * fused[oc];
      if (!active[oc]) continue;
      const double ds = dz * static_cast<double>(wh.weight.at(0, oc));
      acc_bo[oc] += ds;
      for (int ic = 0; ic < c; ++ic) {
        acc_wo[static_cast<std::size_t>(oc) * c + ic] +=
            ds * static_cast<double>(filtering.plane(ic)[p]);
        acc_wi[static_cast<std::size_t>(oc) * c + ic] +=
            ds * static_cast<double>(guidance_low.plane(ic)[p]);
        g.d_filtering.plane(ic)[p] +=
            static_cast<S>(ds * static_cast<double>(wo.weight.at(oc, ic)));
        g.d_guidance.plane(ic)[p] +=
            static_cast<S>(ds * static_cast<double>(wi.weight.at(oc, ic)));
      }
    }
  }

  for (int oc = 0; oc < c; ++oc) {
    zo.bias.at(0, oc) = static_cast<S>(acc_bo[oc]);
    zi.bias.at(0, oc) = static_cast<S>(acc_bo[oc]);  // branch biases enter as a sum
    zh.weight.at(0, oc) = static_cast<S>(acc_wh[oc]);
    for (int ic = 0; ic < c; ++ic) {
      zo.weight.at(oc, ic) = static_cast<S>(acc_wo[static_cast<std::size_t>(oc) * c + ic]);
      zi.weight.at(oc, ic) = static_cast<S>(acc_wi[static_cast<std::size_t>(oc) * c + ic]);
    }
  }
  zh.bias.at(0, 0) = static_cast<S>(acc_bh);
  g.d_weights = {std::move(zo), std::move(zi), std::move(zh)};
  return g;
}

// ---------------------------------------------------------------------------
// Finite-difference verification and the gradient-descent fitting demo.
// ---------------------------------------------------------------------------

struct GradCheckReport {
  // One entry per differentiable input of the op, in the op's natural order.
  std::vector<std::pair<std::string, double>> per_input_max_rel_err;
  double max_rel_err = 0.0;
  int nan_count = 0;
};

// Central-difference check of the analytic adjoints, run entirely in double
// precision. Probes every coordinate on small inputs and a seeded random
// subset of at least 64 otherwise. Relative errors use
// max(|analytic|, |numeric|, 1e-8) as denominator.
GradCheckReport gradcheck(const std::string& op_name, std::uint64_t seed, double epsilon);

// Ops accepted by gradcheck.
const std::vector<std::string>& gradcheck_ops();

struct FitResult {
  AttentionWeights weights;
  std::vector<double> losses;  // loss at the initial weights and after every step
};

// Plain gradient descent on the mean squared error between the attention
// guided filter output (attention from the current weights) and a target at
// guidance resolution.
FitResult fit_attention(const Tensor& guidance, const Tensor& filtering, const Tensor& target,
                        const AttentionWeights& initial, int steps, float learning_rate,
                        const FilterParams& params = {});

}  // namespace agf
