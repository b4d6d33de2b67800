#include <cmath>

#include "agf/autodiff.hpp"

namespace agf {

namespace {

double mean_squared_error(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = double(va[i]) - double(vb[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(va.size());
}

void axpy(Tensor& dst, const Tensor& grad, float alpha) {
  auto vd = dst.values();
  const auto vg = grad.values();
  for (std::size_t i = 0; i < vd.size(); ++i) vd[i] += alpha * vg[i];
}

bool weights_finite(const AttentionWeights& w) {
  return w.branch_filtering.weight.all_finite() && w.branch_filtering.bias.all_finite() &&
         w.branch_guidance.weight.all_finite() && w.branch_guidance.bias.all_finite() &&
         w.head.weight.all_finite() && w.head.bias.all_finite();
}

}  // namespace

FitResult fit_attention(const Tensor& guidance, const Tensor& filtering, const Tensor& target,
                        const AttentionWeights& initial, int steps, float learning_rate,
                        const FilterParams& params) {
  params.validate();
  initial.validate();
  if (steps < 0) throw ValueOutOfRange("fit steps must be nonnegative");
  if (!(learning_rate >= 0.0f)) throw ValueOutOfRange("learning rate must be nonnegative");
  if (target.height() != guidance.height() || target.width() != guidance.width() ||
      target.channels() != guidance.channels())
    throw ShapeMismatch("fit target must match the filter output shape");

  const Tensor guidance_low =
      bilinear_resize(guidance, filtering.height(), filtering.width());

  FitResult result;
  result.weights = initial;
  result.losses.reserve(static_cast<std::size_t>(steps) + 1);

  const float upstream_scale = 2.0f / static_cast<float>(target.size());
  for (int step = 0; step <= steps; ++step) {
    const Tensor attention = attention_block(filtering, guidance_low, result.weights);
    const Tensor output = attention_guided_filter(guidance, filtering, attention, params);
    const double loss = mean_squared_error(output, target);
    if (!std::isfinite(loss)) throw DivergedLoss("loss became non-finite at step " +
                                                 std::to_string(step));
    result.losses.push_back(loss);
    if (step == steps) break;

    const Tensor upstream = scale(sub(output, target), upstream_scale);
    const GradBundle bundle = ag_filter_vjp(guidance, filtering, attention, params, upstream);
    const auto grads =
        attention_block_vjp(filtering, guidance_low, result.weights, bundle.d_attention);

    axpy(result.weights.branch_filtering.weight, grads.d_weights.branch_filtering.weight,
         -learning_rate);
    axpy(result.weights.branch_filtering.bias, grads.d_weights.branch_filtering.bias,
         -learning_rate);
    axpy(result.weights.branch_guidance.weight, grads.d_weights.branch_guidance.weight,
         -learning_rate);
    axpy(result.weights.branch_guidance.bias, grads.d_weights.branch_guidance.bias,
         -learning_rate);
    axpy(result.weights.head.weight, grads.d_weights.head.weight, -learning_rate);
    axpy(result.weights.head.bias, grads.d_weights.head.bias, -learning_rate);
    if (!weights_finite(result.weights))
      throw DivergedLoss("weights became non-finite at step " + std::to_string(step));
  }
  return result;
}

}  // namespace agf
