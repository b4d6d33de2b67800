#pragma once

#include <limits>
#include <string>
#include <vector>

#include "agf/tensor.hpp"

namespace agf {

// One 1x1 channel-mixing map: out = weight * in + bias per pixel.
// weight is stored as an out_channels x in_channels tensor (H = out, W = in),
// bias as a 1 x out_channels row.
template <typename S>
struct LinearMapT {
  TensorT<S> weight;
  TensorT<S> bias;

  int in_channels() const { return weight.width(); }
  int out_channels() const { return weight.height(); }
};

// Parameters of the attention block: one channel-mixing branch per input and
// a head collapsing the fused features to a single channel.
template <typename S>
struct AttentionWeightsT {
  LinearMapT<S> branch_filtering;  // applied to O
  LinearMapT<S> branch_guidance;   // applied to I_l
  LinearMapT<S> head;              // C -> 1 projection

  int channels() const { return branch_filtering.in_channels(); }

  // Internal consistency; the match against actual inputs happens at
  // application time.
  void validate() const {
    auto check_map = [](const LinearMapT<S>& m, const char* name, int out_expected) {
      if (m.weight.channels() != 1 || m.bias.channels() != 1)
        throw DimensionMismatch(std::string(name) + ": parameter tensors must be single-channel");
      if (out_expected > 0 && m.out_channels() != out_expected)
        throw DimensionMismatch(std::string(name) + ": unexpected output channel count");
      if (m.bias.height() != 1 || m.bias.width() != m.out_channels())
        throw DimensionMismatch(std::string(name) + ": bias length must equal output channels");
      if (!m.weight.all_finite() || !m.bias.all_finite())
        throw DimensionMismatch(std::string(name) + ": parameters must be finite");
    };
    check_map(branch_filtering, "branch_o", 0);
    check_map(branch_guidance, "branch_i", 0);
    check_map(head, "head", 1);
    const int c = branch_filtering.in_channels();
    if (branch_filtering.out_channels() != c || branch_guidance.in_channels() != c ||
        branch_guidance.out_channels() != c || head.in_channels() != c)
      throw DimensionMismatch("branch and head channel counts are inconsistent");
  }
};

using LinearMap = LinearMapT<float>;
using AttentionWeights = AttentionWeightsT<float>;

// Untrained default: branches average toward identity/C, head mixes channels
// uniformly. Produces a smooth content-dependent map without saturating the
// sigmoid.
AttentionWeights default_attention_weights(int channels);

// Named-entry archive of the six parameter blocks; round trips are bit-exact.
void save_weights(const std::string& path, const AttentionWeights& weights);
AttentionWeights load_weights(const std::string& path);

template <typename To, typename From>
LinearMapT<To> linear_map_cast(const LinearMapT<From>& m) {
  return {tensor_cast<To>(m.weight), tensor_cast<To>(m.bias)};
}

template <typename To, typename From>
AttentionWeightsT<To> attention_weights_cast(const AttentionWeightsT<From>& w) {
  return {linear_map_cast<To>(w.branch_filtering), linear_map_cast<To>(w.branch_guidance),
          linear_map_cast<To>(w.head)};
}

// Forward pass of the attention block:
//   T = sigmoid( head( relu( branch_o(O) + branch_i(I_l) ) ) )
// All mixing is per pixel across channels; there is no spatial coupling.
// The result is clamped to the largest representable open interval inside
// (0, 1) so downstream attention weights stay strictly positive even when the
// sigmoid saturates.
template <typename S>
TensorT<S> attention_block(const TensorT<S>& filtering, const TensorT<S>& guidance_low,
                           const AttentionWeightsT<S>& weights) {
  if (!filtering.same_shape(guidance_low))
    throw ShapeMismatch("attention_block: inputs must share H x W x C");
  weights.validate();
  const int c = filtering.channels();
  if (weights.channels() != c)
    throw WeightDimensionMismatch("attention weights expect " +
                                  std::to_string(weights.channels()) + " channels, inputs have " +
                                  std::to_string(c));

  const S lo = std::numeric_limits<S>::min();
  const S hi = S(1) - std::numeric_limits<S>::epsilon() / 2;
  const std::size_t n = filtering.plane_size();
  TensorT<S> out(filtering.height(), filtering.width(), 1);
  S* po = out.plane(0);

  std::vector<double> fused(static_cast<std::size_t>(c));
  const auto& wo = weights.branch_filtering;
  const auto& wi = weights.branch_guidance;
  const auto& wh = weights.head;
  for (std::size_t p = 0; p < n; ++p) {
    for (int oc = 0; oc < c; ++oc) {
      double acc = static_cast<double>(wo.bias.at(0, oc)) + static_cast<double>(wi.bias.at(0, oc));
      for (int ic = 0; ic < c; ++ic) {
        acc += static_cast<double>(wo.weight.at(oc, ic)) *
                   static_cast<double>(filtering.plane(ic)[p]) +
               static_cast<double>(wi.weight.at(oc, ic)) *
                   static_cast<double>(guidance_low.plane(ic)[p]);
      }
      fused[oc] = acc > 0.0 ? acc : 0.0;  // ReLU on the summed branches
    }
    double z = static_cast<double>(wh.bias.at(0, 0));
    for (int ic = 0; ic < c; ++ic)
      z += static_cast<double>(wh.weight.at(0, ic)) * fused[ic];
    const double t = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    po[p] = std::clamp(static_cast<S>(t), lo, hi);
  }
  return out;
}

}  // namespace agf
