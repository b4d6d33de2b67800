#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "agf/autodiff.hpp"

namespace agf {

namespace {

// Raw mt19937_64 draws scaled explicitly; std::uniform_real_distribution is
// not pinned across standard library implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

TensorD random_tensor(std::mt19937_64& rng, int h, int w, int c, double lo, double hi) {
  TensorD t(h, w, c);
  for (auto& v : t.values()) v = uniform(rng, lo, hi);
  return t;
}

// Values in [0.1, 1] with a random sign: keeps ReLU-style kinks a safe
// distance from every probe.
TensorD random_tensor_away_from_zero(std::mt19937_64& rng, int h, int w, int c) {
  TensorD t(h, w, c);
  for (auto& v : t.values()) {
    const double m = 0.1 + 0.9 * uniform(rng, 0.0, 1.0);
    v = (rng() & 1) ? m : -m;
  }
  return t;
}

struct CheckInput {
  std::string name;
  TensorD* tensor;
};

GradCheckReport run_check(std::vector<CheckInput> inputs,
                          const std::function<TensorD()>& forward,
                          const std::function<std::vector<TensorD>(const TensorD&)>& backward,
                          std::mt19937_64& rng, double epsilon) {
  const TensorD base = forward();
  TensorD upstream = random_tensor(rng, base.height(), base.width(), base.channels(), -1.0, 1.0);
  const std::vector<TensorD> analytic = backward(upstream);

  GradCheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto vals = inputs[k].tensor->values();
    const std::size_t n = vals.size();

    std::vector<std::size_t> probes;
    if (n <= 64) {
      probes.resize(n);
      for (std::size_t i = 0; i < n; ++i) probes[i] = i;
    } else {
      // 64 distinct seeded coordinates.
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      for (std::size_t i = 0; i < 64; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(all[i], all[j]);
        probes.push_back(all[i]);
      }
    }

    double max_err = 0.0;
    const auto grad = analytic[k].values();
    for (std::size_t idx : probes) {
      const double saved = vals[idx];
      vals[idx] = saved + epsilon;
      const double loss_plus = dot(forward(), upstream);
      vals[idx] = saved - epsilon;
      const double loss_minus = dot(forward(), upstream);
      vals[idx] = saved;

      const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
      const double a = grad[idx];
      if (!std::isfinite(numeric) || !std::isfinite(a)) {
        ++report.nan_count;
        continue;
      }
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_err = std::max(max_err, std::abs(a - numeric) / denom);
    }
    report.per_input_max_rel_err.emplace_back(inputs[k].name, max_err);
    report.max_rel_err = std::max(report.max_rel_err, max_err);
  }
  return report;
}

// Branch biases alternate around +-0.6 while weights stay small, so no
// pre-activation sits near the ReLU kink for any probed perturbation.
AttentionWeightsT<double> safe_attention_weights(std::mt19937_64& rng, int channels) {
  auto branch = [&] {
    LinearMapT<double> m{TensorD(channels, channels, 1), TensorD(1, channels, 1)};
    for (auto& v : m.weight.values()) v = uniform(rng, -0.08, 0.08);
    for (int i = 0; i < channels; ++i) m.bias.at(0, i) = (i % 2 == 0) ? 0.3 : -0.3;
    return m;
  };
  LinearMapT<double> head{TensorD(1, channels, 1), TensorD(1, 1, 1)};
  for (auto& v : head.weight.values()) v = uniform(rng, -0.8, 0.8);
  head.bias.at(0, 0) = uniform(rng, -0.3, 0.3);
  return {branch(), branch(), std::move(head)};
}

}  // namespace

const std::vector<std::string>& gradcheck_ops() {
  static const std::vector<std::string> ops = {
      "windowed_sum", "windowed_mean", "bilinear_resize", "add",     "sub",
      "mul",          "div",           "scale",           "relu",    "sigmoid",
      "pow",          "attention_block", "ag_filter"};
  return ops;
}

GradCheckReport gradcheck(const std::string& op_name, std::uint64_t seed, double epsilon) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-1))
    throw ValueOutOfRange("gradcheck epsilon must lie in [1e-6, 1e-1]");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int r = 2;

  if (op_name == "windowed_sum") {
    TensorD x = random_tensor(rng, 6, 6, 1, -1.0, 1.0);
    return run_check({{"input", &x}}, [&] { return windowed_sum(x, r); },
                     [&](const TensorD& u) {
                       return std::vector<TensorD>{windowed_sum_vjp(u, r)};
                     },
                     rng, epsilon);
  }
  if (op_name == "windowed_mean") {
    TensorD x = random_tensor(rng, 6, 6, 1, -1.0, 1.0);
    return run_check({{"input", &x}}, [&] { return windowed_mean(x, r); },
                     [&](const TensorD& u) {
                       return std::vector<TensorD>{windowed_mean_vjp(u, r)};
                     },
                     rng, epsilon);
  }
  if (op_name == "bilinear_resize") {
    TensorD x = random_tensor(rng, 6, 6, 2, -1.0, 1.0);
    return run_check({{"input", &x}}, [&] { return bilinear_resize(x, 11, 9); },
                     [&](const TensorD& u) {
                       return std::vector<TensorD>{bilinear_resize_vjp(u, 6, 6)};
                     },
                     rng, epsilon);
  }
  if (op_name == "add" || op_name == "sub" || op_name == "mul" || op_name == "div") {
    TensorD a = random_tensor(rng, 6, 6, 1, -1.0, 1.0);
    TensorD b = op_name == "div" ? random_tensor(rng, 6, 6, 1, 0.5, 1.5)
                                 : random_tensor(rng, 6, 6, 1, -1.0, 1.0);
    std::function<TensorD()> fwd;
    std::function<std::vector<TensorD>(const TensorD&)> bwd;
    if (op_name == "add") {
      fwd = [&] { return add(a, b); };
      bwd = [&](const TensorD& u) { return std::vector<TensorD>{u, u}; };
    } else if (op_name == "sub") {
      fwd = [&] { return sub(a, b); };
      bwd = [&](const TensorD& u) { return std::vector<TensorD>{u, scale(u, -1.0)}; };
    } else if (op_name == "mul") {
      fwd = [&] { return mul(a, b); };
      bwd = [&](const TensorD& u) { return std::vector<TensorD>{mul(u, b), mul(u, a)}; };
    } else {
      fwd = [&] { return div(a, b); };
      bwd = [&](const TensorD& u) {
        return std::vector<TensorD>{div(u, b), scale(div(mul(u, a), mul(b, b)), -1.0)};
      };
    }
    return run_check({{"lhs", &a}, {"rhs", &b}}, fwd, bwd, rng, epsilon);
  }
  if (op_name == "scale") {
    TensorD x = random_tensor(rng, 6, 6, 1, -1.0, 1.0);
    const double s = 1.7;
    return run_check({{"input", &x}}, [&] { return scale(x, s); },
                     [&](const TensorD& u) { return std::vector<TensorD>{scale(u, s)}; }, rng,
                     epsilon);
  }
  if (op_name == "relu") {
    TensorD x = random_tensor_away_from_zero(rng, 6, 6, 1);
    return run_check({{"input", &x}}, [&] { return relu(x); },
                     [&](const TensorD& u) { return std::vector<TensorD>{relu_vjp(u, x)}; }, rng,
                     epsilon);
  }
  if (op_name == "sigmoid") {
    TensorD x = random_tensor(rng, 6, 6, 1, -2.0, 2.0);
    return run_check({{"input", &x}}, [&] { return sigmoid(x); },
                     [&](const TensorD& u) {
                       return std::vector<TensorD>{sigmoid_vjp(u, sigmoid(x))};
                     },
                     rng, epsilon);
  }
  if (op_name == "pow") {
    TensorD x = random_tensor(rng, 6, 6, 1, 0.3, 1.7);
    const double p = 1.7;
    return run_check({{"input", &x}}, [&] { return pow_elem(x, p); },
                     [&](const TensorD& u) { return std::vector<TensorD>{pow_vjp(u, x, p)}; },
                     rng, epsilon);
  }
  if (op_name == "attention_block") {
    const int channels = 3;
    TensorD filtering = random_tensor(rng, 5, 5, channels, -1.0, 1.0);
    TensorD guidance = random_tensor(rng, 5, 5, channels, -1.0, 1.0);
    AttentionWeightsT<double> w = safe_attention_weights(rng, channels);
    auto fwd = [&] { return attention_block(filtering, guidance, w); };
    auto bwd = [&](const TensorD& u) {
      auto g = attention_block_vjp(filtering, guidance, w, u);
      return std::vector<TensorD>{g.d_filtering,
                                  g.d_guidance,
                                  g.d_weights.branch_filtering.weight,
                                  g.d_weights.branch_filtering.bias,
                                  g.d_weights.branch_guidance.weight,
                                  g.d_weights.branch_guidance.bias,
                                  g.d_weights.head.weight,
                                  g.d_weights.head.bias};
    };
    return run_check({{"filtering", &filtering},
                      {"guidance", &guidance},
                      {"branch_o.weight", &w.branch_filtering.weight},
                      {"branch_o.bias", &w.branch_filtering.bias},
                      {"branch_i.weight", &w.branch_guidance.weight},
                      {"branch_i.bias", &w.branch_guidance.bias},
                      {"head.weight", &w.head.weight},
                      {"head.bias", &w.head.bias}},
                     fwd, bwd, rng, epsilon);
  }
  if (op_name == "ag_filter") {
    // lambda well above the default: the checked instance must keep slope
    // denominators away from zero or central-difference truncation at
    // epsilon=1e-3 swamps the 1e-4 verdict.
    const FilterParams params{2, 0.1f};
    TensorD guidance = random_tensor(rng, 12, 12, 1, 0.0, 1.0);
    TensorD filtering = random_tensor(rng, 6, 6, 1, 0.0, 1.0);
    TensorD attention = random_tensor(rng, 6, 6, 1, 0.3, 0.9);
    auto fwd = [&] { return attention_guided_filter(guidance, filtering, attention, params); };
    auto bwd = [&](const TensorD& u) {
      auto g = ag_filter_vjp(guidance, filtering, attention, params, u);
      return std::vector<TensorD>{g.d_guidance, g.d_filtering, g.d_attention};
    };
    return run_check(
        {{"guidance", &guidance}, {"filtering", &filtering}, {"attention", &attention}}, fwd, bwd,
        rng, epsilon);
  }
  std::string known;
  for (const auto& name : gradcheck_ops()) known += " " + name;
  throw ValidationError("unknown gradcheck op '" + op_name + "'; known ops:" + known);
}

}  // namespace agf
