#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "agf/errors.hpp"

namespace agf {

// Dense H x W x C image / feature map with planar layout: plane c is a
// contiguous row-major H x W block. S is float in the production path and
// double in the shadow path used for gradient verification.
template <typename S>
class TensorT {
public:
  TensorT() = default;

  TensorT(int height, int width, int channels = 1)
      : height_(height), width_(width), channels_(channels) {
    if (height < 1 || width < 1 || channels < 1)
      throw InvalidDimension("tensor dimensions must be at least 1x1x1, got " +
                             std::to_string(height) + "x" + std::to_string(width) + "x" +
                             std::to_string(channels));
    data_.assign(static_cast<std::size_t>(height) * width * channels, S(0));
  }

  static TensorT full(int height, int width, int channels, S value) {
    TensorT t(height, width, channels);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  bool same_shape(const TensorT& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  S* plane(int c) { return data_.data() + plane_size() * c; }
  const S* plane(int c) const { return data_.data() + plane_size() * c; }

  S& at(int y, int x, int c = 0) {
    return data_[plane_size() * c + static_cast<std::size_t>(y) * width_ + x];
  }
  S at(int y, int x, int c = 0) const {
    return data_[plane_size() * c + static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<S> values() { return data_; }
  std::span<const S> values() const { return data_; }

  S min_value() const { return *std::min_element(data_.begin(), data_.end()); }
  S max_value() const { return *std::max_element(data_.begin(), data_.end()); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](S v) { return std::isfinite(v); });
  }

private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<S> data_;
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

namespace detail {

template <typename S>
void require_broadcastable(const TensorT<S>& a, const TensorT<S>& b, const char* op) {
  if (a.height() != b.height() || a.width() != b.width())
    throw ShapeMismatch(std::string(op) + ": spatial dimensions differ");
  if (a.channels() != b.channels() && a.channels() != 1 && b.channels() != 1)
    throw ShapeMismatch(std::string(op) + ": channel counts neither match nor broadcast");
}

// Applies f per element; an operand with C == 1 is broadcast across the
// channels of the other.
template <typename S, typename F>
TensorT<S> binary_op(const TensorT<S>& a, const TensorT<S>& b, const char* op, F&& f) {
  require_broadcastable(a, b, op);
  const int out_c = std::max(a.channels(), b.channels());
  TensorT<S> out(a.height(), a.width(), out_c);
  const std::size_t n = out.plane_size();
  for (int c = 0; c < out_c; ++c) {
    const S* pa = a.plane(a.channels() == 1 ? 0 : c);
    const S* pb = b.plane(b.channels() == 1 ? 0 : c);
    S* po = out.plane(c);
    for (std::size_t i = 0; i < n; ++i) po[i] = f(pa[i], pb[i]);
  }
  return out;
}

template <typename S, typename F>
TensorT<S> unary_op(const TensorT<S>& a, F&& f) {
  TensorT<S> out(a.height(), a.width(), a.channels());
  const auto src = a.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

}  // namespace detail

template <typename S>
TensorT<S> add(const TensorT<S>& a, const TensorT<S>& b) {
  return detail::binary_op(a, b, "add", [](S x, S y) { return x + y; });
}

template <typename S>
TensorT<S> sub(const TensorT<S>& a, const TensorT<S>& b) {
  return detail::binary_op(a, b, "sub", [](S x, S y) { return x - y; });
}

template <typename S>
TensorT<S> mul(const TensorT<S>& a, const TensorT<S>& b) {
  return detail::binary_op(a, b, "mul", [](S x, S y) { return x * y; });
}

// Elementwise division; denominators must stay away from zero.
template <typename S>
TensorT<S> div(const TensorT<S>& a, const TensorT<S>& b) {
  return detail::binary_op(a, b, "div", [](S x, S y) {
    if (std::abs(y) < S(1e-12)) throw DivisionNearZero("div: |denominator| < 1e-12");
    return x / y;
  });
}

template <typename S>
TensorT<S> add(const TensorT<S>& a, S s) {
  return detail::unary_op(a, [s](S x) { return x + s; });
}

template <typename S>
TensorT<S> sub(const TensorT<S>& a, S s) {
  return detail::unary_op(a, [s](S x) { return x - s; });
}

template <typename S>
TensorT<S> div(const TensorT<S>& a, S s) {
  if (std::abs(s) < S(1e-12)) throw DivisionNearZero("div: |scalar denominator| < 1e-12");
  return detail::unary_op(a, [s](S x) { return x / s; });
}

template <typename S>
TensorT<S> scale(const TensorT<S>& a, S s) {
  return detail::unary_op(a, [s](S x) { return x * s; });
}

template <typename S>
TensorT<S> relu(const TensorT<S>& a) {
  return detail::unary_op(a, [](S x) { return x > S(0) ? x : S(0); });
}

template <typename S>
TensorT<S> sigmoid(const TensorT<S>& a) {
  return detail::unary_op(a, [](S x) {
    if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
    const S e = std::exp(x);
    return e / (S(1) + e);
  });
}

// Elementwise power. Negative bases with fractional exponents have no real
// result and are rejected.
template <typename S>
TensorT<S> pow_elem(const TensorT<S>& a, S exponent) {
  return detail::unary_op(a, [exponent](S x) {
    const S r = std::pow(x, exponent);
    if (!std::isfinite(r))
      throw ValueOutOfRange("pow: non-finite result (base " + std::to_string(x) +
                            ", exponent " + std::to_string(exponent) + ")");
    return r;
  });
}

// Sums a tensor across channels into a single plane. Used when reducing
// gradients of channel-broadcast operands.
template <typename S>
TensorT<S> channel_sum(const TensorT<S>& a) {
  TensorT<S> out(a.height(), a.width(), 1);
  S* po = out.plane(0);
  const std::size_t n = out.plane_size();
  for (int c = 0; c < a.channels(); ++c) {
    const S* pa = a.plane(c);
    for (std::size_t i = 0; i < n; ++i) po[i] += pa[i];
  }
  return out;
}

// Replicates a single-channel tensor to the requested channel count.
template <typename S>
TensorT<S> replicate_channels(const TensorT<S>& a, int channels) {
  if (a.channels() == channels) return a;
  if (a.channels() != 1) throw ShapeMismatch("replicate_channels: source must have one channel");
  TensorT<S> out(a.height(), a.width(), channels);
  for (int c = 0; c < channels; ++c)
    std::copy(a.plane(0), a.plane(0) + a.plane_size(), out.plane(c));
  return out;
}

template <typename To, typename From>
TensorT<To> tensor_cast(const TensorT<From>& a) {
  TensorT<To> out(a.height(), a.width(), a.channels());
  const auto src = a.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<To>(src[i]);
  return out;
}

// Inner product accumulated in double; shapes must match exactly.
template <typename S>
double dot(const TensorT<S>& a, const TensorT<S>& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("dot: shapes differ");
  double acc = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) acc += double(va[i]) * double(vb[i]);
  return acc;
}

namespace detail {

// One output index mapped onto its two source taps. The half-pixel-center
// convention places output sample i at source coordinate
// (i + 0.5) * src/dst - 0.5, clamped to the valid range.
struct ResizeTaps {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> frac;  // weight of the hi tap
};

inline ResizeTaps make_resize_taps(int src_dim, int dst_dim) {
  ResizeTaps t;
  t.lo.resize(dst_dim);
  t.hi.resize(dst_dim);
  t.frac.resize(dst_dim);
  const double step = static_cast<double>(src_dim) / dst_dim;
  for (int i = 0; i < dst_dim; ++i) {
    double s = (i + 0.5) * step - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_dim - 1));
    int lo = static_cast<int>(std::floor(s));
    lo = std::min(lo, src_dim - 1);
    t.lo[i] = lo;
    t.hi[i] = std::min(lo + 1, src_dim - 1);
    t.frac[i] = s - lo;
  }
  return t;
}

}  // namespace detail

// Bilinear resampling with half-pixel centers and edge clamping. Resizing to
// the source dimensions reproduces the input bit for bit.
template <typename S>
TensorT<S> bilinear_resize(const TensorT<S>& src, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1)
    throw InvalidDimension("bilinear_resize: target dimensions must be at least 1");
  const auto ty = detail::make_resize_taps(src.height(), out_h);
  const auto tx = detail::make_resize_taps(src.width(), out_w);
  TensorT<S> out(out_h, out_w, src.channels());
  for (int c = 0; c < src.channels(); ++c) {
    const S* p = src.plane(c);
    S* q = out.plane(c);
    for (int y = 0; y < out_h; ++y) {
      const S* row0 = p + static_cast<std::size_t>(ty.lo[y]) * src.width();
      const S* row1 = p + static_cast<std::size_t>(ty.hi[y]) * src.width();
      const double fy = ty.frac[y];
      for (int x = 0; x < out_w; ++x) {
        const double fx = tx.frac[x];
        const double top = (1.0 - fx) * row0[tx.lo[x]] + fx * row0[tx.hi[x]];
        const double bot = (1.0 - fx) * row1[tx.lo[x]] + fx * row1[tx.hi[x]];
        q[static_cast<std::size_t>(y) * out_w + x] = static_cast<S>((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

}  // namespace agf
