#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "agf/tensor.hpp"

namespace agf {

namespace detail {

inline void require_radius(int height, int width, int radius) {
  if (radius < 1) throw RadiusTooLarge("window radius must be at least 1");
  if (radius >= std::min(height, width))
    throw RadiusTooLarge("window radius " + std::to_string(radius) +
                         " must be smaller than min(H, W) = " +
                         std::to_string(std::min(height, width)));
}

}  // namespace detail

// Per-channel (H+1) x (W+1) summed-area table. Prefix sums run in double so
// that window sums over large planes keep single-precision accuracy.
template <typename S>
class IntegralImage {
public:
  explicit IntegralImage(const TensorT<S>& t)
      : height_(t.height()), width_(t.width()), channels_(t.channels()) {
    const std::size_t stride = static_cast<std::size_t>(width_ + 1);
    table_.assign(static_cast<std::size_t>(height_ + 1) * stride * channels_, 0.0);
    for (int c = 0; c < channels_; ++c) {
      const S* src = t.plane(c);
      double* tab = plane(c);
      for (int y = 0; y < height_; ++y) {
        double row_sum = 0.0;
        const double* above = tab + static_cast<std::size_t>(y) * stride;
        double* cur = tab + static_cast<std::size_t>(y + 1) * stride;
        for (int x = 0; x < width_; ++x) {
          row_sum += static_cast<double>(src[static_cast<std::size_t>(y) * width_ + x]);
          cur[x + 1] = above[x + 1] + row_sum;
        }
      }
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }

  // Sum over the inclusive pixel rectangle [y0, y1] x [x0, x1].
  double rect_sum(int y0, int y1, int x0, int x1, int c) const {
    const std::size_t stride = static_cast<std::size_t>(width_ + 1);
    const double* tab = plane(c);
    const double* top = tab + static_cast<std::size_t>(y0) * stride;
    const double* bot = tab + static_cast<std::size_t>(y1 + 1) * stride;
    return bot[x1 + 1] - bot[x0] - top[x1 + 1] + top[x0];
  }

private:
  double* plane(int c) {
    return table_.data() + static_cast<std::size_t>(height_ + 1) * (width_ + 1) * c;
  }
  const double* plane(int c) const {
    return table_.data() + static_cast<std::size_t>(height_ + 1) * (width_ + 1) * c;
  }

  int height_;
  int width_;
  int channels_;
  std::vector<double> table_;
};

// Sum over the square window of the given radius at every pixel. Windows are
// truncated at the image border. O(N), independent of the radius.
template <typename S>
TensorT<S> windowed_sum(const TensorT<S>& t, int radius) {
  detail::require_radius(t.height(), t.width(), radius);
  const IntegralImage<S> integral(t);
  const int h = t.height();
  const int w = t.width();
  TensorT<S> out(h, w, t.channels());
  for (int c = 0; c < t.channels(); ++c) {
    S* po = out.plane(c);
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(y - radius, 0);
      const int y1 = std::min(y + radius, h - 1);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(x - radius, 0);
        const int x1 = std::min(x + radius, w - 1);
        po[static_cast<std::size_t>(y) * w + x] =
            static_cast<S>(integral.rect_sum(y0, y1, x0, x1, c));
      }
    }
  }
  return out;
}

// Mean over the truncated window: windowed_sum divided by the per-pixel
// window population.
template <typename S>
TensorT<S> windowed_mean(const TensorT<S>& t, int radius) {
  detail::require_radius(t.height(), t.width(), radius);
  const IntegralImage<S> integral(t);
  const int h = t.height();
  const int w = t.width();
  TensorT<S> out(h, w, t.channels());
  for (int c = 0; c < t.channels(); ++c) {
    S* po = out.plane(c);
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(y - radius, 0);
      const int y1 = std::min(y + radius, h - 1);
      const int ny = y1 - y0 + 1;
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(x - radius, 0);
        const int x1 = std::min(x + radius, w - 1);
        const int n = ny * (x1 - x0 + 1);
        po[static_cast<std::size_t>(y) * w + x] =
            static_cast<S>(integral.rect_sum(y0, y1, x0, x1, c) / n);
      }
    }
  }
  return out;
}

// Window population N_i at every pixel: (2r+1)^2 in the interior, truncated
// toward (r+1)^2 at the corners.
template <typename S>
TensorT<S> pixel_counts(int height, int width, int radius) {
  detail::require_radius(height, width, radius);
  TensorT<S> out(height, width, 1);
  S* po = out.plane(0);
  for (int y = 0; y < height; ++y) {
    const int ny = std::min(y + radius, height - 1) - std::max(y - radius, 0) + 1;
    for (int x = 0; x < width; ++x) {
      const int nx = std::min(x + radius, width - 1) - std::max(x - radius, 0) + 1;
      po[static_cast<std::size_t>(y) * width + x] = static_cast<S>(ny * nx);
    }
  }
  return out;
}

}  // namespace agf
