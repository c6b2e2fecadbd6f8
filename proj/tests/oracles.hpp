#pragma once

// Independent reference computations used only by tests. Nothing here goes through
// the scheduler, the weight block or the ADC model.

#include <cmath>
#include <cstdint>
#include <vector>

#include "fpca/random.hpp"
#include "fpca/tensor.hpp"

namespace fpca::oracle {

inline int brute_lcm(int a, int b) {
  for (int m = 1;; ++m)
    if (m % a == 0 && m % b == 0) return m;
}

inline std::uint64_t eq1_cycles(int h_o, int c_o, int stride, int n) {
  return 2ull * h_o * c_o * (brute_lcm(stride, n) / stride);
}

/// Magnitude snapped to `levels` uniform steps, sign kept; ties away from zero.
inline double snap(double w, int levels) {
  const double top = levels - 1;
  const double mag = std::floor(std::abs(w) * top + 0.5) / top;
  return w < 0 ? -mag : mag;
}

/// Dense zero-padded cross-correlation over RGB. Returns [y][x] sums of k * img.
inline std::vector<std::vector<double>> conv2d(const Image& img, const Kernel& k, int stride,
                                               int padding, int levels) {
  const int n = static_cast<int>(k.rows());
  const int h_o = (static_cast<int>(img.rows()) - n + 2 * padding) / stride + 1;
  const int w_o = (static_cast<int>(img.cols()) - n + 2 * padding) / stride + 1;
  std::vector<std::vector<double>> out(h_o, std::vector<double>(w_o, 0.0));
  for (int y = 0; y < h_o; ++y)
    for (int x = 0; x < w_o; ++x) {
      double acc = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int r = y * stride + i - padding;
          const int c = x * stride + j - padding;
          if (r < 0 || c < 0 || r >= img.rows() || c >= img.cols()) continue;
          for (int ch = 0; ch < 3; ++ch) acc += snap(k(i, j, ch), levels) * img(r, c, ch);
        }
      out[y][x] = acc;
    }
  return out;
}

/// ReLU then full-scale quantization of a normalized dot product.
inline long relu_counts(double dot, int pixels, int bits) {
  const double v = std::max(0.0, dot / pixels);
  return std::lround(v * ((1L << bits) - 1));
}

inline Image random_image(Rng& rng, int rows, int cols) {
  Image img(rows, cols);
  for (auto& p : img.planes) p = p.unaryExpr([&](double) { return uniform01(rng); });
  return img;
}

inline Kernel random_kernel(Rng& rng, int n) {
  Kernel k(n, n);
  for (auto& p : k.planes) p = p.unaryExpr([&](double) { return uniform(rng, -1.0, 1.0); });
  return k;
}

/// Central finite difference of f along one coordinate of x.
template <typename F, typename Vec>
double central_difference(const F& f, Vec x, Eigen::Index k, double h) {
  const double x0 = x(k);
  x(k) = x0 + h;
  const double up = f(x);
  x(k) = x0 - h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

}  // namespace fpca::oracle
