#pragma once

#include <array>
#include <cassert>

#include <Eigen/Dense>

namespace fpca {

template <typename Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr int kColorChannels = 3;

// rows x cols x RGB, one dense plane per color channel.
template <typename Scalar>
struct Tensor3 {
  std::array<Plane<Scalar>, kColorChannels> planes;

  Tensor3() = default;
  Tensor3(Eigen::Index rows, Eigen::Index cols) {
    for (auto& p : planes) p = Plane<Scalar>::Zero(rows, cols);
  }

  static Tensor3 Zero(Eigen::Index rows, Eigen::Index cols) { return Tensor3(rows, cols); }

  static Tensor3 Constant(Eigen::Index rows, Eigen::Index cols, Scalar value) {
    Tensor3 t;
    for (auto& p : t.planes) p = Plane<Scalar>::Constant(rows, cols, value);
    return t;
  }

  Eigen::Index rows() const { return planes[0].rows(); }
  Eigen::Index cols() const { return planes[0].cols(); }
  Eigen::Index size() const { return rows() * cols() * kColorChannels; }

  Scalar& operator()(Eigen::Index r, Eigen::Index c, int rgb) {
    assert(rgb >= 0 && rgb < kColorChannels);
    return planes[rgb](r, c);
  }
  Scalar operator()(Eigen::Index r, Eigen::Index c, int rgb) const {
    assert(rgb >= 0 && rgb < kColorChannels);
    return planes[rgb](r, c);
  }

  Scalar minCoeff() const {
    Scalar m = planes[0].minCoeff();
    for (const auto& p : planes) m = std::min(m, p.minCoeff());
    return m;
  }
  Scalar maxCoeff() const {
    Scalar m = planes[0].maxCoeff();
    for (const auto& p : planes) m = std::max(m, p.maxCoeff());
    return m;
  }

  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (int ch = 0; ch < kColorChannels; ++ch)
      if (a.planes[ch] != b.planes[ch]) return false;
    return true;
  }
};

template <typename Scalar>
Tensor3<Scalar> operator-(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b) {
  Tensor3<Scalar> out;
  for (int ch = 0; ch < kColorChannels; ++ch) out.planes[ch] = a.planes[ch] - b.planes[ch];
  return out;
}

template <typename Scalar>
Tensor3<Scalar> operator+(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b) {
  Tensor3<Scalar> out;
  for (int ch = 0; ch < kColorChannels; ++ch) out.planes[ch] = a.planes[ch] + b.planes[ch];
  return out;
}

/// Normalized photodiode currents, rows x cols x RGB, values in [0, 1].
using Image = Tensor3<double>;

/// Signed normalized kernel weights, k x k x RGB, values in [-1, 1].
using Kernel = Tensor3<double>;

}  // namespace fpca
