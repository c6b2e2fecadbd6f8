#pragma once

// Bucket-select curvefit surrogate of the analog bitline.
//
// A generic surface f_avg(I, W) fitted on homogeneous inputs gives a coarse
// estimate of the bitline voltage. The estimate selects one of B output-range
// buckets, each with its own surface f_buc fitted while most pixels sit at an
// anchor point that pins the output inside that bucket. The refined prediction
// sums per-pixel deltas of the selected bucket surface against the anchor
// output. The sigmoid form replaces the hard bucket selection with smooth
// weights so the whole predictor is differentiable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fpca/error.hpp"
#include "fpca/random.hpp"

namespace fpca {

template <typename Scalar>
using Column = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Full bivariate polynomial of total degree d over (I, W).
template <typename Scalar>
class Surface2D {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Surface2D() = default;
  Surface2D(int degree, Vector coefficients, Scalar residual_rms = Scalar(0))
      : degree_(degree), coeffs_(std::move(coefficients)), residual_rms_(residual_rms) {
    if (coeffs_.size() != term_count(degree_)) {
      throw Error(Errc::ShapeMismatch, "degree " + std::to_string(degree_) + " surface needs " +
                                           std::to_string(term_count(degree_)) + " coefficients");
    }
  }

  static int term_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

  /// Exponent pair (a, b) of term t, meaning I^a * W^b. Terms are grouped by total
  /// degree, with the power of I descending inside a group.
  static std::pair<int, int> exponents(int term) {
    int total = 0;
    while (term > total) {
      term -= total + 1;
      ++total;
    }
    return {total - term, term};
  }

  /// Least-squares fit of v ~ poly(I, W). Throws SingularFit on a rank-deficient design.
  static Surface2D fit(const Column<Scalar>& current, const Column<Scalar>& weight,
                       const Column<Scalar>& value, int degree) {
    const Eigen::Index samples = current.size();
    const int terms = term_count(degree);
    if (weight.size() != samples || value.size() != samples) {
      throw Error(Errc::ShapeMismatch, "fit inputs differ in length");
    }
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> design(samples, terms);
    for (Eigen::Index s = 0; s < samples; ++s) design.row(s) = basis(current(s), weight(s), degree).transpose();
    Eigen::ColPivHouseholderQR<decltype(design)> qr(design);
    if (qr.rank() < terms) {
      throw Error(Errc::SingularFit, "design matrix rank " + std::to_string(qr.rank()) + " < " +
                                         std::to_string(terms) + " terms");
    }
    Vector coeffs = qr.solve(value.matrix());
    const Vector residual = design * coeffs - value.matrix();
    const Scalar rms = std::sqrt(residual.squaredNorm() / static_cast<Scalar>(samples));
    return Surface2D(degree, std::move(coeffs), rms);
  }

  static Vector basis(Scalar i, Scalar w, int degree) {
    Vector b(term_count(degree));
    const auto ip = powers(i, degree);
    const auto wp = powers(w, degree);
    for (int t = 0; t < b.size(); ++t) {
      const auto [a, c] = exponents(t);
      b(t) = ip[a] * wp[c];
    }
    return b;
  }
  Vector basis(Scalar i, Scalar w) const { return basis(i, w, degree_); }

  Scalar operator()(Scalar i, Scalar w) const { return basis(i, w).dot(coeffs_); }

  template <typename Derived>
  Column<Scalar> operator()(const Eigen::ArrayBase<Derived>& i,
                            const Eigen::ArrayBase<Derived>& w) const {
    Column<Scalar> out(i.size());
    for (Eigen::Index k = 0; k < i.size(); ++k) out(k) = (*this)(i(k), w(k));
    return out;
  }

  /// (d/dI, d/dW) at (i, w).
  std::pair<Scalar, Scalar> gradient(Scalar i, Scalar w) const {
    const auto ip = powers(i, degree_);
    const auto wp = powers(w, degree_);
    Scalar di(0), dw(0);
    for (int t = 0; t < coeffs_.size(); ++t) {
      const auto [a, c] = exponents(t);
      if (a > 0) di += coeffs_(t) * Scalar(a) * ip[a - 1] * wp[c];
      if (c > 0) dw += coeffs_(t) * Scalar(c) * ip[a] * wp[c - 1];
    }
    return {di, dw};
  }

  int degree() const noexcept { return degree_; }
  const Vector& coefficients() const noexcept { return coeffs_; }
  Scalar residual_rms() const noexcept { return residual_rms_; }

 private:
  static std::vector<Scalar> powers(Scalar x, int degree) {
    std::vector<Scalar> p(static_cast<std::size_t>(degree) + 1, Scalar(1));
    for (int k = 1; k <= degree; ++k) p[k] = p[k - 1] * x;
    return p;
  }

  int degree_ = 0;
  Vector coeffs_ = Vector::Zero(1);
  Scalar residual_rms_ = Scalar(0);
};

template <typename Scalar>
struct Anchor {
  Scalar current = Scalar(0);
  Scalar weight = Scalar(0);
  Scalar output = Scalar(0);  ///< oracle output with every pixel at the anchor
};

template <typename Scalar>
struct BucketModel {
  int index = 1;  ///< 1-based
  Surface2D<Scalar> surface;
  Anchor<Scalar> anchor;
  Scalar anchor_output = Scalar(0);  ///< homogeneous output at the anchor, read off this bucket's surface
  bool reachable = true;  ///< false when the anchor was borrowed from a neighbouring bucket
};

template <typename Scalar>
struct SurrogateModel {
  Surface2D<Scalar> generic;
  std::vector<BucketModel<Scalar>> buckets;
  int pixel_count = 75;
  int subset_size = 5;
  Scalar slope = Scalar(100);
  Scalar v_max = Scalar(1);

  int bucket_count() const { return static_cast<int>(buckets.size()); }
};

struct FitOptions {
  int pixel_count = 75;
  int subset_size = 5;
  int buckets = 5;
  int degree = 3;
  int grid = 21;
  double slope = 100.0;
  double v_max = 1.0;
};

template <typename Scalar>
Column<Scalar> linspace01(int points) {
  return Column<Scalar>::LinSpaced(points, Scalar(0), Scalar(1));
}

/// Generic surface: the oracle with all N pixels sharing (I, W), swept over a G x G grid.
template <typename Scalar, typename Oracle>
Surface2D<Scalar> fit_generic(const Oracle& oracle, int pixel_count, int grid, int degree) {
  if (pixel_count < 1) throw Error(Errc::EmptyContributionSet, "pixel count must be >= 1");
  if (grid < degree + 1) {
    throw Error(Errc::SingularFit, "grid " + std::to_string(grid) + " too coarse for degree " +
                                       std::to_string(degree));
  }
  const Column<Scalar> axis = linspace01<Scalar>(grid);
  Column<Scalar> is(grid * grid), ws(grid * grid), vs(grid * grid);
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      const int k = a * grid + b;
      is(k) = axis(a);
      ws(k) = axis(b);
      vs(k) = oracle(Column<Scalar>::Constant(pixel_count, axis(a)),
                     Column<Scalar>::Constant(pixel_count, axis(b)));
    }
  return Surface2D<Scalar>::fit(is, ws, vs, degree);
}

/// Diagonal point (t, t) whose homogeneous oracle output is the center of bucket `index`.
template <typename Scalar, typename Oracle>
Anchor<Scalar> find_anchor(const Oracle& oracle, int pixel_count, int index, int bucket_count,
                           Scalar v_max) {
  auto homogeneous = [&](Scalar t) {
    return oracle(Column<Scalar>::Constant(pixel_count, t), Column<Scalar>::Constant(pixel_count, t));
  };
  const Scalar target = v_max * Scalar(2 * index - 1) / Scalar(2 * bucket_count);
  const Scalar tol = Scalar(1e-4) * v_max;
  Scalar lo(0), hi(1);
  Scalar f_lo = homogeneous(lo), f_hi = homogeneous(hi);
  if (target < f_lo - tol || target > f_hi + tol) {
    throw Error(Errc::UnreachableBucket,
                "bucket " + std::to_string(index) + " center " + std::to_string(double(target)) +
                    " outside oracle range [" + std::to_string(double(f_lo)) + ", " +
                    std::to_string(double(f_hi)) + "]");
  }
  Scalar t = Scalar(0.5), f = homogeneous(t);
  for (int iter = 0; iter < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon(); ++iter) {
    t = (lo + hi) / 2;
    f = homogeneous(t);
    if (f < target) lo = t;
    else hi = t;
  }
  if (std::abs(f - target) > tol) {
    throw Error(Errc::UnreachableBucket, "bisection did not reach bucket " + std::to_string(index) +
                                             " center; oracle may not be monotone");
  }
  return {t, t, f};
}

/// Bucket surface: m pixels swept over the grid while N - m pixels sit at the anchor.
template <typename Scalar, typename Oracle>
Surface2D<Scalar> fit_bucket(const Oracle& oracle, const Anchor<Scalar>& anchor, int pixel_count,
                             int subset_size, int grid, int degree) {
  if (subset_size < 1 || subset_size >= pixel_count) {
    throw Error(Errc::InvalidParameter, "subset size must satisfy 1 <= m < N");
  }
  if (grid < degree + 1) throw Error(Errc::SingularFit, "grid too coarse for degree");
  const Column<Scalar> axis = linspace01<Scalar>(grid);
  Column<Scalar> is(grid * grid), ws(grid * grid), vs(grid * grid);
  Column<Scalar> ci = Column<Scalar>::Constant(pixel_count, anchor.current);
  Column<Scalar> cw = Column<Scalar>::Constant(pixel_count, anchor.weight);
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      const int k = a * grid + b;
      ci.head(subset_size).setConstant(axis(a));
      cw.head(subset_size).setConstant(axis(b));
      is(k) = axis(a);
      ws(k) = axis(b);
      vs(k) = oracle(ci, cw);
    }
  return Surface2D<Scalar>::fit(is, ws, vs, degree);
}

/// Fits f_avg and every bucket. A bucket whose center the oracle cannot reach borrows
/// the anchor and surface of the nearest reachable bucket and is marked unreachable.
template <typename Scalar, typename Oracle>
SurrogateModel<Scalar> fit_surrogate(const Oracle& oracle, const FitOptions& opt) {
  if (opt.buckets < 1) throw Error(Errc::InvalidParameter, "need at least one bucket");
  SurrogateModel<Scalar> model;
  model.pixel_count = opt.pixel_count;
  model.subset_size = opt.subset_size;
  model.slope = Scalar(opt.slope);
  model.v_max = Scalar(opt.v_max);
  model.generic = fit_generic<Scalar>(oracle, opt.pixel_count, opt.grid, opt.degree);

  model.buckets.resize(static_cast<std::size_t>(opt.buckets));
  std::vector<int> reachable;
  for (int i = 1; i <= opt.buckets; ++i) {
    auto& bucket = model.buckets[static_cast<std::size_t>(i - 1)];
    bucket.index = i;
    try {
      bucket.anchor = find_anchor<Scalar>(oracle, opt.pixel_count, i, opt.buckets, model.v_max);
    } catch (const Error& e) {
      if (e.code() != Errc::UnreachableBucket) throw;
      bucket.reachable = false;
      continue;
    }
    bucket.surface = fit_bucket<Scalar>(oracle, bucket.anchor, opt.pixel_count, opt.subset_size,
                                        opt.grid, opt.degree);
    // Referencing the bucket's own surface keeps the N/m-amplified delta sum zero at the anchor.
    bucket.anchor_output = bucket.surface(bucket.anchor.current, bucket.anchor.weight);
    reachable.push_back(i);
  }
  if (reachable.empty()) throw Error(Errc::UnreachableBucket, "oracle reaches no bucket center");
  for (auto& bucket : model.buckets) {
    if (bucket.reachable) continue;
    int nearest = reachable.front();
    for (int r : reachable)
      if (std::abs(r - bucket.index) < std::abs(nearest - bucket.index)) nearest = r;
    const auto& donor = model.buckets[static_cast<std::size_t>(nearest - 1)];
    bucket.anchor = donor.anchor;
    bucket.surface = donor.surface;
    bucket.anchor_output = donor.anchor_output;
  }
  return model;
}

namespace detail {

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  return z >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-z))
                        : std::exp(z) / (Scalar(1) + std::exp(z));
}

template <typename Scalar>
void check_inputs(const SurrogateModel<Scalar>& model, const Column<Scalar>& current,
                  const Column<Scalar>& weight) {
  if (current.size() == 0) throw Error(Errc::EmptyContributionSet, "no contributions");
  if (current.size() != weight.size() || current.size() != model.pixel_count) {
    throw Error(Errc::ShapeMismatch, "surrogate expects " + std::to_string(model.pixel_count) +
                                         " contributions, got " + std::to_string(current.size()));
  }
}

}  // namespace detail

/// Step-1 estimate: mean of f_avg over per-pixel evaluations.
template <typename Scalar>
Scalar estimate(const SurrogateModel<Scalar>& model, const Column<Scalar>& current,
                const Column<Scalar>& weight) {
  detail::check_inputs(model, current, weight);
  Scalar sum(0);
  for (Eigen::Index j = 0; j < current.size(); ++j) sum += model.generic(current(j), weight(j));
  return sum / Scalar(current.size());
}

/// Refined prediction of bucket `index` (1-based):
/// sum_j (f_buc(I_j, W_j) - f_avg(anchor)) / m + f_avg(anchor).
template <typename Scalar>
Scalar bucket_prediction(const SurrogateModel<Scalar>& model, int index,
                         const Column<Scalar>& current, const Column<Scalar>& weight) {
  const auto& bucket = model.buckets.at(static_cast<std::size_t>(index - 1));
  Scalar delta(0);
  for (Eigen::Index j = 0; j < current.size(); ++j)
    delta += bucket.surface(current(j), weight(j)) - bucket.anchor_output;
  return delta / Scalar(model.subset_size) + bucket.anchor_output;
}

/// Bucket holding normalized estimate x; buckets cover [(i-1)/B, i/B], shared edges go up.
template <typename Scalar>
int select_bucket(const SurrogateModel<Scalar>& model, Scalar x) {
  const int b = model.bucket_count();
  const int i = static_cast<int>(std::floor(x * Scalar(b))) + 1;
  return std::clamp(i, 1, b);
}

template <typename Scalar>
Scalar normalized_estimate(const SurrogateModel<Scalar>& model, const Column<Scalar>& current,
                           const Column<Scalar>& weight) {
  constexpr double kTolerance = 0.02;
  const Scalar x = estimate(model, current, weight) / model.v_max;
  if (x < Scalar(-kTolerance) || x > Scalar(1 + kTolerance)) {
    throw Error(Errc::EstimateOutOfRange, "normalized estimate " + std::to_string(double(x)) +
                                              " outside [0, 1]");
  }
  return x;
}

template <typename Scalar>
Scalar predict_step(const SurrogateModel<Scalar>& model, const Column<Scalar>& current,
                    const Column<Scalar>& weight) {
  const Scalar x = normalized_estimate(model, current, weight);
  return bucket_prediction(model, select_bucket(model, x), current, weight);
}

/// sigma(k (x - (i-1)/B)) + sigma(k (i/B - x)) - 1: ~1 inside bucket i, ~0 outside.
template <typename Scalar>
Scalar bucket_weight(int index, int bucket_count, Scalar slope, Scalar x) {
  const Scalar lower = Scalar(index - 1) / Scalar(bucket_count);
  const Scalar upper = Scalar(index) / Scalar(bucket_count);
  return detail::sigmoid(slope * (x - lower)) + detail::sigmoid(slope * (upper - x)) - Scalar(1);
}

template <typename Scalar>
Scalar bucket_weight_derivative(int index, int bucket_count, Scalar slope, Scalar x) {
  const Scalar lower = Scalar(index - 1) / Scalar(bucket_count);
  const Scalar upper = Scalar(index) / Scalar(bucket_count);
  const Scalar a = detail::sigmoid(slope * (x - lower));
  const Scalar b = detail::sigmoid(slope * (upper - x));
  return slope * (a * (Scalar(1) - a) - b * (Scalar(1) - b));
}

template <typename Scalar>
Scalar predict_sigmoid(const SurrogateModel<Scalar>& model, const Column<Scalar>& current,
                       const Column<Scalar>& weight) {
  detail::check_inputs(model, current, weight);
  const Scalar x = estimate(model, current, weight) / model.v_max;
  Scalar v(0);
  for (int i = 1; i <= model.bucket_count(); ++i) {
    v += bucket_weight(i, model.bucket_count(), model.slope, x) *
         bucket_prediction(model, i, current, weight);
  }
  return v;
}

template <typename Scalar>
struct SurrogateGradient {
  Column<Scalar> d_current;
  Column<Scalar> d_weight;
};

/// Analytic gradient of predict_sigmoid. x depends on every (I_j, W_j) through f_avg,
/// so each pixel picks up a term from the moving bucket weights.
template <typename Scalar>
SurrogateGradient<Scalar> gradient(const SurrogateModel<Scalar>& model, const Column<Scalar>& current,
                                   const Column<Scalar>& weight) {
  detail::check_inputs(model, current, weight);
  const Eigen::Index n = current.size();
  const int buckets = model.bucket_count();
  const Scalar x = estimate(model, current, weight) / model.v_max;

  // dV/dx = sum_i w_i'(x) P_i
  Scalar dv_dx(0);
  std::vector<Scalar> w(static_cast<std::size_t>(buckets));
  for (int i = 1; i <= buckets; ++i) {
    w[i - 1] = bucket_weight(i, buckets, model.slope, x);
    dv_dx += bucket_weight_derivative(i, buckets, model.slope, x) *
             bucket_prediction(model, i, current, weight);
  }
  const Scalar dx_scale = Scalar(1) / (Scalar(n) * model.v_max);
  const Scalar inv_m = Scalar(1) / Scalar(model.subset_size);

  SurrogateGradient<Scalar> g{Column<Scalar>::Zero(n), Column<Scalar>::Zero(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto [gi, gw] = model.generic.gradient(current(j), weight(j));
    Scalar di = dv_dx * dx_scale * gi;
    Scalar dw = dv_dx * dx_scale * gw;
    for (int i = 1; i <= buckets; ++i) {
      const auto [bi, bw] = model.buckets[static_cast<std::size_t>(i - 1)].surface.gradient(current(j), weight(j));
      di += w[i - 1] * bi * inv_m;
      dw += w[i - 1] * bw * inv_m;
    }
    g.d_current(j) = di;
    g.d_weight(j) = dw;
  }
  return g;
}

struct PredictorStats {
  double mean_abs = 0.0;        ///< volts
  double max_abs = 0.0;         ///< volts
  double mean_abs_rel_vmax = 0.0;
  double mean_rel_output = 0.0;  ///< |error| / |oracle|, over trials with nonzero oracle output
};

struct BucketStats {
  int index = 1;
  std::size_t count = 0;  ///< trials whose step estimate selected this bucket
  double mean_abs_step = 0.0;
};

struct ErrorReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double v_max = 1.0;
  PredictorStats step;
  PredictorStats sigmoid;
  std::vector<BucketStats> buckets;
  /// max |sigmoid - step| over trials whose estimate is > 0.01 from every bucket edge
  double max_step_sigmoid_gap = 0.0;
  std::size_t gap_trials = 0;
};

/// Distance from x to the nearest interior bucket boundary i/B.
inline double boundary_distance(double x, int bucket_count) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 1; i < bucket_count; ++i)
    best = std::min(best, std::abs(x - static_cast<double>(i) / bucket_count));
  return best;
}

/// Draws I_j, W_j uniformly from [0, 1).
inline void random_contributions(Rng& rng, Column<double>& current, Column<double>& weight) {
  for (Eigen::Index j = 0; j < current.size(); ++j) {
    current(j) = uniform01(rng);
    weight(j) = uniform01(rng);
  }
}

/// Compares both predictors against `oracle` on seeded uniform random contribution vectors.
template <typename Oracle>
ErrorReport error_report(const SurrogateModel<double>& model, const Oracle& oracle,
                         std::size_t trials, std::uint64_t seed) {
  ErrorReport report;
  report.trials = trials;
  report.seed = seed;
  report.v_max = model.v_max;
  for (int i = 1; i <= model.bucket_count(); ++i) report.buckets.push_back({i, 0, 0.0});
  if (trials == 0) return report;

  Rng rng(seed);
  const Eigen::Index n = model.pixel_count;
  Column<double> current(n), weight(n);
  std::size_t rel_step_count = 0, rel_sig_count = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    random_contributions(rng, current, weight);
    const double truth = oracle(current, weight);
    const double x = normalized_estimate(model, current, weight);
    const int s = select_bucket(model, x);
    const double step = bucket_prediction(model, s, current, weight);
    const double sig = predict_sigmoid(model, current, weight);
    const double e_step = std::abs(step - truth);
    const double e_sig = std::abs(sig - truth);

    report.step.mean_abs += e_step;
    report.step.max_abs = std::max(report.step.max_abs, e_step);
    report.sigmoid.mean_abs += e_sig;
    report.sigmoid.max_abs = std::max(report.sigmoid.max_abs, e_sig);
    if (std::abs(truth) > 1e-12) {
      report.step.mean_rel_output += e_step / std::abs(truth);
      report.sigmoid.mean_rel_output += e_sig / std::abs(truth);
      ++rel_step_count;
      ++rel_sig_count;
    }
    auto& bucket = report.buckets[static_cast<std::size_t>(s - 1)];
    ++bucket.count;
    bucket.mean_abs_step += e_step;
    if (boundary_distance(x, model.bucket_count()) > 0.01) {
      report.max_step_sigmoid_gap = std::max(report.max_step_sigmoid_gap, std::abs(sig - step));
      ++report.gap_trials;
    }
  }
  const double count = static_cast<double>(trials);
  for (PredictorStats* p : {&report.step, &report.sigmoid}) {
    p->mean_abs /= count;
    p->mean_abs_rel_vmax = p->mean_abs / model.v_max;
  }
  if (rel_step_count) report.step.mean_rel_output /= static_cast<double>(rel_step_count);
  if (rel_sig_count) report.sigmoid.mean_rel_output /= static_cast<double>(rel_sig_count);
  for (auto& b : report.buckets)
    if (b.count) b.mean_abs_step /= static_cast<double>(b.count);
  return report;
}

}  // namespace fpca
