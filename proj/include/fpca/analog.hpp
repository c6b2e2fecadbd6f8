#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fpca/config.hpp"
#include "fpca/scheduler.hpp"
#include "fpca/surrogate.hpp"
#include "fpca/weight_plane.hpp"

namespace fpca {

/// Photodiode currents and NVM conductances of the pixels sharing one bitline read.
struct Contributions {
  Column<double> current;
  Column<double> conductance;

  Contributions() = default;
  explicit Contributions(Eigen::Index n)
      : current(Column<double>::Zero(n)), conductance(Column<double>::Zero(n)) {}
  Eigen::Index size() const { return current.size(); }
};

/// v = v_max * sum(I W) / N
struct IdealLinear {
  double v_max = 1.0;

  template <typename DI, typename DW>
  typename DI::Scalar operator()(const Eigen::ArrayBase<DI>& current,
                                 const Eigen::ArrayBase<DW>& conductance) const {
    using Scalar = typename DI::Scalar;
    return Scalar(v_max) * (current * conductance).sum() / Scalar(current.size());
  }
};

/// Synthetic stand-in for transistor-level bitline data.
///
/// Each pixel saturates on its own, s = IW / (1 + beta IW), and the bitline loads
/// the summed drive, v = v_max D / (D + kappa N) with D = sum s. Both stages are
/// monotone in every I and W.
struct SaturatingOracle {
  double v_max = 1.0;
  double kappa = 0.5;
  double beta = 0.3;

  template <typename DI, typename DW>
  typename DI::Scalar operator()(const Eigen::ArrayBase<DI>& current,
                                 const Eigen::ArrayBase<DW>& conductance) const {
    using Scalar = typename DI::Scalar;
    const auto drive = current * conductance;
    const Scalar d = (drive / (Scalar(1) + Scalar(beta) * drive)).sum();
    const Scalar load = Scalar(kappa) * Scalar(current.size());
    if (d + load == Scalar(0)) return Scalar(0);
    return Scalar(v_max) * d / (d + load);
  }
};

/// Fitted surrogate evaluated through the sigmoid predictor, clamped to [0, v_max].
struct SurrogateDevice {
  std::shared_ptr<const SurrogateModel<double>> model;
};

using DeviceModel = std::variant<IdealLinear, SaturatingOracle, SurrogateDevice>;

double full_scale(const DeviceModel& model);
std::string model_name(const DeviceModel& model);

double bitline(const Contributions& contribs, const DeviceModel& model);

struct AdcSpec {
  int bits = 8;
  double v_max = 1.0;
  long bn_offset = 0;  ///< counter preset; BN scale is folded into the weights

  long max_count() const { return (1L << bits) - 1; }
};

/// Single-slope up/down counter: preset with the BN offset, counts up on the positive
/// read, down on the negative read, and clamps at zero on readout (ReLU).
class UpDownCounter {
 public:
  explicit UpDownCounter(const AdcSpec& spec) : spec_(spec), count_(spec.bn_offset) {}

  void up(double v) { count_ += sample(v); }
  void down(double v) { count_ -= sample(v); }
  long raw() const noexcept { return count_; }
  long result() const noexcept { return std::clamp(count_, 0L, spec_.max_count()); }

 private:
  long sample(double v) const;

  AdcSpec spec_;
  long count_;
};

long adc_convert(double v_pos, double v_neg, const AdcSpec& spec);

struct FrameOutput {
  std::vector<Eigen::MatrixXi> channels;  ///< c_o planes of h_o x w_o counts
  BoolGrid skipped;                       ///< h_o x w_o, outputs left at zero by region skipping
  std::size_t cycles = 0;

  int operator()(int row, int col, int channel) const { return channels[channel](row, col); }
};

/// Executes the control schedule over an effective (post-binning) h_i x w_i image.
FrameOutput run_frame(const Image& image, const WeightBlock& block, const ValidatedConfig& cfg,
                      const DeviceModel& model, const RegionSkipMask& mask, long bn_offset = 0);
FrameOutput run_frame(const Image& image, const WeightBlock& block, const ValidatedConfig& cfg,
                      const DeviceModel& model, long bn_offset = 0);

/// Bins a raw R_P x C_P sensor image, then runs the frame.
FrameOutput run_sensor_frame(const Image& raw, const WeightBlock& block, const ValidatedConfig& cfg,
                             const DeviceModel& model, const RegionSkipMask& mask,
                             long bn_offset = 0);

}  // namespace fpca
