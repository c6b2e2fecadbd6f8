#include "fpca/analog.hpp"

#include <cmath>

namespace fpca {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double full_scale(const DeviceModel& model) {
  return std::visit(Overloaded{[](const IdealLinear& m) { return m.v_max; },
                               [](const SaturatingOracle& m) { return m.v_max; },
                               [](const SurrogateDevice& m) { return m.model->v_max; }},
                    model);
}

std::string model_name(const DeviceModel& model) {
  return std::visit(Overloaded{[](const IdealLinear&) { return std::string("ideal"); },
                               [](const SaturatingOracle&) { return std::string("saturating"); },
                               [](const SurrogateDevice&) { return std::string("surrogate"); }},
                    model);
}

double bitline(const Contributions& contribs, const DeviceModel& model) {
  if (contribs.size() == 0) throw Error(Errc::EmptyContributionSet, "bitline needs N >= 1");
  if (contribs.conductance.size() != contribs.size()) {
    throw Error(Errc::ShapeMismatch, "current and conductance counts differ");
  }
  return std::visit(
      Overloaded{
          [&](const IdealLinear& m) { return m(contribs.current, contribs.conductance); },
          [&](const SaturatingOracle& m) { return m(contribs.current, contribs.conductance); },
          [&](const SurrogateDevice& m) {
            const double v = predict_sigmoid(*m.model, contribs.current, contribs.conductance);
            return std::clamp(v, 0.0, m.model->v_max);
          }},
      model);
}

long UpDownCounter::sample(double v) const {
  const double slack = 1e-12 * spec_.v_max;
  if (!(v >= -slack && v <= spec_.v_max + slack)) {
    throw Error(Errc::VoltageOutOfRange,
                std::to_string(v) + " V outside [0, " + std::to_string(spec_.v_max) + "]");
  }
  const double clamped = std::clamp(v, 0.0, spec_.v_max);
  return std::lround(clamped / spec_.v_max * static_cast<double>(spec_.max_count()));
}

long adc_convert(double v_pos, double v_neg, const AdcSpec& spec) {
  UpDownCounter counter(spec);
  counter.up(v_pos);
  counter.down(v_neg);
  return counter.result();
}

FrameOutput run_frame(const Image& image, const WeightBlock& block, const ValidatedConfig& cfg,
                      const DeviceModel& model, const RegionSkipMask& mask, long bn_offset) {
  const auto geom = derive_geometry(cfg);
  if (image.rows() != geom.h_i || image.cols() != geom.w_i) {
    throw Error(Errc::ShapeMismatch, "image is " + std::to_string(image.rows()) + "x" +
                                         std::to_string(image.cols()) + ", config expects " +
                                         std::to_string(geom.h_i) + "x" +
                                         std::to_string(geom.w_i));
  }
  if (block.kernel_size() != cfg->max_kernel || block.channels() != cfg->out_channels) {
    throw Error(Errc::ShapeMismatch, "weight block does not match the config");
  }
  const AdcSpec adc{cfg->adc_bits, cfg->v_max, bn_offset};
  if (std::abs(full_scale(model) - cfg->v_max) > 1e-12 * cfg->v_max) {
    throw Error(Errc::InvalidParameter, "device model full scale differs from config v_max");
  }

  const ControlSchedule schedule = enumerate(cfg, mask);
  const int n = cfg->max_kernel;
  const Eigen::Index pixels = geom.pixels_per_conv;

  FrameOutput out;
  out.skipped = skipped_outputs(cfg, mask);
  out.cycles = schedule.size();
  out.channels.assign(static_cast<std::size_t>(cfg->out_channels),
                      Eigen::MatrixXi::Zero(geom.h_o, geom.w_o));

  const auto index = [&](const OutputCoord& o) {
    return (static_cast<std::size_t>(o.channel) * geom.h_o + o.row) * geom.w_o + o.col;
  };
  std::vector<UpDownCounter> counters(
      static_cast<std::size_t>(cfg->out_channels) * geom.h_o * geom.w_o, UpDownCounter(adc));
  Contributions contribs(pixels);
  for (const Cycle& cycle : schedule.cycles) {
    const Kernel& plane = block.select(cycle.channel, cycle.sign);
    const auto links = pixel_weight_map(cycle, cfg);
    std::size_t cursor = 0;
    for (const OutputCoord& o : cycle.out_coords) {
      contribs.current.setZero();
      contribs.conductance.setZero();
      // Padding positions stay at zero current; the bitline still sees N activations.
      for (; cursor < links.size() && links[cursor].out == o; ++cursor) {
        const auto& l = links[cursor];
        for (int rgb = 0; rgb < kColorChannels; ++rgb) {
          const Eigen::Index slot = (static_cast<Eigen::Index>(l.kernel_row) * n + l.kernel_col) *
                                        kColorChannels + rgb;
          contribs.current(slot) = image(l.pixel_row, l.pixel_col, rgb);
          contribs.conductance(slot) = plane(l.kernel_row, l.kernel_col, rgb);
        }
      }
      const double v = bitline(contribs, model);
      if (cycle.sign == Sign::Pos) {
        counters[index(o)].up(v);
      } else {
        counters[index(o)].down(v);
      }
    }
  }
  // Skipped outputs keep the zero placeholder.
  for (int ch = 0; ch < cfg->out_channels; ++ch)
    for (int y = 0; y < geom.h_o; ++y)
      for (int x = 0; x < geom.w_o; ++x)
        if (!out.skipped(y, x))
          out.channels[static_cast<std::size_t>(ch)](y, x) =
              static_cast<int>(counters[index({y, x, ch})].result());
  return out;
}

FrameOutput run_frame(const Image& image, const WeightBlock& block, const ValidatedConfig& cfg,
                      const DeviceModel& model, long bn_offset) {
  return run_frame(image, block, cfg, model,
                   RegionSkipMask::all_active(derive_geometry(cfg), cfg->skip_block), bn_offset);
}

FrameOutput run_sensor_frame(const Image& raw, const WeightBlock& block, const ValidatedConfig& cfg,
                             const DeviceModel& model, const RegionSkipMask& mask, long bn_offset) {
  if (raw.rows() != cfg->rows || raw.cols() != cfg->cols) {
    throw Error(Errc::ShapeMismatch, "sensor image does not match rows x cols");
  }
  return run_frame(apply_binning(raw, cfg->binning), block, cfg, model, mask, bn_offset);
}

}  // namespace fpca
