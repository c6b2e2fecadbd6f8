#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpca/config.hpp"
#include "fpca/units.hpp"

namespace fpca {

struct CostConstants {
  units::Joules e_px = units::picojoules(148.0);   ///< per in-pixel convolution read
  units::Joules e_adc = units::picojoules(41.9);   ///< per ADC conversion
  units::JoulesPerBit e_io{12.34e-12};              ///< LVDS, per bit
  int b_adc = 8;
  units::BitsPerSecond bw_io{1e9};                  ///< per pad
  int n_io_pad = 24;
  units::Seconds t_exp = units::microseconds(50.0);
  units::Seconds t_adc = units::microseconds(1.0);
  double bayer_factor = 4.0 / 3.0;                  ///< RGGB to RGB
  int raw_bit_depth = 12;                           ///< numerator of the bit-depth factor

  /// Defaults with the ADC precision taken from the config.
  static CostConstants for_config(const ValidatedConfig& cfg);
};

nlohmann::json to_json(const CostConstants& c);

struct EnergyBreakdown {
  units::Joules frontend;
  units::Joules io;
};

struct LatencyBreakdown {
  units::Seconds io_per_cycle;
  units::Seconds frontend;
  units::Hertz max_fps;
};

struct CostReport {
  std::uint64_t n_c = 0;
  units::Joules e_frontend;
  units::Joules e_io;
  units::Seconds t_frontend;
  units::Hertz max_fps;
  double br = 0.0;
};

/// Cycles for the full, unskipped schedule.
std::uint64_t frame_cycles(const ValidatedConfig& cfg);

/// `n_c` overrides the cycle count, e.g. with the length of a region-skipped schedule.
EnergyBreakdown energy(const ValidatedConfig& cfg, const CostConstants& consts,
                       std::optional<std::uint64_t> n_c = std::nullopt);
LatencyBreakdown latency(const ValidatedConfig& cfg, const CostConstants& consts,
                         std::optional<std::uint64_t> n_c = std::nullopt);
double bandwidth_reduction(const ValidatedConfig& cfg, const CostConstants& consts);

CostReport evaluate(const ValidatedConfig& cfg, const CostConstants& consts,
                    std::optional<std::uint64_t> n_c = std::nullopt);

/// Conventional RGB sensor reference: every raw pixel read out at raw bit depth,
/// with per-pixel readout energy e_PX / (n*n*3) plus one ADC conversion.
/// Trend-level approximation only.
units::Joules baseline_energy(const ValidatedConfig& cfg, const CostConstants& consts);

struct SweepAxes {
  std::vector<int> strides;   ///< empty means 1..n
  std::vector<int> channels;
  std::vector<int> binnings;
};

struct SweepRow {
  int stride = 0;
  int channels = 0;
  int binning = 0;
  CostReport report;
  units::Joules baseline;
};

struct SkippedPoint {
  int stride = 0;
  int channels = 0;
  int binning = 0;
  std::string reason;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SkippedPoint> skipped;
};

/// Full factorial sweep over the template config. Points that fail validation are
/// listed in `skipped` rather than raising.
SweepTable sweep(const FpcaConfig& base, const SweepAxes& axes, const CostConstants& consts);

/// CSV with a leading `# {json}` metadata line.
std::string sweep_csv(const SweepTable& table, const FpcaConfig& base, const CostConstants& consts);

}  // namespace fpca
