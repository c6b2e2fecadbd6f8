#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fpca/error.hpp"
#include "fpca/tensor.hpp"

namespace fpca {

/// Array geometry and algorithm parameters. Counts are in pixels unless noted.
struct FpcaConfig {
  int rows = 0;          ///< physical pixel rows R_P
  int cols = 0;          ///< physical pixel columns C_P
  int max_kernel = 0;    ///< n; kernels are n x n x 3
  int out_channels = 0;  ///< c_o
  int stride = 1;        ///< S, horizontal and vertical
  int padding = 0;       ///< p
  int binning = 1;       ///< b_bin, 1 = no binning
  int adc_bits = 8;      ///< b_ADC
  int skip_block = 8;    ///< edge length of a region-skip block, in effective pixels
  double v_max = 1.0;    ///< full-scale bitline voltage
  int nvm_levels = 16;   ///< conductance levels per NVM cell
};

struct Violation {
  Errc code;
  std::string message;
};

/// Every invariant violated by `raw`; empty when the config is usable.
std::vector<Violation> check(const FpcaConfig& raw);

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// A config that passed `check`. Immutable.
class ValidatedConfig {
 public:
  const FpcaConfig& raw() const noexcept { return cfg_; }
  const FpcaConfig* operator->() const noexcept { return &cfg_; }
  const FpcaConfig& operator*() const noexcept { return cfg_; }

 private:
  explicit ValidatedConfig(const FpcaConfig& cfg) : cfg_(cfg) {}
  friend ValidatedConfig validate(const FpcaConfig& raw);

  FpcaConfig cfg_;
};

/// Throws ConfigError carrying every violation.
ValidatedConfig validate(const FpcaConfig& raw);

struct DerivedGeometry {
  int h_i = 0;  ///< effective input height after binning
  int w_i = 0;
  int h_o = 0;
  int w_o = 0;
  int colp_period = 0;  ///< lcm(S, n) / S
  int pixels_per_conv = 0;  ///< n * n * 3, the bitline activation count
  bool partial_skip_blocks = false;  ///< skip_block does not divide h_i or w_i
};

DerivedGeometry derive_geometry(const ValidatedConfig& cfg);

/// Mean-pools each b x b block per color channel.
Image apply_binning(const Image& image, int binning);

FpcaConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FpcaConfig& cfg);
nlohmann::json to_json(const DerivedGeometry& geom);

FpcaConfig load_config(const std::string& path);

}  // namespace fpca
