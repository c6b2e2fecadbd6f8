#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpca/config.hpp"
#include "fpca/weight_plane.hpp"

namespace fpca {

/// Cyclic routing of kernel rows onto the n SM lines: kernel row k drives line (k + rotation) mod n.
struct SwitchMatrixConfig {
  int rotation = 0;
  int lines = 1;

  int line_for_kernel_row(int k) const { return (k + rotation) % lines; }
  int kernel_row_for_line(int line) const { return ((line - rotation) % lines + lines) % lines; }
};

/// SM line wired to a pixel row. Rows are counted in the zero-padded frame.
inline int sm_line_for_pixel_row(int padded_row, int n) { return padded_row % n; }

struct OutputCoord {
  int row = 0;
  int col = 0;
  int channel = 0;
  auto operator<=>(const OutputCoord&) const = default;
};

/// One bitline read: a channel/sign plane, a ColP phase and a switch rotation.
struct Cycle {
  Sign sign = Sign::Pos;
  int channel = 0;
  int colp_phase = 0;
  std::vector<int> rs_rows;  ///< physical rows with RS high
  std::vector<int> sw_cols;  ///< physical columns with SW high
  SwitchMatrixConfig switch_matrix;
  std::vector<OutputCoord> out_coords;
};

struct ControlSchedule {
  std::vector<Cycle> cycles;
  std::size_t size() const noexcept { return cycles.size(); }
};

/// Block-wise region skip bits over the effective (post-binning) image.
class RegionSkipMask {
 public:
  /// Every block active.
  static RegionSkipMask all_active(const DerivedGeometry& geom, int block);
  static RegionSkipMask from_blocks(const DerivedGeometry& geom, int block, BoolGrid active);

  int block() const noexcept { return block_; }
  int image_rows() const noexcept { return rows_; }
  int image_cols() const noexcept { return cols_; }
  const BoolGrid& blocks() const noexcept { return active_; }
  std::size_t storage_count() const noexcept { return static_cast<std::size_t>(active_.size()); }

  bool block_active(int block_row, int block_col) const { return active_(block_row, block_col); }
  bool pixel_active(int row, int col) const { return active_(row / block_, col / block_); }
  bool all() const { return active_.all(); }

 private:
  int block_ = 1;
  int rows_ = 0;
  int cols_ = 0;
  BoolGrid active_;
};

/// ColP phase sequence (k * S) mod n for k < lcm(S, n) / S.
std::vector<int> colp_sequence(int stride, int n);

SwitchMatrixConfig switch_for_row(int top_row, int n);

/// Closed-form cycle count 2 * h_o * c_o * lcm(S, n) / S.
std::uint64_t cycle_count(int h_o, int c_o, int stride, int n);

/// Outputs whose receptive field lies entirely inside skipped blocks (h_o x w_o).
BoolGrid skipped_outputs(const ValidatedConfig& cfg, const RegionSkipMask& mask);

/// Full control program. Order: output row, channel, ColP phase, then pos before neg.
/// Phases with no output column (w_o below the ColP period) still take their cycle slot.
ControlSchedule enumerate(const ValidatedConfig& cfg, const RegionSkipMask& mask);
ControlSchedule enumerate(const ValidatedConfig& cfg);

/// A physical pixel wired to one kernel position during a cycle.
struct PixelWeightLink {
  int pixel_row = 0;
  int pixel_col = 0;
  int kernel_row = 0;
  int kernel_col = 0;
  OutputCoord out;
};

/// Resolves the ColP and switch-matrix routing of a cycle into pixel -> kernel links.
/// Only pixels inside the physical array appear; padding positions carry no pixel.
std::vector<PixelWeightLink> pixel_weight_map(const Cycle& cycle, const ValidatedConfig& cfg);

struct CoverageReport {
  std::size_t expected_outputs = 0;
  std::vector<OutputCoord> gaps;        ///< missing a pos or a neg read
  std::vector<OutputCoord> duplicates;  ///< read more than once for a sign
  bool complete() const { return gaps.empty() && duplicates.empty(); }
};

CoverageReport coverage_check(const ControlSchedule& schedule, const ValidatedConfig& cfg);

nlohmann::json to_json(const Cycle& cycle);
nlohmann::json to_json(const ControlSchedule& schedule);
std::string trace_line(const Cycle& cycle);
std::string to_trace(const ControlSchedule& schedule);

RegionSkipMask mask_from_json(const nlohmann::json& j, const DerivedGeometry& geom);
nlohmann::json to_json(const RegionSkipMask& mask);

}  // namespace fpca
