#include "fpca/scheduler.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace fpca {

namespace {

int positive_mod(int a, int m) { return ((a % m) + m) % m; }

// Physical index range [lo, hi) of a window starting at padded index `start`.
std::pair<int, int> physical_span(int start, int n, int padding, int extent) {
  const int lo = std::max(start - padding, 0);
  const int hi = std::min(start - padding + n, extent);
  return {lo, std::max(lo, hi)};
}

std::string ranges(const std::vector<int>& sorted) {
  if (sorted.empty()) return "-";
  std::ostringstream os;
  std::size_t i = 0;
  bool first = true;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[j] + 1) ++j;
    if (!first) os << ',';
    first = false;
    os << sorted[i];
    if (j > i) os << '-' << sorted[j];
    i = j + 1;
  }
  return os.str();
}

}  // namespace

RegionSkipMask RegionSkipMask::all_active(const DerivedGeometry& geom, int block) {
  if (block < 1) throw Error(Errc::InvalidParameter, "skip block must be >= 1");
  const int br = (geom.h_i + block - 1) / block;
  const int bc = (geom.w_i + block - 1) / block;
  return from_blocks(geom, block, BoolGrid::Constant(br, bc, true));
}

RegionSkipMask RegionSkipMask::from_blocks(const DerivedGeometry& geom, int block,
                                           BoolGrid active) {
  if (block < 1) throw Error(Errc::InvalidParameter, "skip block must be >= 1");
  const int br = (geom.h_i + block - 1) / block;
  const int bc = (geom.w_i + block - 1) / block;
  if (active.rows() != br || active.cols() != bc) {
    throw Error(Errc::ShapeMismatch,
                "skip mask is " + std::to_string(active.rows()) + "x" +
                    std::to_string(active.cols()) + " blocks, expected " + std::to_string(br) +
                    "x" + std::to_string(bc));
  }
  RegionSkipMask m;
  m.block_ = block;
  m.rows_ = geom.h_i;
  m.cols_ = geom.w_i;
  m.active_ = std::move(active);
  return m;
}

std::vector<int> colp_sequence(int stride, int n) {
  const int period = std::lcm(stride, n) / stride;
  std::vector<int> phases(static_cast<std::size_t>(period));
  for (int k = 0; k < period; ++k) phases[static_cast<std::size_t>(k)] = (k * stride) % n;
  return phases;
}

SwitchMatrixConfig switch_for_row(int top_row, int n) {
  return SwitchMatrixConfig{top_row % n, n};
}

std::uint64_t cycle_count(int h_o, int c_o, int stride, int n) {
  return 2ull * static_cast<std::uint64_t>(h_o) * static_cast<std::uint64_t>(c_o) *
         static_cast<std::uint64_t>(std::lcm(stride, n) / stride);
}

BoolGrid skipped_outputs(const ValidatedConfig& cfg, const RegionSkipMask& mask) {
  const auto geom = derive_geometry(cfg);
  if (mask.image_rows() != geom.h_i || mask.image_cols() != geom.w_i) {
    throw Error(Errc::ShapeMismatch, "skip mask does not match the effective image size");
  }
  BoolGrid skipped = BoolGrid::Constant(geom.h_o, geom.w_o, false);
  if (mask.all()) return skipped;
  const int n = cfg->max_kernel;
  const int S = cfg->stride;
  const int p = cfg->padding;
  for (int y = 0; y < geom.h_o; ++y) {
    const auto [r_lo, r_hi] = physical_span(y * S, n, p, geom.h_i);
    for (int x = 0; x < geom.w_o; ++x) {
      const auto [c_lo, c_hi] = physical_span(x * S, n, p, geom.w_i);
      if (r_lo == r_hi || c_lo == c_hi) continue;  // window is pure padding
      bool any_active = false;
      for (int br = r_lo / mask.block(); br <= (r_hi - 1) / mask.block() && !any_active; ++br)
        for (int bc = c_lo / mask.block(); bc <= (c_hi - 1) / mask.block(); ++bc)
          if (mask.block_active(br, bc)) {
            any_active = true;
            break;
          }
      skipped(y, x) = !any_active;
    }
  }
  return skipped;
}

ControlSchedule enumerate(const ValidatedConfig& cfg, const RegionSkipMask& mask) {
  const auto geom = derive_geometry(cfg);
  const BoolGrid skipped = skipped_outputs(cfg, mask);
  const int n = cfg->max_kernel;
  const int S = cfg->stride;
  const int p = cfg->padding;
  const auto phases = colp_sequence(S, n);

  // Output columns served by each phase; phases are distinct residues mod n.
  std::vector<std::vector<int>> columns_by_phase(static_cast<std::size_t>(n));
  for (int x = 0; x < geom.w_o; ++x)
    columns_by_phase[static_cast<std::size_t>((x * S) % n)].push_back(x);

  ControlSchedule schedule;
  schedule.cycles.reserve(cycle_count(geom.h_o, cfg->out_channels, S, n));
  for (int y = 0; y < geom.h_o; ++y) {
    const int top = y * S;
    const auto [r_lo, r_hi] = physical_span(top, n, p, geom.h_i);
    std::vector<int> rows(static_cast<std::size_t>(r_hi - r_lo));
    std::iota(rows.begin(), rows.end(), r_lo);
    const SwitchMatrixConfig sm = switch_for_row(top, n);

    for (int ch = 0; ch < cfg->out_channels; ++ch) {
      for (int phase : phases) {
        Cycle cycle;
        cycle.channel = ch;
        cycle.colp_phase = phase;
        cycle.rs_rows = rows;
        cycle.switch_matrix = sm;
        const auto& served = columns_by_phase[static_cast<std::size_t>(phase)];
        for (int x : served) {
          if (skipped(y, x)) continue;
          cycle.out_coords.push_back({y, x, ch});
          const auto [c_lo, c_hi] = physical_span(x * S, n, p, geom.w_i);
          for (int c = c_lo; c < c_hi; ++c) cycle.sw_cols.push_back(c);
        }
        // A phase serving no column (w_o shorter than the ColP period) still occupies
        // its slot; only phases whose every output is skipped are dropped.
        if (cycle.out_coords.empty() && !served.empty()) continue;
        cycle.sign = Sign::Pos;
        schedule.cycles.push_back(cycle);
        cycle.sign = Sign::Neg;
        schedule.cycles.push_back(std::move(cycle));
      }
    }
  }
  return schedule;
}

ControlSchedule enumerate(const ValidatedConfig& cfg) {
  return enumerate(cfg, RegionSkipMask::all_active(derive_geometry(cfg), cfg->skip_block));
}

std::vector<PixelWeightLink> pixel_weight_map(const Cycle& cycle, const ValidatedConfig& cfg) {
  const auto geom = derive_geometry(cfg);
  const int n = cfg->max_kernel;
  const int S = cfg->stride;
  const int p = cfg->padding;
  if (cycle.switch_matrix.lines != n) {
    throw Error(Errc::InconsistentPhase, "switch matrix has " +
                                             std::to_string(cycle.switch_matrix.lines) +
                                             " lines, expected " + std::to_string(n));
  }
  std::vector<PixelWeightLink> links;
  links.reserve(cycle.out_coords.size() * static_cast<std::size_t>(n * n));
  for (const OutputCoord& out : cycle.out_coords) {
    const int top = out.row * S;
    const int left = out.col * S;
    if (left % n != cycle.colp_phase) {
      throw Error(Errc::InconsistentPhase,
                  "output column " + std::to_string(out.col) + " starts at phase " +
                      std::to_string(left % n) + " but ColP phase is " +
                      std::to_string(cycle.colp_phase));
    }
    if (top % n != cycle.switch_matrix.rotation) {
      throw Error(Errc::InconsistentPhase,
                  "output row " + std::to_string(out.row) + " needs rotation " +
                      std::to_string(top % n) + " but switch matrix has " +
                      std::to_string(cycle.switch_matrix.rotation));
    }
    if (out.channel != cycle.channel) {
      throw Error(Errc::InconsistentPhase, "output channel differs from the selected channel");
    }
    const auto [r_lo, r_hi] = physical_span(top, n, p, geom.h_i);
    const auto [c_lo, c_hi] = physical_span(left, n, p, geom.w_i);
    for (int r = r_lo; r < r_hi; ++r) {
      const int line = sm_line_for_pixel_row(r + p, n);
      const int kernel_row = cycle.switch_matrix.kernel_row_for_line(line);
      for (int c = c_lo; c < c_hi; ++c) {
        const int kernel_col = positive_mod(c + p - cycle.colp_phase, n);
        links.push_back({r, c, kernel_row, kernel_col, out});
      }
    }
  }
  return links;
}

CoverageReport coverage_check(const ControlSchedule& schedule, const ValidatedConfig& cfg) {
  const auto geom = derive_geometry(cfg);
  const int c_o = cfg->out_channels;
  const std::size_t total = static_cast<std::size_t>(geom.h_o) * geom.w_o * c_o;
  std::vector<int> pos(total, 0), neg(total, 0);
  CoverageReport report;
  report.expected_outputs = total;
  for (const Cycle& cycle : schedule.cycles) {
    for (const OutputCoord& o : cycle.out_coords) {
      if (o.row < 0 || o.row >= geom.h_o || o.col < 0 || o.col >= geom.w_o || o.channel < 0 ||
          o.channel >= c_o) {
        report.duplicates.push_back(o);  // out-of-range coordinates are never legitimate
        continue;
      }
      const std::size_t idx =
          (static_cast<std::size_t>(o.row) * geom.w_o + o.col) * c_o + o.channel;
      auto& counter = cycle.sign == Sign::Pos ? pos[idx] : neg[idx];
      if (++counter > 1) report.duplicates.push_back(o);
    }
  }
  for (int y = 0; y < geom.h_o; ++y)
    for (int x = 0; x < geom.w_o; ++x)
      for (int ch = 0; ch < c_o; ++ch) {
        const std::size_t idx = (static_cast<std::size_t>(y) * geom.w_o + x) * c_o + ch;
        if (pos[idx] == 0 || neg[idx] == 0) report.gaps.push_back({y, x, ch});
      }
  return report;
}

nlohmann::json to_json(const Cycle& cycle) {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : cycle.out_coords) outs.push_back({o.row, o.col, o.channel});
  return {{"sign", to_string(cycle.sign)},
          {"channel", cycle.channel},
          {"colp_phase", cycle.colp_phase},
          {"rotation", cycle.switch_matrix.rotation},
          {"rs_rows", cycle.rs_rows},
          {"sw_cols", cycle.sw_cols},
          {"out_coords", outs}};
}

nlohmann::json to_json(const ControlSchedule& schedule) {
  nlohmann::json cycles = nlohmann::json::array();
  for (const auto& c : schedule.cycles) cycles.push_back(to_json(c));
  return {{"n_c", schedule.size()}, {"cycles", std::move(cycles)}};
}

std::string trace_line(const Cycle& cycle) {
  std::ostringstream os;
  os << (cycle.sign == Sign::Pos ? '+' : '-') << " ch=" << cycle.channel
     << " colp=" << cycle.colp_phase << " rot=" << cycle.switch_matrix.rotation
     << " rows=" << ranges(cycle.rs_rows) << " cols=" << ranges(cycle.sw_cols)
     << " outs=" << cycle.out_coords.size();
  return os.str();
}

std::string to_trace(const ControlSchedule& schedule) {
  std::ostringstream os;
  os << "# n_c=" << schedule.size() << '\n';
  for (std::size_t i = 0; i < schedule.cycles.size(); ++i)
    os << i << ' ' << trace_line(schedule.cycles[i]) << '\n';
  return os.str();
}

RegionSkipMask mask_from_json(const nlohmann::json& j, const DerivedGeometry& geom) {
  try {
    const int block = j.at("block").get<int>();
    const auto& rows = j.at("active");
    if (!rows.is_array() || rows.empty()) throw Error(Errc::ParseError, "mask 'active' must be a non-empty array");
    const auto br = static_cast<Eigen::Index>(rows.size());
    const auto bc = static_cast<Eigen::Index>(rows.front().size());
    BoolGrid active(br, bc);
    for (Eigen::Index r = 0; r < br; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      if (static_cast<Eigen::Index>(row.size()) != bc) throw Error(Errc::ShapeMismatch, "ragged skip mask");
      for (Eigen::Index c = 0; c < bc; ++c) {
        const auto& v = row.at(static_cast<std::size_t>(c));
        active(r, c) = v.is_boolean() ? v.get<bool>() : v.get<int>() != 0;
      }
    }
    return RegionSkipMask::from_blocks(geom, block, std::move(active));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("skip mask: ") + e.what());
  }
}

nlohmann::json to_json(const RegionSkipMask& mask) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < mask.blocks().rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < mask.blocks().cols(); ++c) row.push_back(mask.blocks()(r, c) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  return {{"block", mask.block()}, {"active", std::move(rows)}};
}

}  // namespace fpca
