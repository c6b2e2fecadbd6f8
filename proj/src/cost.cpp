#include "fpca/cost.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "fpca/scheduler.hpp"

namespace fpca {

CostConstants CostConstants::for_config(const ValidatedConfig& cfg) {
  CostConstants c;
  c.b_adc = cfg->adc_bits;
  return c;
}

nlohmann::json to_json(const CostConstants& c) {
  return {{"e_px_J", c.e_px.value},
          {"e_adc_J", c.e_adc.value},
          {"e_io_J_per_bit", c.e_io.value},
          {"b_adc", c.b_adc},
          {"bw_io_bit_per_s", c.bw_io.value},
          {"n_io_pad", c.n_io_pad},
          {"t_exp_s", c.t_exp.value},
          {"t_adc_s", c.t_adc.value},
          {"bayer_factor", c.bayer_factor},
          {"raw_bit_depth", c.raw_bit_depth}};
}

std::uint64_t frame_cycles(const ValidatedConfig& cfg) {
  const auto g = derive_geometry(cfg);
  return cycle_count(g.h_o, cfg->out_channels, cfg->stride, cfg->max_kernel);
}

EnergyBreakdown energy(const ValidatedConfig& cfg, const CostConstants& consts,
                       std::optional<std::uint64_t> n_c) {
  const auto g = derive_geometry(cfg);
  const double cycles = static_cast<double>(n_c.value_or(frame_cycles(cfg)));
  const double bits = static_cast<double>(g.h_o) * g.w_o * cfg->out_channels * consts.b_adc;
  EnergyBreakdown e;
  e.io = bits * consts.e_io;
  e.frontend = cycles * (consts.e_px + consts.e_adc) + e.io;
  return e;
}

LatencyBreakdown latency(const ValidatedConfig& cfg, const CostConstants& consts,
                         std::optional<std::uint64_t> n_c) {
  const auto g = derive_geometry(cfg);
  const double cycles = static_cast<double>(n_c.value_or(frame_cycles(cfg)));
  LatencyBreakdown l;
  l.io_per_cycle = (static_cast<double>(g.w_o) * consts.b_adc) / (consts.n_io_pad * consts.bw_io);
  l.frontend = cycles * (consts.t_exp + consts.t_adc + l.io_per_cycle);
  l.max_fps = units::inverse(l.frontend);
  return l;
}

double bandwidth_reduction(const ValidatedConfig& cfg, const CostConstants& consts) {
  const auto g = derive_geometry(cfg);
  const double input = static_cast<double>(g.h_i) * g.w_i * kColorChannels;
  const double output = static_cast<double>(g.h_o) * g.w_o * cfg->out_channels;
  return (input / output) * consts.bayer_factor *
         (static_cast<double>(consts.raw_bit_depth) / consts.b_adc);
}

CostReport evaluate(const ValidatedConfig& cfg, const CostConstants& consts,
                    std::optional<std::uint64_t> n_c) {
  CostReport r;
  r.n_c = n_c.value_or(frame_cycles(cfg));
  const auto e = energy(cfg, consts, r.n_c);
  const auto l = latency(cfg, consts, r.n_c);
  r.e_frontend = e.frontend;
  r.e_io = e.io;
  r.t_frontend = l.frontend;
  r.max_fps = l.max_fps;
  r.br = bandwidth_reduction(cfg, consts);
  return r;
}

units::Joules baseline_energy(const ValidatedConfig& cfg, const CostConstants& consts) {
  const double pixels = static_cast<double>(cfg->rows) * cfg->cols;
  const double per_conv = static_cast<double>(cfg->max_kernel) * cfg->max_kernel * kColorChannels;
  const double raw_bits = pixels * kColorChannels * consts.raw_bit_depth;
  return raw_bits * consts.e_io + pixels * (consts.e_px / per_conv + consts.e_adc);
}

SweepTable sweep(const FpcaConfig& base, const SweepAxes& axes, const CostConstants& consts) {
  std::vector<int> strides = axes.strides;
  if (strides.empty()) {
    strides.resize(static_cast<std::size_t>(std::max(base.max_kernel, 0)));
    std::iota(strides.begin(), strides.end(), 1);
  }
  const std::vector<int> channels = axes.channels.empty() ? std::vector<int>{base.out_channels} : axes.channels;
  const std::vector<int> binnings = axes.binnings.empty() ? std::vector<int>{base.binning} : axes.binnings;

  SweepTable table;
  for (int b : binnings)
    for (int c_o : channels)
      for (int s : strides) {
        FpcaConfig point = base;
        point.stride = s;
        point.out_channels = c_o;
        point.binning = b;
        const auto violations = check(point);
        if (!violations.empty()) {
          table.skipped.push_back({s, c_o, b, ConfigError(violations).what()});
          continue;
        }
        const auto cfg = validate(point);
        table.rows.push_back({s, c_o, b, evaluate(cfg, consts), baseline_energy(cfg, consts)});
      }
  return table;
}

std::string sweep_csv(const SweepTable& table, const FpcaConfig& base, const CostConstants& consts) {
  nlohmann::json meta;
  meta["constants"] = to_json(consts);
  meta["config"] = to_json(base);
  meta["baseline"] = {
      {"definition",
       "rows*cols*3*raw_bit_depth*e_io + rows*cols*(e_px/(max_kernel^2*3) + e_adc)"},
      {"version", 1}};
  if (!table.rows.empty()) meta["baseline"]["energy_J"] = table.rows.front().baseline.value;
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : table.skipped)
    skipped.push_back({{"S", s.stride}, {"c_o", s.channels}, {"binning", s.binning}, {"reason", s.reason}});
  meta["skipped"] = std::move(skipped);

  std::ostringstream os;
  os << "# " << meta.dump() << '\n';
  os << "S,c_o,binning,n_c,e_frontend_J,e_io_J,t_frontend_s,max_fps,br\n";
  char buf[256];
  for (const auto& row : table.rows) {
    const auto& r = row.report;
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%llu,%.9g,%.9g,%.9g,%.9g,%.9g\n", row.stride,
                  row.channels, row.binning, static_cast<unsigned long long>(r.n_c),
                  r.e_frontend.value, r.e_io.value, r.t_frontend.value, r.max_fps.value, r.br);
    os << buf;
  }
  return os.str();
}

}  // namespace fpca
