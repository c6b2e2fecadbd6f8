#include <doctest.h>

#include <sstream>

#include "fpca/cost.hpp"
#include "oracles.hpp"

using namespace fpca;

namespace {

FpcaConfig make(int h_i, int n, int s, int c_o, int bits = 8, int binning = 1) {
  FpcaConfig c;
  c.rows = c.cols = h_i;
  c.max_kernel = n;
  c.stride = s;
  c.out_channels = c_o;
  c.adc_bits = bits;
  c.binning = binning;
  return c;
}

}  // namespace

TEST_CASE("energy worked example") {
  const auto cfg = validate(make(12, 3, 1, 8));  // h_o = w_o = 10
  const auto k = CostConstants::for_config(cfg);
  const auto e = energy(cfg, k);
  CHECK(e.io.value == doctest::Approx(10 * 10 * 8 * 8 * 12.34e-12));
  CHECK(e.io.value == doctest::Approx(78.976e-9));
  const auto n_c = oracle::eq1_cycles(10, 8, 1, 3);
  CHECK(frame_cycles(cfg) == n_c);
  CHECK(e.frontend.value == doctest::Approx(n_c * 189.9e-12 + 78.976e-9));
  CHECK(energy(cfg, k, 100).frontend.value == doctest::Approx(100 * 189.9e-12 + 78.976e-9));
}

TEST_CASE("latency") {
  const auto cfg = validate(make(102, 3, 1, 4));  // w_o = 100
  const auto k = CostConstants::for_config(cfg);
  const auto l = latency(cfg, k);
  CHECK(l.io_per_cycle.value == doctest::Approx(100.0 * 8 / (24 * 1e9)));
  CHECK(l.io_per_cycle.value == doctest::Approx(33.333e-9).epsilon(1e-4));
  const double n_c = static_cast<double>(frame_cycles(cfg));
  CHECK(l.frontend.value == doctest::Approx(n_c * (50e-6 + 1e-6 + l.io_per_cycle.value)));
  CHECK(l.max_fps.value == doctest::Approx(1.0 / l.frontend.value));

  const auto twice = validate(make(102, 3, 1, 8));
  CHECK(latency(twice, k).frontend.value == doctest::Approx(2 * l.frontend.value));
}

TEST_CASE("bandwidth reduction") {
  const auto k8 = CostConstants::for_config(validate(make(200, 5, 5, 8)));
  CHECK(bandwidth_reduction(validate(make(200, 5, 5, 8)), k8) == doctest::Approx(18.75));
  CHECK(bandwidth_reduction(validate(make(200, 5, 5, 16)), k8) == doctest::Approx(18.75 / 2));

  const auto cfg12 = validate(make(200, 5, 5, 8, 12));
  const auto k12 = CostConstants::for_config(cfg12);
  CHECK(bandwidth_reduction(cfg12, k12) == doctest::Approx(200.0 * 200 * 3 / (40 * 40 * 8) * 4 / 3));
}

TEST_CASE("baseline energy") {
  const auto cfg = validate(make(30, 3, 3, 2));
  const auto k = CostConstants::for_config(cfg);
  const double px = 900;
  CHECK(baseline_energy(cfg, k).value ==
        doctest::Approx(px * 3 * 12 * 12.34e-12 + px * (148e-12 / 27 + 41.9e-12)));
}

TEST_CASE("sweep trends and skipped points") {
  const auto base = make(245, 5, 1, 8);
  const auto k = CostConstants{};
  const auto table = sweep(base, {{}, {8, 16}, {1, 5}}, k);
  // 245 bins by 5 to 49; strides 3 and 5 do not divide 49 - 5.
  CHECK(table.rows.size() + table.skipped.size() == 20);
  CHECK_FALSE(table.skipped.empty());
  for (const auto& s : table.skipped) CHECK_FALSE(s.reason.empty());

  auto find = [&](int s, int c, int b) -> const SweepRow* {
    for (const auto& r : table.rows)
      if (r.stride == s && r.channels == c && r.binning == b) return &r;
    return nullptr;
  };
  const auto* s1 = find(1, 8, 1);
  const auto* s5 = find(5, 8, 1);
  REQUIRE(s1);
  REQUIRE(s5);
  CHECK(s5->report.e_frontend < s1->report.e_frontend);
  CHECK(s5->report.br > s1->report.br);
  CHECK(s5->report.max_fps > s1->report.max_fps);
  const auto* c16 = find(1, 16, 1);
  REQUIRE(c16);
  CHECK(c16->report.t_frontend.value == doctest::Approx(2 * s1->report.t_frontend.value).epsilon(0.01));
  CHECK(c16->report.br == doctest::Approx(s1->report.br / 2));

  const std::string csv = sweep_csv(table, base, k);
  std::istringstream in(csv);
  std::string meta, header;
  std::getline(in, meta);
  std::getline(in, header);
  CHECK(meta.rfind("# {", 0) == 0);
  CHECK(header == "S,c_o,binning,n_c,e_frontend_J,e_io_J,t_frontend_s,max_fps,br");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == table.rows.size());
  CHECK(nlohmann::json::parse(meta.substr(2)).at("skipped").size() == table.skipped.size());
}
