#include <doctest.h>

#include "fpca/analog.hpp"
#include "oracles.hpp"

using namespace fpca;

namespace {

Contributions constant(Eigen::Index n, double i, double w) {
  Contributions c(n);
  c.current.setConstant(i);
  c.conductance.setConstant(w);
  return c;
}

ValidatedConfig square(int h_i, int n, int s, int c_o, int bits = 16, int p = 0) {
  FpcaConfig c;
  c.rows = c.cols = h_i;
  c.max_kernel = n;
  c.stride = s;
  c.out_channels = c_o;
  c.adc_bits = bits;
  c.padding = p;
  return validate(c);
}

}  // namespace

TEST_CASE("bitline basic values") {
  for (const DeviceModel& m : {DeviceModel{IdealLinear{}}, DeviceModel{SaturatingOracle{}}})
    CHECK(bitline(constant(75, 0, 0), m) == 0.0);
  CHECK(bitline(constant(1, 1, 1), IdealLinear{1.0}) == doctest::Approx(1.0));
  // 75 * (1 / 1.3) / (75 / 1.3 + 0.5 * 75)
  const double d = 75.0 / 1.3;
  CHECK(bitline(constant(75, 1, 1), SaturatingOracle{1.0, 0.5, 0.3}) ==
        doctest::Approx(d / (d + 37.5)));
  CHECK(bitline(constant(75, 1, 1), SaturatingOracle{}) == doctest::Approx(0.6061).epsilon(1e-3));
  CHECK_THROWS_AS(bitline(Contributions(0), IdealLinear{}), Error);
}

TEST_CASE("bitline is monotone in every input") {
  Rng rng(5);
  const DeviceModel models[] = {IdealLinear{}, SaturatingOracle{}, SaturatingOracle{2.0, 0.1, 2.0}};
  for (const auto& m : models)
    for (int t = 0; t < 200; ++t) {
      Contributions c(75);
      fpca::random_contributions(rng, c.current, c.conductance);
      const double v = bitline(c, m);
      CHECK(v >= 0.0);
      CHECK(v <= full_scale(m));
      const auto k = static_cast<Eigen::Index>(rng() % 75);
      Contributions up = c;
      up.current(k) = std::min(1.0, up.current(k) + 0.1);
      CHECK(bitline(up, m) >= v);
      up = c;
      up.conductance(k) = std::min(1.0, up.conductance(k) + 0.1);
      CHECK(bitline(up, m) >= v);
    }
}

TEST_CASE("saturating oracle approaches linear at large kappa") {
  Rng rng(9);
  const SaturatingOracle sat{1.0, 100.0, 0.0};
  std::vector<double> a, b;
  for (int t = 0; t < 500; ++t) {
    Contributions c(75);
    fpca::random_contributions(rng, c.current, c.conductance);
    a.push_back(bitline(c, sat));
    b.push_back(bitline(c, IdealLinear{}));
  }
  Eigen::Map<Eigen::ArrayXd> x(a.data(), 500), y(b.data(), 500);
  const double cov = ((x - x.mean()) * (y - y.mean())).mean();
  const double corr = cov / std::sqrt((x - x.mean()).square().mean() * (y - y.mean()).square().mean());
  CHECK(corr > 0.999);
}

TEST_CASE("adc_convert") {
  const AdcSpec spec{8, 1.0, 0};
  CHECK(adc_convert(0.3, 0.3, spec) == 0);
  CHECK(adc_convert(0.5, 0.0, spec) == 128);
  CHECK(adc_convert(0.0, 0.5, spec) == 0);
  CHECK(adc_convert(1.0, 0.0, spec) == 255);
  CHECK(adc_convert(0.0, 0.0, AdcSpec{8, 1.0, 10}) == 10);
  CHECK(adc_convert(1.0, 0.0, AdcSpec{8, 1.0, 10}) == 255);
  CHECK(adc_convert(0.1, 0.2, AdcSpec{8, 1.0, 40}) == 40 + 26 - 51);
  CHECK_THROWS_AS(adc_convert(1.5, 0.0, spec), Error);
  CHECK_THROWS_AS(adc_convert(0.0, -0.1, spec), Error);
}

TEST_CASE("up/down counting is order independent") {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const double a = uniform01(rng), b = uniform01(rng);
    const long off = static_cast<long>(rng() % 64) - 32;
    const AdcSpec spec{6, 1.0, off};
    UpDownCounter x(spec), y(spec);
    x.up(a);
    x.down(b);
    y.down(b);
    y.up(a);
    CHECK(x.result() == y.result());
    CHECK(x.result() >= 0);
    CHECK(x.result() <= 63);
  }
}

TEST_CASE("run_frame with the ideal model matches direct convolution") {
  Rng rng(21);
  for (int n : {1, 3, 5})
    for (int s = 1; s <= n; ++s)
      for (int p : {0, n / 2}) {
        const int h = 3 * s + n - 2 * p;  // h_o = 4
        const auto cfg = square(h, n, s, 2, 16, p);
        std::vector<Kernel> ks = {oracle::random_kernel(rng, n), oracle::random_kernel(rng, n)};
        const auto block = WeightBlock::program(ks, cfg);
        const Image img = oracle::random_image(rng, h, h);
        const auto out = run_frame(img, block, cfg, IdealLinear{1.0});
        for (int o = 0; o < 2; ++o) {
          const auto ref = oracle::conv2d(img, ks[o], s, p, cfg->nvm_levels);
          for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
              CHECK(std::abs(out(y, x, o) - oracle::relu_counts(ref[y][x], n * n * 3, 16)) <= 1);
        }
      }
}

TEST_CASE("run_frame zero image and identity tap") {
  const auto cfg = square(15, 3, 3, 1, 8);
  Rng rng(2);
  const auto block = WeightBlock::program(std::vector<Kernel>{oracle::random_kernel(rng, 3)}, cfg);
  const auto zero = run_frame(Image::Zero(15, 15), block, cfg, SaturatingOracle{});
  CHECK(zero.channels[0].maxCoeff() == 0);

  // Center tap on the green channel only; output is green subsampled at (3y+1, 3x+1).
  Kernel tap = Kernel::Zero(3, 3);
  tap(1, 1, 1) = 1.0;
  const auto cfg16 = square(15, 3, 3, 1, 16);
  const auto id = WeightBlock::program(std::vector<Kernel>{tap}, cfg16);
  const Image img = oracle::random_image(rng, 15, 15);
  const auto out = run_frame(img, id, cfg16, IdealLinear{});
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      const long expect = std::lround(img(3 * y + 1, 3 * x + 1, 1) / 27.0 * 65535);
      CHECK(std::abs(out(y, x, 0) - expect) <= 1);
    }
}

TEST_CASE("run_frame leaves skipped outputs at zero") {
  FpcaConfig c;
  c.rows = c.cols = 16;
  c.max_kernel = 2;
  c.stride = 2;
  c.out_channels = 1;
  c.skip_block = 8;
  const auto cfg = validate(c);
  const auto g = derive_geometry(cfg);
  BoolGrid blocks = BoolGrid::Constant(2, 2, true);
  blocks(0, 0) = false;
  blocks(0, 1) = false;
  const auto mask = RegionSkipMask::from_blocks(g, 8, blocks);
  const auto block = WeightBlock::program(std::vector<Kernel>{Kernel::Constant(2, 2, 1.0)}, cfg);
  const auto out = run_frame(Image::Constant(16, 16, 1.0), block, cfg, IdealLinear{}, mask);
  CHECK(out.skipped.count() == 32);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK((out(y, x, 0) == 0) == out.skipped(y, x));
  // output rows 0-3 are fully skipped, so their pos/neg reads go
  CHECK(out.cycles == enumerate(cfg).size() - 8);
}

TEST_CASE("run_frame bn offset and shape errors") {
  const auto cfg = square(3, 3, 3, 1, 8);
  const auto block = WeightBlock::program(std::vector<Kernel>{Kernel::Constant(3, 3, -1.0)}, cfg);
  const Image img = Image::Constant(3, 3, 1.0);
  CHECK(run_frame(img, block, cfg, IdealLinear{}, 0)(0, 0, 0) == 0);
  CHECK(run_frame(img, block, cfg, IdealLinear{}, 300)(0, 0, 0) == 45);
  CHECK_THROWS_AS(run_frame(Image::Zero(4, 4), block, cfg, IdealLinear{}), Error);
  CHECK_THROWS_AS(run_frame(img, block, cfg, IdealLinear{2.0}), Error);
}

TEST_CASE("run_sensor_frame bins before convolving") {
  FpcaConfig c;
  c.rows = c.cols = 8;
  c.binning = 2;
  c.max_kernel = 2;
  c.stride = 2;
  c.out_channels = 1;
  c.adc_bits = 12;
  const auto cfg = validate(c);
  const auto block = WeightBlock::program(std::vector<Kernel>{Kernel::Constant(2, 2, 1.0)}, cfg);
  const auto out = run_sensor_frame(Image::Constant(8, 8, 0.5), block, cfg, IdealLinear{},
                                    RegionSkipMask::all_active(derive_geometry(cfg), 8));
  CHECK(out.channels[0].rows() == 2);
  CHECK(out(1, 1, 0) == std::lround(0.5 * 4095));
}
