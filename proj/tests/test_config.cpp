#include <doctest.h>

#include <numeric>

#include "fpca/config.hpp"

using namespace fpca;

namespace {

FpcaConfig base() {
  FpcaConfig c;
  c.rows = c.cols = 1000;
  c.max_kernel = 5;
  c.out_channels = 8;
  c.stride = 5;
  return c;
}

bool has(const std::vector<Violation>& v, Errc code) {
  for (const auto& x : v)
    if (x.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("validate accepts a 1000x1000 array with non-overlapping 5x5 stride") {
  CHECK(check(base()).empty());
  CHECK_NOTHROW(validate(base()));
}

TEST_CASE("validate rejects non-integral output height") {
  auto c = base();
  c.rows = 201;  // (201 - 5) / 5 is not integral
  const auto v = check(c);
  CHECK(has(v, Errc::NonIntegralOutputDim));
  try {
    validate(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.code() == Errc::NonIntegralOutputDim);
  }
}

TEST_CASE("validate rejects stride above kernel and zero dims") {
  auto c = base();
  c.stride = 7;
  CHECK(has(check(c), Errc::StrideExceedsKernel));

  c = base();
  c.out_channels = 0;
  CHECK(has(check(c), Errc::ZeroDim));
  c = base();
  c.rows = 0;
  CHECK(has(check(c), Errc::ZeroDim));
  c = base();
  c.binning = 3;
  CHECK(has(check(c), Errc::IndivisibleBinning));
}

TEST_CASE("validate collects every violation") {
  auto c = base();
  c.stride = 7;
  c.out_channels = 0;
  c.nvm_levels = 1;
  CHECK(check(c).size() == 3);
}

TEST_CASE("derive_geometry follows the output-size formula") {
  auto c = base();
  c.rows = c.cols = 200;
  auto g = derive_geometry(validate(c));
  CHECK(g.h_o == 40);
  CHECK(g.w_o == 40);
  CHECK(g.colp_period == 1);
  CHECK(g.pixels_per_conv == 75);

  c.rows = c.cols = 5;
  c.stride = 1;
  g = derive_geometry(validate(c));
  CHECK(g.h_o == 1);

  c = base();
  c.rows = c.cols = 201;
  c.stride = 2;
  g = derive_geometry(validate(c));
  CHECK(g.colp_period == 5);
}

TEST_CASE("derive_geometry identity h_o*S + n - 2p == h_i + S over a grid") {
  for (int n = 1; n <= 6; ++n)
    for (int s = 1; s <= n; ++s)
      for (int p = 0; p < n; ++p)
        for (int h = 1; h <= 40; ++h) {
          FpcaConfig c;
          c.rows = c.cols = h;
          c.max_kernel = n;
          c.stride = s;
          c.padding = p;
          c.out_channels = 1;
          if (!check(c).empty()) continue;
          const auto g = derive_geometry(validate(c));
          CHECK(g.h_o * s + n - 2 * p == g.h_i + s);
          CHECK(g.colp_period * s == std::lcm(s, n));
          CHECK(g.colp_period == n / std::gcd(s, n));
        }
}

TEST_CASE("partial skip blocks are flagged, not rejected") {
  auto c = base();
  c.rows = c.cols = 20;  // 20 % 8 != 0
  c.stride = 5;
  const auto g = derive_geometry(validate(c));
  CHECK(g.partial_skip_blocks);
}

TEST_CASE("apply_binning") {
  Image img(2, 2);
  for (auto& p : img.planes) p.setConstant(0.25);
  CHECK(apply_binning(img, 1) == img);
  const Image one = apply_binning(img, 2);
  CHECK(one.rows() == 1);
  CHECK(one(0, 0, 1) == doctest::Approx(0.25));

  Image ramp(4, 4);
  double v = 0;
  for (int r = 0; r < 4; ++r)
    for (int col = 0; col < 4; ++col) {
      ramp(r, col, 0) = v / 15.0;
      ramp(r, col, 1) = 1.0 - v / 15.0;
      ramp(r, col, 2) = (r == col) ? 1.0 : 0.0;
      v += 1;
    }
  const Image mean = apply_binning(ramp, 4);
  CHECK(mean(0, 0, 0) == doctest::Approx(0.5));  // (0 + ... + 15) / 16 / 15
  CHECK(mean(0, 0, 1) == doctest::Approx(0.5));
  CHECK(mean(0, 0, 2) == doctest::Approx(0.25));

  CHECK_THROWS_AS(apply_binning(ramp, 3), Error);
}

TEST_CASE("apply_binning preserves channel means") {
  Image img(6, 8);
  int k = 0;
  for (auto& p : img.planes) p = p.unaryExpr([&](double) { return ((k++ * 37) % 101) / 100.0; });
  const Image b = apply_binning(img, 2);
  for (int ch = 0; ch < 3; ++ch) CHECK(b.planes[ch].mean() == doctest::Approx(img.planes[ch].mean()));
}

TEST_CASE("config JSON rejects unknown keys and round-trips") {
  auto j = to_json(base());
  CHECK(config_from_json(j).rows == 1000);
  j["bogus"] = 1;
  CHECK_THROWS_AS(config_from_json(j), Error);
  nlohmann::json missing = {{"rows", 10}};
  CHECK_THROWS_AS(config_from_json(missing), Error);
}
