#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fpca/analog.hpp"
#include "fpca/tensor_io.hpp"

using namespace fpca;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fpca_test_" + name);
}

}  // namespace

TEST_CASE("tensor CSV round trip") {
  DenseTensor t{{2, 3}, {0.1, -2.5, 3, 1e-17, 0, 1.0 / 3}};
  std::stringstream ss;
  write_tensor_csv(ss, t);
  CHECK(ss.str().rfind("2,3\n", 0) == 0);
  const auto back = read_tensor_csv(ss);
  CHECK(back.shape == t.shape);
  CHECK(back.values == t.values);

  std::istringstream bad("2,2\n1,2\n3\n");
  CHECK_THROWS_AS(read_tensor_csv(bad), Error);
}

TEST_CASE("tensor JSON round trip and validation") {
  DenseTensor t{{1, 2, 2}, {1, 2, 3, 4}};
  CHECK(tensor_from_json(to_json(t)).values == t.values);
  CHECK_THROWS_AS(tensor_from_json(nlohmann::json{{"shape", {3}}, {"values", {1, 2}}}), Error);
  const auto path = temp_file("t.json");
  write_tensor(path.string(), t);
  CHECK(read_tensor(path.string()).shape == t.shape);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_tensor("/nonexistent/x.csv"), Error);
}

TEST_CASE("netpbm parsing") {
  std::istringstream p2("P2\n# comment\n2 1\n255\n0 255\n");
  const Image g = read_netpbm(p2);
  CHECK(g.rows() == 1);
  CHECK(g.cols() == 2);
  CHECK(g(0, 1, 0) == 1.0);
  CHECK(g(0, 1, 2) == 1.0);
  CHECK(g(0, 0, 1) == 0.0);

  std::string p6 = "P6\n1 1\n255\n";
  p6 += std::string{'\xff', '\x00', '\x33'};
  std::istringstream in6(p6);
  const Image c = read_netpbm(in6);
  CHECK(c(0, 0, 0) == 1.0);
  CHECK(c(0, 0, 1) == 0.0);
  CHECK(c(0, 0, 2) == doctest::Approx(0x33 / 255.0));

  std::string p5 = "P5 1 1 65535\n";
  p5 += std::string{'\x80', '\x00'};
  std::istringstream in5(p5);
  CHECK(read_netpbm(in5)(0, 0, 0) == doctest::Approx(32768.0 / 65535));

  std::istringstream p3("P3 1 1 15 15 0 5");
  const Image a = read_netpbm(p3);
  CHECK(a(0, 0, 2) == doctest::Approx(1.0 / 3));

  std::istringstream junk("P9 1 1 255 0");
  CHECK_THROWS_AS(read_netpbm(junk), Error);
}

TEST_CASE("image and kernel tensors") {
  DenseTensor t{{1, 2, 3}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
  const Image img = image_from_tensor(t);
  CHECK(img(0, 1, 2) == 0.6);
  CHECK(to_tensor(img).values == t.values);
  CHECK_THROWS_AS(image_from_tensor(DenseTensor{{2, 2}, {1, 2, 3, 4}}), Error);

  DenseTensor k{{2, 1, 1, 3}, {1, 0, 0, 0, 0, -1}};
  const auto ks = kernels_from_tensor(k);
  REQUIRE(ks.size() == 2);
  CHECK(ks[1](0, 0, 2) == -1.0);
  CHECK(kernels_from_tensor(DenseTensor{{1, 1, 3}, {1, 2, 3}}).size() == 1);
  CHECK_THROWS_AS(kernels_from_tensor(DenseTensor{{1, 2, 1, 3}, {1, 2, 3, 4, 5, 6}}), Error);
}

TEST_CASE("frame output tensor layout") {
  FrameOutput f;
  f.channels = {Eigen::MatrixXi::Constant(2, 3, 1), Eigen::MatrixXi::Constant(2, 3, 7)};
  f.channels[1](1, 2) = 9;
  const auto t = to_tensor(f);
  CHECK(t.shape == std::vector<int>{2, 3, 2});
  CHECK(t.values.back() == 9);
  CHECK(t.values[1] == 7);
}
