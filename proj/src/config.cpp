#include "fpca/config.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace fpca {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::ZeroDim: return "ZeroDim";
    case Errc::NonIntegralOutputDim: return "NonIntegralOutputDim";
    case Errc::StrideExceedsKernel: return "StrideExceedsKernel";
    case Errc::InputTooSmall: return "InputTooSmall";
    case Errc::IndivisibleBinning: return "IndivisibleBinning";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::OutOfRangeWeight: return "OutOfRangeWeight";
    case Errc::KernelTooLarge: return "KernelTooLarge";
    case Errc::ChannelCountMismatch: return "ChannelCountMismatch";
    case Errc::ChannelOutOfRange: return "ChannelOutOfRange";
    case Errc::InconsistentPhase: return "InconsistentPhase";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyContributionSet: return "EmptyContributionSet";
    case Errc::VoltageOutOfRange: return "VoltageOutOfRange";
    case Errc::SingularFit: return "SingularFit";
    case Errc::UnreachableBucket: return "UnreachableBucket";
    case Errc::EstimateOutOfRange: return "EstimateOutOfRange";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << to_string(violations[i].code) << ": " << violations[i].message;
  }
  return os.str();
}

void check_output_dim(std::vector<Violation>& out, const char* axis, int input, int n, int p,
                      int stride) {
  const int span = input - n + 2 * p;
  if (span < 0) {
    out.push_back({Errc::InputTooSmall, std::string(axis) + " input " + std::to_string(input) +
                                            " is smaller than kernel " + std::to_string(n) +
                                            " minus padding"});
    return;
  }
  if (span % stride != 0) {
    out.push_back({Errc::NonIntegralOutputDim,
                   std::string(axis) + ": (" + std::to_string(input) + " - " + std::to_string(n) +
                       " + 2*" + std::to_string(p) + ") is not divisible by stride " +
                       std::to_string(stride)});
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(violations.empty() ? Errc::InvalidParameter : violations.front().code,
            join_messages(violations)),
      violations_(std::move(violations)) {}

std::vector<Violation> check(const FpcaConfig& c) {
  std::vector<Violation> out;
  auto positive = [&](int v, const char* name) {
    if (v < 1) out.push_back({Errc::ZeroDim, std::string(name) + " must be >= 1"});
    return v >= 1;
  };
  bool dims_ok = positive(c.rows, "rows");
  dims_ok &= positive(c.cols, "cols");
  dims_ok &= positive(c.max_kernel, "max_kernel");
  positive(c.out_channels, "out_channels");
  dims_ok &= positive(c.stride, "stride");
  dims_ok &= positive(c.binning, "binning");
  positive(c.adc_bits, "adc_bits");
  positive(c.skip_block, "skip_block");

  if (c.stride >= 1 && c.max_kernel >= 1 && c.stride > c.max_kernel) {
    out.push_back({Errc::StrideExceedsKernel, "stride " + std::to_string(c.stride) +
                                                  " exceeds max_kernel " +
                                                  std::to_string(c.max_kernel)});
    dims_ok = false;
  }
  if (c.padding < 0) {
    out.push_back({Errc::InvalidParameter, "padding must be >= 0"});
    dims_ok = false;
  }
  if (c.adc_bits > 30) out.push_back({Errc::InvalidParameter, "adc_bits must be <= 30"});
  if (!(c.v_max > 0.0)) out.push_back({Errc::InvalidParameter, "v_max must be > 0"});
  if (c.nvm_levels < 2) out.push_back({Errc::InvalidParameter, "nvm_levels must be >= 2"});

  if (c.binning >= 1 && c.rows >= 1 && c.cols >= 1 &&
      (c.rows % c.binning != 0 || c.cols % c.binning != 0)) {
    out.push_back({Errc::IndivisibleBinning, "array " + std::to_string(c.rows) + "x" +
                                                 std::to_string(c.cols) +
                                                 " not divisible by binning " +
                                                 std::to_string(c.binning)});
    dims_ok = false;
  }
  if (dims_ok) {
    check_output_dim(out, "height", c.rows / c.binning, c.max_kernel, c.padding, c.stride);
    check_output_dim(out, "width", c.cols / c.binning, c.max_kernel, c.padding, c.stride);
  }
  return out;
}

ValidatedConfig validate(const FpcaConfig& raw) {
  auto violations = check(raw);
  if (!violations.empty()) throw ConfigError(std::move(violations));
  return ValidatedConfig(raw);
}

DerivedGeometry derive_geometry(const ValidatedConfig& cfg) {
  const FpcaConfig& c = cfg.raw();
  DerivedGeometry g;
  g.h_i = c.rows / c.binning;
  g.w_i = c.cols / c.binning;
  g.h_o = (g.h_i - c.max_kernel + 2 * c.padding) / c.stride + 1;
  g.w_o = (g.w_i - c.max_kernel + 2 * c.padding) / c.stride + 1;
  g.colp_period = std::lcm(c.stride, c.max_kernel) / c.stride;
  g.pixels_per_conv = c.max_kernel * c.max_kernel * kColorChannels;
  g.partial_skip_blocks = (g.h_i % c.skip_block != 0) || (g.w_i % c.skip_block != 0);
  return g;
}

Image apply_binning(const Image& image, int binning) {
  if (binning < 1) throw Error(Errc::InvalidParameter, "binning must be >= 1");
  if (image.rows() % binning != 0 || image.cols() % binning != 0) {
    throw Error(Errc::IndivisibleBinning,
                std::to_string(image.rows()) + "x" + std::to_string(image.cols()) +
                    " image not divisible by " + std::to_string(binning));
  }
  if (binning == 1) return image;
  const Eigen::Index h = image.rows() / binning;
  const Eigen::Index w = image.cols() / binning;
  const double area = static_cast<double>(binning) * binning;
  Image out(h, w);
  for (int ch = 0; ch < kColorChannels; ++ch) {
    for (Eigen::Index r = 0; r < h; ++r)
      for (Eigen::Index c = 0; c < w; ++c)
        out.planes[ch](r, c) =
            image.planes[ch].block(r * binning, c * binning, binning, binning).sum() / area;
  }
  return out;
}

FpcaConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::ParseError, "config must be a JSON object");
  static const std::set<std::string> known = {
      "rows",     "cols",     "max_kernel", "out_channels", "stride",     "padding",
      "binning",  "adc_bits", "skip_block", "v_max",        "nvm_levels"};
  static const std::set<std::string> required = {"rows", "cols", "max_kernel", "out_channels",
                                                 "stride"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw Error(Errc::ParseError, "unknown config key '" + key + "'");
  }
  for (const auto& key : required) {
    if (!j.contains(key)) throw Error(Errc::ParseError, "missing config key '" + key + "'");
  }
  auto get_int = [&](const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw Error(Errc::ParseError, std::string(key) + " must be an integer");
    return v.get<int>();
  };
  FpcaConfig c;
  c.rows = get_int("rows", c.rows);
  c.cols = get_int("cols", c.cols);
  c.max_kernel = get_int("max_kernel", c.max_kernel);
  c.out_channels = get_int("out_channels", c.out_channels);
  c.stride = get_int("stride", c.stride);
  c.padding = get_int("padding", c.padding);
  c.binning = get_int("binning", c.binning);
  c.adc_bits = get_int("adc_bits", c.adc_bits);
  c.skip_block = get_int("skip_block", c.skip_block);
  c.nvm_levels = get_int("nvm_levels", c.nvm_levels);
  if (j.contains("v_max")) {
    if (!j["v_max"].is_number()) throw Error(Errc::ParseError, "v_max must be a number");
    c.v_max = j["v_max"].get<double>();
  }
  return c;
}

nlohmann::json to_json(const FpcaConfig& c) {
  return {{"rows", c.rows},         {"cols", c.cols},         {"max_kernel", c.max_kernel},
          {"out_channels", c.out_channels}, {"stride", c.stride}, {"padding", c.padding},
          {"binning", c.binning},   {"adc_bits", c.adc_bits}, {"skip_block", c.skip_block},
          {"v_max", c.v_max},       {"nvm_levels", c.nvm_levels}};
}

nlohmann::json to_json(const DerivedGeometry& g) {
  return {{"h_i", g.h_i}, {"w_i", g.w_i}, {"h_o", g.h_o}, {"w_o", g.w_o},
          {"colp_period", g.colp_period}, {"pixels_per_conv", g.pixels_per_conv},
          {"partial_skip_blocks", g.partial_skip_blocks}};
}

FpcaConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace fpca
