#include "fpca/tensor_io.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace fpca {

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])) != suffix[i])
      return false;
  return true;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw Error(Errc::ParseError, "bad number '" + token + "'");
  return v;
}

void check_size(const DenseTensor& t) {
  for (int d : t.shape)
    if (d < 1) throw Error(Errc::ParseError, "tensor dimensions must be >= 1");
  if (t.values.size() != t.expected_size()) {
    throw Error(Errc::ShapeMismatch, "tensor has " + std::to_string(t.values.size()) +
                                         " values, shape needs " +
                                         std::to_string(t.expected_size()));
  }
}

// Next whitespace-delimited netpbm header token, skipping comments.
std::string netpbm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw Error(Errc::ParseError, "truncated netpbm header");
  return tok;
}

}  // namespace

std::size_t DenseTensor::expected_size() const {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

DenseTensor tensor_from_json(const nlohmann::json& j) {
  DenseTensor t;
  try {
    t.shape = j.at("shape").get<std::vector<int>>();
    t.values = j.at("values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("tensor: ") + e.what());
  }
  check_size(t);
  return t;
}

nlohmann::json to_json(const DenseTensor& t) { return {{"shape", t.shape}, {"values", t.values}}; }

DenseTensor read_tensor_csv(std::istream& in) {
  DenseTensor t;
  std::string line;
  while (std::getline(in, line)) {
    const auto fields = split_fields(line);
    if (fields.empty() || fields.front().front() == '#') continue;
    if (t.shape.empty()) {
      for (const auto& f : fields) t.shape.push_back(static_cast<int>(parse_double(f)));
      continue;
    }
    for (const auto& f : fields) t.values.push_back(parse_double(f));
  }
  if (t.shape.empty()) throw Error(Errc::ParseError, "tensor CSV has no shape line");
  check_size(t);
  return t;
}

void write_tensor_csv(std::ostream& out, const DenseTensor& t) {
  for (std::size_t d = 0; d < t.shape.size(); ++d) out << (d ? "," : "") << t.shape[d];
  out << '\n';
  const std::size_t inner = t.shape.empty() ? 1 : static_cast<std::size_t>(t.shape.back());
  char buf[32];
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", t.values[i]);
    out << buf << ((i + 1) % inner == 0 ? '\n' : ',');
  }
}

DenseTensor read_tensor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  if (has_suffix(path, ".json")) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::ParseError, path + ": " + e.what());
    }
    return tensor_from_json(j);
  }
  return read_tensor_csv(in);
}

void write_tensor(const std::string& path, const DenseTensor& t) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
  if (has_suffix(path, ".json")) {
    out << to_json(t).dump() << '\n';
  } else {
    write_tensor_csv(out, t);
  }
}

Image read_netpbm(std::istream& in) {
  const std::string magic = netpbm_token(in);
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
    throw Error(Errc::ParseError, "unsupported netpbm magic '" + magic + "'");
  }
  const bool color = magic == "P3" || magic == "P6";
  const bool binary = magic == "P5" || magic == "P6";
  const int width = std::stoi(netpbm_token(in));
  const int height = std::stoi(netpbm_token(in));
  const int maxval = std::stoi(netpbm_token(in));
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    throw Error(Errc::ParseError, "bad netpbm header");
  }
  const int samples = color ? 3 : 1;
  const bool wide = maxval > 255;
  Image img(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      for (int s = 0; s < samples; ++s) {
        int value = 0;
        if (binary) {
          const int hi = in.get();
          const int lo = wide ? in.get() : 0;
          if (hi == EOF || lo == EOF) throw Error(Errc::ParseError, "truncated netpbm data");
          value = wide ? (hi << 8) | lo : hi;
        } else {
          value = std::stoi(netpbm_token(in));
        }
        const double v = static_cast<double>(value) / maxval;
        if (color) {
          img(r, c, s) = v;
        } else {
          for (int ch = 0; ch < kColorChannels; ++ch) img(r, c, ch) = v;
        }
      }
  return img;
}

Image image_from_tensor(const DenseTensor& t) {
  if (t.shape.size() != 3 || t.shape[2] != kColorChannels) {
    throw Error(Errc::ShapeMismatch, "image tensor must have shape [rows, cols, 3]");
  }
  Image img(t.shape[0], t.shape[1]);
  std::size_t k = 0;
  for (int r = 0; r < t.shape[0]; ++r)
    for (int c = 0; c < t.shape[1]; ++c)
      for (int ch = 0; ch < kColorChannels; ++ch) img(r, c, ch) = t.values[k++];
  return img;
}

DenseTensor to_tensor(const Image& image) {
  DenseTensor t;
  t.shape = {static_cast<int>(image.rows()), static_cast<int>(image.cols()), kColorChannels};
  t.values.reserve(static_cast<std::size_t>(image.size()));
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c)
      for (int ch = 0; ch < kColorChannels; ++ch) t.values.push_back(image(r, c, ch));
  return t;
}

Image load_image(const std::string& path) {
  if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm") || has_suffix(path, ".pnm")) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
    return read_netpbm(in);
  }
  Image img = image_from_tensor(read_tensor(path));
  if (img.size() > 0 && (img.minCoeff() < 0.0 || img.maxCoeff() > 1.0)) {
    throw Error(Errc::ParseError, "image currents must be normalized to [0, 1]");
  }
  return img;
}

std::vector<Kernel> kernels_from_tensor(const DenseTensor& t) {
  DenseTensor shaped = t;
  if (shaped.shape.size() == 3) shaped.shape.insert(shaped.shape.begin(), 1);
  if (shaped.shape.size() != 4 || shaped.shape[1] != shaped.shape[2] ||
      shaped.shape[3] != kColorChannels) {
    throw Error(Errc::ShapeMismatch, "kernel tensor must have shape [c_o, k, k, 3]");
  }
  const int c_o = shaped.shape[0];
  const int k = shaped.shape[1];
  std::vector<Kernel> kernels(static_cast<std::size_t>(c_o), Kernel::Zero(k, k));
  std::size_t idx = 0;
  for (int o = 0; o < c_o; ++o)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int ch = 0; ch < kColorChannels; ++ch) kernels[static_cast<std::size_t>(o)](i, j, ch) = shaped.values[idx++];
  return kernels;
}

std::vector<Kernel> load_kernels(const std::string& path) { return kernels_from_tensor(read_tensor(path)); }

DenseTensor to_tensor(const FrameOutput& frame) {
  DenseTensor t;
  const int c_o = static_cast<int>(frame.channels.size());
  const int h = c_o ? static_cast<int>(frame.channels[0].rows()) : 0;
  const int w = c_o ? static_cast<int>(frame.channels[0].cols()) : 0;
  t.shape = {h, w, c_o};
  t.values.reserve(static_cast<std::size_t>(h) * w * c_o);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < c_o; ++ch) t.values.push_back(frame(r, c, ch));
  return t;
}

}  // namespace fpca
