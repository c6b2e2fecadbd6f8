#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpca/analog.hpp"
#include "fpca/tensor.hpp"

namespace fpca {

/// Row-major dense tensor as stored on disk: a shape header plus values.
struct DenseTensor {
  std::vector<int> shape;
  std::vector<double> values;

  std::size_t expected_size() const;
};

/// JSON form: {"shape": [...], "values": [...]}.
DenseTensor tensor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DenseTensor& t);

/// CSV form: first line is the comma-separated shape, then values in row-major order,
/// one innermost-dimension row per line.
DenseTensor read_tensor_csv(std::istream& in);
void write_tensor_csv(std::ostream& out, const DenseTensor& t);

/// Picks the format from the extension: .json, otherwise CSV.
DenseTensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& t);

/// 8/16-bit binary or ASCII PGM/PPM, normalized to [0, 1]. Gray maps are replicated to RGB.
Image read_netpbm(std::istream& in);

/// PGM/PPM by extension, otherwise a [rows, cols, 3] tensor file.
Image load_image(const std::string& path);

Image image_from_tensor(const DenseTensor& t);
DenseTensor to_tensor(const Image& image);

/// Accepts [c_o, k, k, 3] or a single [k, k, 3] kernel.
std::vector<Kernel> kernels_from_tensor(const DenseTensor& t);
std::vector<Kernel> load_kernels(const std::string& path);

/// [h_o, w_o, c_o] activation counts.
DenseTensor to_tensor(const FrameOutput& frame);

}  // namespace fpca
