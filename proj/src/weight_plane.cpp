#include "fpca/weight_plane.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fpca {

SignedKernelPair split_signed(const Kernel& kernel) {
  if (kernel.minCoeff() < -1.0 || kernel.maxCoeff() > 1.0) {
    throw Error(Errc::OutOfRangeWeight, "kernel weights must lie in [-1, 1]");
  }
  SignedKernelPair pair;
  for (int ch = 0; ch < kColorChannels; ++ch) {
    pair.pos.planes[ch] = kernel.planes[ch].cwiseMax(0.0);
    pair.neg.planes[ch] = (-kernel.planes[ch]).cwiseMax(0.0);
  }
  return pair;
}

Kernel pad_to_max(const Kernel& kernel, int n) {
  if (kernel.rows() != kernel.cols()) {
    throw Error(Errc::ShapeMismatch, "kernel must be square");
  }
  if (kernel.rows() > n) {
    throw Error(Errc::KernelTooLarge, std::to_string(kernel.rows()) + "x" +
                                          std::to_string(kernel.cols()) +
                                          " kernel exceeds max " + std::to_string(n));
  }
  Kernel out = Kernel::Zero(n, n);
  for (int ch = 0; ch < kColorChannels; ++ch)
    out.planes[ch].topLeftCorner(kernel.rows(), kernel.cols()) = kernel.planes[ch];
  return out;
}

int quantize(double w, int levels) {
  const int top = levels - 1;
  const int level = static_cast<int>(std::floor(w * top + 0.5));
  return std::clamp(level, 0, top);
}

Kernel quantize_kernel(const Kernel& kernel, int levels) {
  Kernel out = kernel;
  for (auto& plane : out.planes) {
    plane = plane.unaryExpr([levels](double w) {
      const double g = level_conductance(quantize(std::abs(w), levels), levels);
      return w < 0.0 ? -g : g;
    });
  }
  return out;
}

WeightBlock WeightBlock::program(std::span<const Kernel> kernels, const ValidatedConfig& cfg) {
  const int c_o = cfg->out_channels;
  const int n = cfg->max_kernel;
  if (static_cast<int>(kernels.size()) != c_o) {
    throw Error(Errc::ChannelCountMismatch, "got " + std::to_string(kernels.size()) +
                                                " kernels for " + std::to_string(c_o) +
                                                " output channels");
  }
  WeightBlock block;
  block.channels_ = c_o;
  block.kernel_size_ = n;
  block.levels_ = cfg->nvm_levels;
  block.planes_.reserve(2 * static_cast<std::size_t>(c_o));
  auto to_levels = [levels = block.levels_](double w) {
    return level_conductance(quantize(w, levels), levels);
  };
  for (const Kernel& k : kernels) {
    auto pair = split_signed(pad_to_max(k, n));
    for (Kernel* half : {&pair.pos, &pair.neg}) {
      for (auto& plane : half->planes) plane = plane.unaryExpr(to_levels);
      block.planes_.push_back(std::move(*half));
    }
  }
  return block;
}

const Kernel& WeightBlock::select(int channel, Sign sign) const {
  if (channel < 0 || channel >= channels_) {
    throw Error(Errc::ChannelOutOfRange, "channel " + std::to_string(channel) + " not in [0, " +
                                             std::to_string(channels_) + ")");
  }
  return planes_[2 * static_cast<std::size_t>(channel) + static_cast<std::size_t>(sign)];
}

int WeightBlock::level(int channel, Sign sign, int row, int col, int rgb) const {
  return quantize(select(channel, sign)(row, col, rgb), levels_);
}

std::size_t WeightBlock::stored_count() const noexcept {
  std::size_t total = 0;
  for (const auto& p : planes_) total += static_cast<std::size_t>(p.size());
  return total;
}

}  // namespace fpca
