#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fpca/config.hpp"
#include "fpca/tensor.hpp"

namespace fpca {

enum class Sign { Pos = 0, Neg = 1 };

inline const char* to_string(Sign s) { return s == Sign::Pos ? "pos" : "neg"; }

/// Nonnegative halves of a signed kernel; pos - neg == kernel, supports disjoint.
struct SignedKernelPair {
  Kernel pos;
  Kernel neg;
};

SignedKernelPair split_signed(const Kernel& kernel);

/// Places a k x k x 3 kernel in the top-left corner of an n x n x 3 zero kernel.
Kernel pad_to_max(const Kernel& kernel, int n);

/// Nearest of `levels` uniform levels on [0, 1]; ties round up.
int quantize(double w, int levels);

inline double level_conductance(int level, int levels) {
  return static_cast<double>(level) / static_cast<double>(levels - 1);
}

/// Quantizes the magnitude of every weight, keeping the sign.
Kernel quantize_kernel(const Kernel& kernel, int levels);

/// The shared multi-channel weight block behind every pixel column.
///
/// Each output channel owns a positive plane (driven by CH_i) and a negative plane
/// (driven by CH_i_bar). Planes hold normalized conductances already snapped to the
/// NVM levels. All pixel columns see identical contents, so one copy is stored and
/// `per_column_count` reports the per-column storage.
class WeightBlock {
 public:
  static WeightBlock program(std::span<const Kernel> kernels, const ValidatedConfig& cfg);

  /// The plane enabled when the channel line for (channel, sign) is pulled high.
  const Kernel& select(int channel, Sign sign) const;

  int level(int channel, Sign sign, int row, int col, int rgb) const;

  int channels() const noexcept { return channels_; }
  int kernel_size() const noexcept { return kernel_size_; }
  int levels() const noexcept { return levels_; }

  std::size_t per_column_count() const noexcept {
    return 2u * static_cast<std::size_t>(kernel_size_) * kernel_size_ * kColorChannels * channels_;
  }

  /// Count of NVM cells actually held, summed over planes.
  std::size_t stored_count() const noexcept;

 private:
  int channels_ = 0;
  int kernel_size_ = 0;
  int levels_ = 0;
  std::vector<Kernel> planes_;  // index 2 * channel + sign
};

}  // namespace fpca
