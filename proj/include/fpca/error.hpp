#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpca {

enum class Errc {
  ZeroDim,
  NonIntegralOutputDim,
  StrideExceedsKernel,
  InputTooSmall,
  IndivisibleBinning,
  InvalidParameter,
  OutOfRangeWeight,
  KernelTooLarge,
  ChannelCountMismatch,
  ChannelOutOfRange,
  InconsistentPhase,
  ShapeMismatch,
  EmptyContributionSet,
  VoltageOutOfRange,
  SingularFit,
  UnreachableBucket,
  EstimateOutOfRange,
  ParseError,
  IoError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fpca
