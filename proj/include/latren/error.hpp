#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latren {

enum class Errc {
  InvalidArgument,
  InvalidLaw,
  NoCommonSpan,
  SpanMismatch,
  ZeroAtomPresent,
  ZeroMassTail,
  NoCramerRoot,
  PositiveDrift,
  DivergentTilt,
  MassExceedsOne,
  WrongRegime,
  NonconvergentU,
  WindowTooWide,
  DecayViolation,
  SumDivergence,
  QuadratureDivergence,
  InsufficientTailSamples,
  NonContractive,
  NotAB0Pair,
  SandwichViolated,
  InvalidQ,
  ConfigError,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace latren
