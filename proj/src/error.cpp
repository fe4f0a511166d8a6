#include "latren/error.hpp"

namespace latren {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidLaw: return "InvalidLaw";
    case Errc::NoCommonSpan: return "NoCommonSpan";
    case Errc::SpanMismatch: return "SpanMismatch";
    case Errc::ZeroAtomPresent: return "ZeroAtomPresent";
    case Errc::ZeroMassTail: return "ZeroMassTail";
    case Errc::NoCramerRoot: return "NoCramerRoot";
    case Errc::PositiveDrift: return "PositiveDrift";
    case Errc::DivergentTilt: return "DivergentTilt";
    case Errc::MassExceedsOne: return "MassExceedsOne";
    case Errc::WrongRegime: return "WrongRegime";
    case Errc::NonconvergentU: return "NonconvergentU";
    case Errc::WindowTooWide: return "WindowTooWide";
    case Errc::DecayViolation: return "DecayViolation";
    case Errc::SumDivergence: return "SumDivergence";
    case Errc::QuadratureDivergence: return "QuadratureDivergence";
    case Errc::InsufficientTailSamples: return "InsufficientTailSamples";
    case Errc::NonContractive: return "NonContractive";
    case Errc::NotAB0Pair: return "NotAB0Pair";
    case Errc::SandwichViolated: return "SandwichViolated";
    case Errc::InvalidQ: return "InvalidQ";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace latren
