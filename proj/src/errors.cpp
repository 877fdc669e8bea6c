#include "kexlab/errors.hpp"

namespace kexlab {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::BothDeltasNonzero: return "BothDeltasNonzero";
    case Errc::BothDeltasZero: return "BothDeltasZero";
    case Errc::ZeroCurrentDelta: return "ZeroCurrentDelta";
    case Errc::NegativeResistance: return "NegativeResistance";
    case Errc::ValueNotInPalette: return "ValueNotInPalette";
    case Errc::CrossCheckFailed: return "CrossCheckFailed";
    case Errc::IncompleteRound: return "IncompleteRound";
    case Errc::PhaseMismatch: return "PhaseMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::RoundPhaseMismatch: return "RoundPhaseMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::FormatError: return "FormatError";
    case Errc::FrameError: return "FrameError";
    case Errc::TransportError: return "TransportError";
  }
  return "Unknown";
}

}  // namespace kexlab
