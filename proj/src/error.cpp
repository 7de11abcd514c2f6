#include "speclab/error.hpp"

namespace speclab {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NotHyperbolic: return "NotHyperbolic";
    case Errc::EllipticElement: return "EllipticElement";
    case Errc::EmptyWord: return "EmptyWord";
    case Errc::InvalidWord: return "InvalidWord";
    case Errc::DegenerateCoordinates: return "DegenerateCoordinates";
    case Errc::NotInFrickeImage: return "NotInFrickeImage";
    case Errc::NotNormalizable: return "NotNormalizable";
    case Errc::InvalidRepresentation: return "InvalidRepresentation";
    case Errc::SamplingFailed: return "SamplingFailed";
    case Errc::EllipticClassFound: return "EllipticClassFound";
    case Errc::ClassSetMismatch: return "ClassSetMismatch";
    case Errc::CoincidentPoints: return "CoincidentPoints";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace speclab
