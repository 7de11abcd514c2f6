#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace speclab {

enum class Errc {
  NotHyperbolic,
  EllipticElement,
  EmptyWord,
  InvalidWord,
  DegenerateCoordinates,
  NotInFrickeImage,
  NotNormalizable,
  InvalidRepresentation,
  SamplingFailed,
  EllipticClassFound,
  ClassSetMismatch,
  CoincidentPoints,
  DegenerateConfiguration,
  Parse,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace speclab
