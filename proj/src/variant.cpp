#include "heatvar/variant.hpp"

#include <stdexcept>

namespace heatvar {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::RademacherSquares: return "rademacher";
    case Variant::SignedSquares: return "signed";
    case Variant::CenteredSquares: return "centered";
    case Variant::AlternatingCentered: return "alternating";
  }
  throw std::logic_error("to_string: unknown variant");
}

Variant variant_from_string(const std::string& name) {
  if (name == "rademacher") return Variant::RademacherSquares;
  if (name == "signed") return Variant::SignedSquares;
  if (name == "centered") return Variant::CenteredSquares;
  if (name == "alternating") return Variant::AlternatingCentered;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected rademacher|signed|centered|alternating)");
}

}  // namespace heatvar
