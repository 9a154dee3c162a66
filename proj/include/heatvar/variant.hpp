#pragma once

#include <string>

namespace heatvar {

/// The built-in mean-zero modification families for squared increments.
enum class Variant {
  RademacherSquares,    ///< h_j(x) = xi_j x^2, independent random signs
  SignedSquares,        ///< h(x) = |x|^2 sgn(x)
  CenteredSquares,      ///< h(x) = x^2 - 1
  AlternatingCentered,  ///< h_j(x) = (-1)^j (x^2 - 1)
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

inline constexpr Variant kAllVariants[] = {
    Variant::RademacherSquares,
    Variant::SignedSquares,
    Variant::CenteredSquares,
    Variant::AlternatingCentered,
};

}  // namespace heatvar
