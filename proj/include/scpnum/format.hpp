#pragma once

#include <string>

namespace scpnum {

/// Round-trip decimal text for a double ("%.17g"); NaN prints as "nan".
std::string format_double(double v);

}  // namespace scpnum
