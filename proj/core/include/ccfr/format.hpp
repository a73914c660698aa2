#pragma once

#include <string>

namespace ccfr {

/// Locale-independent "%.12g" rendering used by every CSV writer.
std::string format_number(double v);

/// Lossless rendering (shortest form that round-trips).
std::string format_exact(double v);

}  // namespace ccfr
