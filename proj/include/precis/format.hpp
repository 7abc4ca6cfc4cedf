#pragma once

#include <string>

namespace precis {

// Shortest decimal form that parses back to the same double.
std::string fmt_compact(double v);

// Fixed 17-significant-digit form: round-trips and is byte-stable for
// machine-readable output.
std::string fmt_full(double v);

}  // namespace precis
