#pragma once

#include <string>

namespace sigcmp {

/// Shortest decimal text that parses back to exactly `x`; "nan"/"inf"/"-inf"
/// for non-finite values. Used for every CSV cell the library writes.
std::string format_double(double x);

}  // namespace sigcmp
