#pragma once

#include <string>

namespace brw::cli {

/// Shortest round-trip decimal; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double x);

/// Double-quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace brw::cli
