#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace brw::cli {

/// Exit statuses.
enum Exit : int {
  kOk = 0,
  kValidation = 1,
  kResource = 2,
  kIdentityFailure = 3,
};

/// Runs the command line `args` (args[0] is the program name). Results go to
/// --out when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "0.5,1,2" or "lin:START:STOP:COUNT". Throws Error(parse).
std::vector<double> parse_alpha_list(const std::string& text);
/// "20,50,100". Throws Error(parse).
std::vector<int> parse_int_list(const std::string& text);

}  // namespace brw::cli
