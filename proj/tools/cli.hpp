#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace convpers::cli {

/// Exit codes: 0 ok, 1 usage, 2 bad input or format, 3 domain error, 4 I/O,
/// 5 internal.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace convpers::cli
