#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsl::cli {

/// Exit codes: 0 success, 2 configuration / I/O / dimension errors, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qsl::cli
