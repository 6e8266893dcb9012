#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qasched {

/// Exit codes: 0 success, 1 usage error, 2 runtime failure.
int cli_main(int argc, char** argv);
/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "2..10", "3,5,7" or "4".
std::vector<int> parse_int_range(const std::string& text);

}  // namespace qasched
