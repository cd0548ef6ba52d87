#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace abco {

/// Exit codes: 0 success, 1 sampler failure, 2 bad arguments or I/O.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace abco
