#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsekit {

/// Entry point of the `sparsekit` executable. Data goes to `out` (or files),
/// logs and the effective-config echo go to `err`. Exit codes: 0 success,
/// 1 runtime/data error, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sparsekit
