#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aic {

/// Command-line entry point. Returns 0 on success, 2 on usage errors and 1
/// on data or computation errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aic
