#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace faceattr {

/// Exit status: 0 when every requested output was written (or, with
/// --dry-run, when the inputs validated); 1 on a runtime error; 2 on a usage
/// error. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace faceattr
