#pragma once

#include <string>
#include <vector>

namespace sparsear {

// Runs one CLI invocation; args excludes the program name.  Returns 0 on
// success, 2 on input validation failure, 1 on runtime failure.
int dispatch(const std::vector<std::string>& args);

}  // namespace sparsear
