#pragma once

#include <ostream>

namespace radpair::io {

// Entry point behind the radpair executable. Returns 0 on success, 2 for
// invalid input, 3 for numerical failures and 1 for anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace radpair::io
