#pragma once

#include <iosfwd>

namespace mec::cli {

/// Entry point of the mec_cli tool. Returns 0 on success, 2 on usage errors, 1 on other failures.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mec::cli
