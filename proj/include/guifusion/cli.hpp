#pragma once

#include <iosfwd>

namespace guifusion {

/// Entry point of the `guifusion` command-line tool. Exit codes: 0 success,
/// 1 usage error, 2 data error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace guifusion
