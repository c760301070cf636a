#pragma once

namespace stochlab::cli {

// Entry point behind the stochlab binary. Exit codes: 0 success, 1 usage
// error, 2 data error, 3 numerical failure.
int run(int argc, const char* const* argv);

} // namespace stochlab::cli
