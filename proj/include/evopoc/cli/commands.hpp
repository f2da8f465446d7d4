#pragma once

#include <ostream>

namespace evopoc::cli {

namespace exit_code {
constexpr int ok = 0;
constexpr int store_or_oracle = 1;
constexpr int input = 2;
constexpr int not_profitable = 3;
constexpr int path_infeasible = 4;
constexpr int budget_exhausted = 5;
}  // namespace exit_code

/// Entry point of the `evopoc` tool. Reports go to `out`, errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace evopoc::cli
