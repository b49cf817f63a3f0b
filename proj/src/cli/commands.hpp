#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Command-line front end. run() parses `args` (subcommand first, no program
// name) and executes it, writing results to `out` and diagnostics to `err`.
// Exit codes: 0 success, 1 runtime/numerical/IO failure, 2 usage/validation
// failure. Result lines on stdout are CSV with documented schemas (see the
// README or --help of each subcommand).

namespace lcm::cli {

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

// Memory accounting for the structured model vs a dense symmetric matrix:
// per dimension D the structured model stores vectors_per_dim binary64
// vectors (8 * vectors_per_dim * D bytes), the dense matrix its upper
// triangle (8 * D * (D+1) / 2 bytes).
struct MemoryReport {
  struct Row {
    std::uint64_t dim = 0;
    std::uint64_t lcm_bytes = 0;
    std::uint64_t dense_bytes = 0;
    std::uint64_t ratio = 0;  // dense/lcm, rounded to nearest
  };
  std::vector<Row> rows;
  Row total;
};

MemoryReport build_memory_report(const std::vector<std::uint64_t>& dims,
                                 std::uint64_t vectors_per_dim = 2);

}  // namespace lcm::cli
