#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace anosov {

struct RunConfig {
  std::string command;
  std::string input_path;
  std::string output_path;  // empty: report goes to the output stream
  std::map<std::string, std::string> overrides;  // flag name without dashes -> value
};

const std::vector<std::string>& cli_commands();

/// Runs one command. Returns 0, 2 (input or validation failure) or 3 (numerical failure);
/// failures also write a one-line JSON error record to err.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv with the same exit-status contract and dispatches to run().
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace anosov
