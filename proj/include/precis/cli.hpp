#pragma once

#include <string>
#include <vector>

namespace precis {

struct CliResult {
  int exit_code = 0;
  std::string out;  // stdout payload (empty when --out redirects to a file)
  std::string err;  // stderr payload: a one-line json error record on failure
};

// Front end shared by the precis binary and the tests. args are the tokens
// after the program name. Never throws; exit codes: 0 success, 2 usage,
// 3 rule-spec or parameter error, 4 numeric failure, 5 i/o failure.
CliResult run_command(const std::vector<std::string>& args);

}  // namespace precis
