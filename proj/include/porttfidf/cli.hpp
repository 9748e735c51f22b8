#pragma once

#include <string>
#include <vector>

namespace porttfidf::cli {

/// Exit codes of the port-tfidf command.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInputError = 2,
  kDomainError = 3,
};

/// Run `port-tfidf` with the given arguments (argv[0] included).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace porttfidf::cli
