#pragma once
// Minimal subprocess runner for exercising the command-line binary. The
// binary path comes from the SPDPOOL_CLI_PATH environment variable, which
// the build system points at the freshly built executable.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace testsupport {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

inline std::string cli_path() {
  const char* p = std::getenv("SPDPOOL_CLI_PATH");
  if (p == nullptr || *p == '\0') {
    throw std::runtime_error("SPDPOOL_CLI_PATH is not set");
  }
  return p;
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

/// Runs the binary with the given arguments, capturing combined output.
/// `env_prefix` may add variable assignments (e.g. "SPDPOOL_THREADS=1").
inline RunResult run_cli(const std::vector<std::string>& args,
                         const std::string& env_prefix = "") {
  std::ostringstream cmd;
  if (!env_prefix.empty()) cmd << env_prefix << " ";
  cmd << shell_quote(cli_path());
  for (const std::string& a : args) cmd << " " << shell_quote(a);
  cmd << " 2>&1";

  FILE* pipe = ::popen(cmd.str().c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  RunResult result;
  std::array<char, 4096> buffer;
  std::size_t got = 0;
  while ((got = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testsupport
