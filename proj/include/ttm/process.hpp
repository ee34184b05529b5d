#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ttm {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

struct ProcessOptions {
  std::string stdin_data;
  /// Extra NAME=VALUE pairs appended to the inherited environment.
  std::vector<std::pair<std::string, std::string>> env;
};

// Runs argv[0] (looked up in PATH) and collects both output streams.
// Throws std::system_error if the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& opts = {});

}  // namespace ttm
