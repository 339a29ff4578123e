#pragma once

#include "rbmscale/config.hpp"

#include <filesystem>
#include <string>

namespace rbmscale::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidConfig = 2,
  kCriterionNotMet = 3,
  kIoFailure = 4,
};

struct Invocation {
  std::string command;
  RunSettings settings;
  std::filesystem::path out_dir;
};

int run_command(const Invocation& inv);

}  // namespace rbmscale::cli
