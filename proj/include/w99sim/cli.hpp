#pragma once

#include <string>
#include <vector>

namespace w99sim::cli
{

enum ExitStatus : int {
  kSuccess = 0,
  kUsage = 1,
  kValidation = 2,
  kRuntime = 3,
};

/// Entry point behind the `w99sim` executable. `args` excludes the program name.
int run(const std::vector<std::string> & args);

int main(int argc, char ** argv);

}  // namespace w99sim::cli
