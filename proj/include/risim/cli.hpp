#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace risim {

// Full command-line entry point. Exit code 0 on success, 1 for validation
// problems (bad arguments, malformed scenarios or artifacts), 2 for numerical
// or I/O failures at runtime. Exposed as a library call so tests can drive
// the real command paths in-process.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // without argv[0]

}  // namespace risim
