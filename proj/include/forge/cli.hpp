#pragma once
// The `forge` command line. Lives in the library so tests can drive every
// subcommand in-process with string streams.

#include <iostream>
#include <string>
#include <vector>

namespace forge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitEmergency = 3;

struct Io {
  std::istream& in;
  std::ostream& out;  // records / reports
  std::ostream& err;  // diagnostics
};

// `args` excludes the program name: {"clean", "--in", "x.jsonl"}.
int run_subcommand(const std::vector<std::string>& args, Io io);

int run_subcommand(int argc, char** argv);

}  // namespace forge::cli
