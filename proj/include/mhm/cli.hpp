#pragma once

#include <string>
#include <vector>

namespace mhm::cli {

// Stamped into every manifest so result files can be traced to the code
// revision that produced them.
inline constexpr const char* kArtifactVersion = "1.0.0";

// Exit codes: 0 success, 2 input or usage error, 3 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

// Runs one invocation in-process. args is argv without the program name,
// e.g. {"solve", "--delta", "0.9", "--out", "runs/a"}. Every subcommand
// writes its files plus a manifest.json into the --out directory and prints
// its main result as JSON on stdout.
int run(const std::vector<std::string>& args);

} // namespace mhm::cli
