#pragma once

#include <string>
#include <vector>

#include "qholo/config.hpp"

namespace qholo {

inline constexpr const char* kToolName = "qholo";
inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by the library runner and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitTolerance = 3;

struct RunOutcome {
    int exit_code = kExitOk;
    std::vector<std::string> artifacts; // file names relative to out_dir
    std::string message;
};

bool is_known_subcommand(const std::string& name);

// Executes one subcommand, writing artifacts plus manifest.json into out_dir
// (created if missing). Validation problems yield exit code 2, tolerance
// failures in oracle-check yield 3; both still write a manifest carrying a
// machine-readable error code.
RunOutcome run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                          const std::string& out_dir);

} // namespace qholo
