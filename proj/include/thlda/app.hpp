#pragma once

#include "thlda/config.hpp"

namespace thlda {

// Runs the command and writes its artifacts under config.output. Throws on
// failure.
void run_command(const RunConfig& config);

// run_command with diagnostics: 0 on success, 1 on a runtime failure.
int execute(const RunConfig& config);

}  // namespace thlda
