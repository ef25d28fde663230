#pragma once

#include "config.hpp"
#include "output.hpp"

namespace rangewalk::cli {

// Runs one subcommand and writes its records. Library exceptions propagate.
void run_command(const Config& cfg, RunContext& ctx);

}  // namespace rangewalk::cli
