#pragma once

#include "metafas/cli/config.hpp"

namespace metafas::cli {

// Subcommand bodies; errors surface as the exception types in common.hpp
// and are mapped to exit codes by the entry point.
void cmd_synth(const RunConfig& cfg, bool force);
void cmd_train(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_export(const RunConfig& cfg);

}  // namespace metafas::cli
