#pragma once

#include "run_config.hpp"

namespace mtool {

// Runs the configured experiment, writing artifacts under cfg.out.
// Returns 0 when every check passed (or was skipped), 1 otherwise.
// Validation problems throw std::invalid_argument, compute problems
// propagate whatever the core modules raise.
int run_experiment(const RunConfig& cfg);

}  // namespace mtool
