#pragma once

#include "pilotwave/config.hpp"

#include <iosfwd>

namespace pilotwave {

/// Run the experiment described by spec: write its artifacts (CSV dumps and
/// report.json) under spec.resolved_output_dir(), print one PASS/FAIL line
/// per assertion to out, and return the process exit status (0 iff every
/// assertion passed, 1 otherwise). Every asserted number is also stored in
/// report.json, so the verdict can be recomputed from the artifacts alone.
/// Errors (bad config, quadrature failure, excessive node aborts) propagate
/// as exceptions for the caller to map to exit status 2.
int run_experiment(const ExperimentSpec& spec, std::ostream& out, int n_workers = 0);

/// Print the experiment names, what each one checks, and the config keys
/// each accepts.
void print_experiment_list(std::ostream& out);

} // namespace pilotwave
