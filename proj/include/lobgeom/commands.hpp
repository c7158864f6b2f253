#pragma once

// Pipeline orchestration behind the CLI subcommands. Commands write their
// outputs (plus the resolved configuration and run metadata) under
// cfg.io.output_dir; reruns with identical configuration and inputs are
// byte-identical.

#include <iosfwd>
#include <string>
#include <vector>

#include "lobgeom/config.hpp"

namespace lobgeom {

// graph-core -> spectral -> bookgeom over n_steps, emitting snapshots.csv.
void cmd_simulate(const RunConfig& cfg);

// Windows, per-side profiles, model fits, comparison, residuals, plot data.
void cmd_fit(const RunConfig& cfg);

// Per (asset, side) medians of R^2 and delta-AIC across windows.
void cmd_compare(const std::vector<std::string>& report_paths,
                 const std::string& output_dir, std::ostream& console);

struct IngestSummary {
    long long records = 0;
    long long snapshots = 0;
    long long venues = 0;
    long long one_sided = 0;
};

// Validates a depth CSV end to end without fitting.
IngestSummary ingest_check(const std::string& path, double tick_size);

}  // namespace lobgeom
