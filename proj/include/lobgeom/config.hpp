#pragma once

// Declarative run configuration: flat key-value text with section prefixes,
// overridable key by key from the command line. Every run emits its resolved
// configuration next to the outputs.

#include <cstdint>
#include <string>
#include <vector>

#include "lobgeom/bookgeom.hpp"
#include "lobgeom/fitkit.hpp"
#include "lobgeom/graph.hpp"

namespace lobgeom {

enum class FitTarget { cumulative, differential };

const char* to_string(FitTarget t);

struct RunConfig {
    struct Simulation {
        int n_vertices = 200;
        Topology topology = Topology::ring;
        long long n_steps = 2000;
        int snapshot_every = 10;
        double tick_size = 0.0;  // <= 0 selects the per-snapshot auto rule
        SizeRule size_rule = SizeRule::unit;
        std::uint64_t seed = 1;
        bool export_projections = false;
        bool export_graph = false;
    } simulation;

    struct Geometry {
        int K = 50;
        int T = 10;  // snapshots per window; 0 = one window over everything
    } geometry;

    struct Fit {
        std::vector<ModelKind> models = {ModelKind::integrated_gamma,
                                         ModelKind::cumulative_lognormal,
                                         ModelKind::truncated_powerlaw};
        FitTarget target = FitTarget::cumulative;
        double tol = 1e-10;
        double multistart_scale = 4.0;
    } fit;

    struct Io {
        std::vector<std::string> inputs;
        std::string output_dir = "out";
        std::string asset = "SIM";
        double tick_size = 0.01;  // instrument tick for ingested depth data
    } io;
};

// `key = value` per line, '#' comments. Unknown keys are ConfigErrors.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Applies one `section.key=value` override.
void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value);

// Validates cross-field constraints; throws ConfigError naming the field.
void validate(const RunConfig& cfg);

// Canonical resolved form; parsing it back yields the same configuration.
std::string render_config(const RunConfig& cfg);

}  // namespace lobgeom
