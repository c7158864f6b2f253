#include "lobgeom/config.hpp"

#include <charconv>
#include <sstream>

#include "lobgeom/io_util.hpp"

namespace lobgeom {

const char* to_string(FitTarget t) {
    return t == FitTarget::cumulative ? "cumulative" : "differential";
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

long long parse_ll(const std::string& key, const std::string& v, long long lo,
                   long long hi) {
    long long out = 0;
    const auto* b = v.data();
    auto [p, ec] = std::from_chars(b, b + v.size(), out);
    if (ec != std::errc() || p != b + v.size()) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    if (out < lo || out > hi) {
        throw ConfigError(key, "value " + v + " outside [" + std::to_string(lo) +
                                   ", " + std::to_string(hi) + "]");
    }
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* b = v.data();
    auto [p, ec] = std::from_chars(b, b + v.size(), out);
    if (ec != std::errc() || p != b + v.size()) {
        throw ConfigError(key, "expected an unsigned integer, got '" + v + "'");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
    const std::string v = trim(value);
    if (key == "simulation.n_vertices") {
        cfg.simulation.n_vertices = static_cast<int>(parse_ll(key, v, 3, 1000000));
    } else if (key == "simulation.topology") {
        cfg.simulation.topology = topology_from_string(v);
    } else if (key == "simulation.n_steps") {
        cfg.simulation.n_steps = parse_ll(key, v, 0, 1000000000LL);
    } else if (key == "simulation.snapshot_every") {
        cfg.simulation.snapshot_every =
            static_cast<int>(parse_ll(key, v, 1, 1000000));
    } else if (key == "simulation.tick_size") {
        if (v == "auto") {
            cfg.simulation.tick_size = 0.0;
        } else {
            const double t = parse_real(key, v);
            if (t <= 0.0) throw ConfigError(key, "tick_size must be positive or 'auto'");
            cfg.simulation.tick_size = t;
        }
    } else if (key == "simulation.size_rule") {
        if (v == "unit") {
            cfg.simulation.size_rule = SizeRule::unit;
        } else if (v == "degree") {
            cfg.simulation.size_rule = SizeRule::degree;
        } else {
            throw ConfigError(key, "expected unit or degree, got '" + v + "'");
        }
    } else if (key == "simulation.seed") {
        cfg.simulation.seed = parse_u64(key, v);
    } else if (key == "simulation.export_projections") {
        cfg.simulation.export_projections = parse_bool(key, v);
    } else if (key == "simulation.export_graph") {
        cfg.simulation.export_graph = parse_bool(key, v);
    } else if (key == "geometry.K") {
        cfg.geometry.K = static_cast<int>(parse_ll(key, v, 1, 100000));
    } else if (key == "geometry.T") {
        cfg.geometry.T = static_cast<int>(parse_ll(key, v, 0, 100000000));
    } else if (key == "fit.models") {
        std::vector<ModelKind> models;
        for (const auto& name : split_list(v)) {
            try {
                models.push_back(model_from_string(name));
            } catch (const DomainError&) {
                throw ConfigError(key, "unknown model '" + name + "'");
            }
        }
        if (models.empty()) throw ConfigError(key, "needs at least one model");
        cfg.fit.models = std::move(models);
    } else if (key == "fit.target") {
        if (v == "cumulative") {
            cfg.fit.target = FitTarget::cumulative;
        } else if (v == "differential") {
            cfg.fit.target = FitTarget::differential;
        } else {
            throw ConfigError(key, "expected cumulative or differential");
        }
    } else if (key == "fit.tol") {
        const double t = parse_real(key, v);
        if (!(t > 0.0) || t > 1.0) throw ConfigError(key, "tol must be in (0, 1]");
        cfg.fit.tol = t;
    } else if (key == "fit.multistart_scale") {
        const double s = parse_real(key, v);
        if (!(s > 1.0)) throw ConfigError(key, "multistart_scale must be > 1");
        cfg.fit.multistart_scale = s;
    } else if (key == "io.input") {
        for (auto& p : split_list(v)) cfg.io.inputs.push_back(std::move(p));
    } else if (key == "io.output_dir") {
        if (v.empty()) throw ConfigError(key, "output_dir must be nonempty");
        cfg.io.output_dir = v;
    } else if (key == "io.asset") {
        if (v.empty() || v.find(',') != std::string::npos ||
            v.find('_') != std::string::npos) {
            throw ConfigError(key, "asset must be nonempty without ',' or '_'");
        }
        cfg.io.asset = v;
    } else if (key == "io.tick_size") {
        const double t = parse_real(key, v);
        if (!(t > 0.0)) throw ConfigError(key, "tick_size must be positive");
        cfg.io.tick_size = t;
    } else {
        throw ConfigError(key, "unknown configuration key");
    }
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    long line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no),
                              "expected 'key = value', got '" + line + "'");
        }
        apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    return parse_config_text(read_file(path));
}

void validate(const RunConfig& cfg) {
    if (cfg.simulation.snapshot_every > std::max(cfg.simulation.n_steps, 1LL)) {
        throw ConfigError("simulation.snapshot_every",
                          "exceeds simulation.n_steps; no snapshots would be taken");
    }
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "simulation.n_vertices = " << cfg.simulation.n_vertices << "\n";
    out << "simulation.topology = " << to_string(cfg.simulation.topology) << "\n";
    out << "simulation.n_steps = " << cfg.simulation.n_steps << "\n";
    out << "simulation.snapshot_every = " << cfg.simulation.snapshot_every << "\n";
    out << "simulation.tick_size = "
        << (cfg.simulation.tick_size > 0.0 ? fmt_g17(cfg.simulation.tick_size)
                                           : std::string("auto"))
        << "\n";
    out << "simulation.size_rule = "
        << (cfg.simulation.size_rule == SizeRule::unit ? "unit" : "degree") << "\n";
    out << "simulation.seed = " << cfg.simulation.seed << "\n";
    out << "simulation.export_projections = "
        << (cfg.simulation.export_projections ? "true" : "false") << "\n";
    out << "simulation.export_graph = "
        << (cfg.simulation.export_graph ? "true" : "false") << "\n";
    out << "geometry.K = " << cfg.geometry.K << "\n";
    out << "geometry.T = " << cfg.geometry.T << "\n";
    out << "fit.models = ";
    for (std::size_t i = 0; i < cfg.fit.models.size(); ++i) {
        if (i > 0) out << ",";
        out << to_string(cfg.fit.models[i]);
    }
    out << "\n";
    out << "fit.target = " << to_string(cfg.fit.target) << "\n";
    out << "fit.tol = " << fmt_g17(cfg.fit.tol) << "\n";
    out << "fit.multistart_scale = " << fmt_g17(cfg.fit.multistart_scale) << "\n";
    if (!cfg.io.inputs.empty()) {
        out << "io.input = ";
        for (std::size_t i = 0; i < cfg.io.inputs.size(); ++i) {
            if (i > 0) out << ",";
            out << cfg.io.inputs[i];
        }
        out << "\n";
    }
    out << "io.output_dir = " << cfg.io.output_dir << "\n";
    out << "io.asset = " << cfg.io.asset << "\n";
    out << "io.tick_size = " << fmt_g17(cfg.io.tick_size) << "\n";
    return out.str();
}

}  // namespace lobgeom
