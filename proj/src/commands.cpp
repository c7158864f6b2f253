#include "lobgeom/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "lobgeom/bookgeom.hpp"
#include "lobgeom/fitkit.hpp"
#include "lobgeom/graph.hpp"
#include "lobgeom/ingest.hpp"
#include "lobgeom/io_util.hpp"
#include "lobgeom/spectral.hpp"
#include "lobgeom/version.hpp"

namespace lobgeom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_path(const std::string& dir, const std::string& name) {
    return dir + "/" + name;
}

std::string snapshot_csv_rows(const BookSnapshot& snap, std::int64_t id) {
    std::string out;
    auto row = [&](const char* side, const Level& l) {
        out += std::to_string(id);
        out += ',';
        out += fmt_g17(snap.tick_size);
        out += ',';
        out += side;
        out += ',';
        out += fmt_g17(l.price);
        out += ',';
        out += fmt_g17(l.size);
        out += '\n';
    };
    for (const auto& l : snap.bids) row("bid", l);
    for (const auto& l : snap.asks) row("ask", l);
    return out;
}

}  // namespace

// ===========================================================================
// simulate
// ===========================================================================

void cmd_simulate(const RunConfig& cfg) {
    validate(cfg);
    const auto& sim = cfg.simulation;
    const std::string& dir = cfg.io.output_dir;

    auto g = init_graph(sim.n_vertices, sim.topology,
                        derive_seed(RngSeed{sim.seed}, 1));
    Xoshiro256 rng(derive_seed(RngSeed{sim.seed}, 2));

    FiedlerTracker tracker;
    Projection prev;
    bool have_prev = false;

    AtomicFileWriter snapshots(join_path(dir, "snapshots.csv"));
    snapshots.stream() << "snapshot,tick_size,side,price,size\n";
    long long n_snapshots = 0;
    std::string solver_kind = "dense";

    for (long long step = 1; step <= sim.n_steps; ++step) {
        inflation_step(g, rng);
        if (step % sim.snapshot_every != 0) continue;

        Projection p = tracker.solve(g);
        solver_kind = p.solver;
        if (have_prev) align_to(prev, p);

        auto snap = projection_to_snapshot(
            p, sim.tick_size > 0.0 ? sim.tick_size : 1.0, sim.size_rule,
            g.degrees(), step);
        if (sim.tick_size <= 0.0) {
            snap.tick_size = auto_tick_size(snap, cfg.geometry.K);
        }
        snapshots.stream() << snapshot_csv_rows(snap, step);
        ++n_snapshots;

        if (sim.export_projections) {
            char name[64];
            std::snprintf(name, sizeof name, "proj_%09lld.csv", step);
            std::ostringstream csv;
            write_projection_csv(p, csv);
            write_file_atomic(join_path(dir, join_path("projections", name)),
                              csv.str());
            std::snprintf(name, sizeof name, "proj_%09lld.meta", step);
            std::ostringstream meta;
            write_projection_meta(p, meta);
            write_file_atomic(join_path(dir, join_path("projections", name)),
                              meta.str());
        }

        prev = std::move(p);
        have_prev = true;
    }

    snapshots.commit();
    write_file_atomic(join_path(dir, "config.resolved"), render_config(cfg));

    if (sim.export_graph) {
        std::ostringstream edges;
        write_edge_list(g, edges);
        write_file_atomic(join_path(dir, "graph_final.txt"), edges.str());
    }

    std::ostringstream meta;
    meta << "tool = " << kVersion << "\n";
    meta << "command = simulate\n";
    meta << "rng = " << kRngKind << "\n";
    meta << "solver = " << solver_kind << "\n";
    meta << "snapshots = " << n_snapshots << "\n";
    meta << "edges_final = " << g.edge_count() << "\n";
    write_file_atomic(join_path(dir, "meta.txt"), meta.str());
}

// ===========================================================================
// fit
// ===========================================================================

namespace {

// Reads a snapshots.csv produced by cmd_simulate.
std::vector<BookSnapshot> read_snapshot_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        (line != "snapshot,tick_size,side,price,size" &&
         line != "snapshot,tick_size,side,price,size\r")) {
        throw BadHeader("expected snapshot CSV header in " + path);
    }
    std::vector<BookSnapshot> snaps;
    std::int64_t cur_id = 0;
    double cur_tick = 0.0;
    std::vector<Level> bids, asks;
    bool open = false;
    long line_no = 1;

    auto flush = [&] {
        if (!open) return;
        snaps.push_back(
            make_snapshot(cur_id, std::move(bids), std::move(asks), cur_tick));
        bids.clear();
        asks.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id_s, tick_s, side_s, price_s, size_s;
        if (!std::getline(ss, id_s, ',') || !std::getline(ss, tick_s, ',') ||
            !std::getline(ss, side_s, ',') || !std::getline(ss, price_s, ',') ||
            !std::getline(ss, size_s)) {
            throw ParseError(line_no, 1, "expected 5 fields");
        }
        try {
            const std::int64_t id = std::stoll(id_s);
            const double tick = std::stod(tick_s);
            const double price = std::stod(price_s);
            const double size = std::stod(size_s);
            if (open && id != cur_id) flush();
            if (!open || id != cur_id) {
                cur_id = id;
                cur_tick = tick;
                open = true;
            }
            if (side_s == "bid") {
                bids.push_back({price, size});
            } else if (side_s == "ask") {
                asks.push_back({price, size});
            } else {
                throw ParseError(line_no, 1, "side must be bid or ask");
            }
        } catch (const std::invalid_argument&) {
            throw ParseError(line_no, 1, "malformed numeric field");
        } catch (const std::out_of_range&) {
            throw ParseError(line_no, 1, "numeric field out of range");
        }
    }
    flush();
    return snaps;
}

bool looks_like_depth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    unsigned char magic[2] = {0, 0};
    in.read(reinterpret_cast<char*>(magic), 2);
    if (magic[0] == 0x1f && magic[1] == 0x8b) return true;  // gzip => depth
    in.seekg(0);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "ts_ns,venue,side,price,size") return true;
    if (line == "snapshot,tick_size,side,price,size") return false;
    throw BadHeader("unrecognized input header in " + path);
}

struct WindowOutput {
    std::string report_rows;
    std::string residual_rows;
    std::string plot_rows;
    std::string mids_rows;
    std::vector<std::pair<std::string, std::string>> profile_files;
    std::string log;
};

struct WindowTask {
    std::int64_t window_start = 0;
    std::vector<const BookSnapshot*> snaps;  // usable: both sides nonempty
};

std::string param_columns(const FitResult& fr) {
    // Report slots: C, gamma, lambda_or_mu, sigma_or_alpha.
    double c = fr.params[0], gamma = kNaN, lambda_mu = kNaN, sigma_alpha = kNaN;
    switch (fr.model) {
        case ModelKind::integrated_gamma:
        case ModelKind::gamma_differential:
            gamma = fr.params[1];
            lambda_mu = fr.params[2];
            break;
        case ModelKind::cumulative_lognormal:
            lambda_mu = fr.params[1];
            sigma_alpha = fr.params[2];
            break;
        case ModelKind::truncated_powerlaw:
            lambda_mu = fr.params[2];  // S0 offset
            sigma_alpha = fr.params[1];  // alpha
            break;
    }
    return fmt_g17(c) + "," + fmt_g17(gamma) + "," + fmt_g17(lambda_mu) + "," +
           fmt_g17(sigma_alpha);
}

WindowOutput process_window(const RunConfig& cfg, const WindowTask& task) {
    WindowOutput out;
    const std::string& asset = cfg.io.asset;
    const int K = cfg.geometry.K;
    const std::string win = std::to_string(task.window_start);

    std::vector<double> xs(K);
    for (int i = 0; i < K; ++i) xs[i] = static_cast<double>(i + 1);

    for (const auto* snap : task.snaps) {
        const double quote_mid = mid_price(*snap);
        double imbalance_mid = kNaN;
        try {
            imbalance_mid = argmin_mid(*snap);
        } catch (const EmptySide&) {
        }
        out.mids_rows += asset + "," + win + "," +
                         std::to_string(snap->timestamp) + "," +
                         fmt_g17(quote_mid) + "," + fmt_g17(imbalance_mid) +
                         "," + fmt_g17(std::abs(quote_mid - imbalance_mid)) +
                         "\n";
    }

    for (Side side : {Side::bid, Side::ask}) {
        std::vector<CumulativeProfile> cums;
        std::vector<double> q_mean(K, 0.0);
        for (const auto* snap : task.snaps) {
            auto q = bin_side(*snap, side, K);
            for (int i = 0; i < K; ++i) q_mean[i] += q.q[i];
            cums.push_back(cumulate(q));
        }
        for (double& v : q_mean) v /= static_cast<double>(task.snaps.size());
        const auto sbar = window_average(cums);

        // Profile export `x,q,S`.
        std::string profile = "x,q,S\n";
        for (int i = 0; i < K; ++i) {
            profile += std::to_string(i + 1) + "," + fmt_g17(q_mean[i]) + "," +
                       fmt_g17(sbar.S[i]) + "\n";
        }
        out.profile_files.emplace_back(
            asset + "_" + to_string(side) + "_" + win + ".csv", profile);

        const std::vector<double>& ys =
            cfg.fit.target == FitTarget::cumulative ? sbar.S : q_mean;

        FitOptions fopts;
        fopts.rel_tol = cfg.fit.tol;
        fopts.multistart_scale = cfg.fit.multistart_scale;

        std::vector<FitResult> fits;
        std::vector<std::string> failures;
        for (ModelKind m : cfg.fit.models) {
            try {
                fits.push_back(fit(m, xs, ys, fopts));
            } catch (const Error& e) {
                failures.push_back(std::string(to_string(m)) + ": " + e.what());
            }
        }
        for (const auto& f : failures) {
            out.log += asset + "," + to_string(side) + "," + win + ": " + f + "\n";
        }

        std::map<ModelKind, double> deltas;
        if (!fits.empty()) {
            const auto table = compare(fits);
            for (const auto& row : table.rows) deltas[row.model] = row.delta_aic;
        }

        for (ModelKind m : cfg.fit.models) {
            const FitResult* fr = nullptr;
            for (const auto& f : fits) {
                if (f.model == m) fr = &f;
            }
            out.report_rows += asset + "," + to_string(side) + "," + win + "," +
                               to_string(m) + ",";
            if (fr == nullptr) {
                out.report_rows += "nan,nan,nan,nan,nan,nan,nan,nan,false\n";
                continue;
            }
            out.report_rows += param_columns(*fr) + "," + fmt_g17(fr->rss) + "," +
                               fmt_g17(fr->r2) + "," + fmt_g17(fr->aic) + "," +
                               fmt_g17(deltas.count(m) != 0 ? deltas[m] : kNaN) +
                               "," + (fr->converged ? "true" : "false") + "\n";

            const auto lr = log_residuals(*fr, ys);
            for (int i = 0; i < K; ++i) {
                out.residual_rows += asset + "," + to_string(side) + "," + win +
                                     "," + to_string(m) + "," +
                                     std::to_string(i + 1) + "," +
                                     fmt_g17(fr->residuals[i]) + "," +
                                     fmt_g17(lr.values[i]) + "\n";
            }
        }

        // Plot data: observed target plus each model's fitted curve.
        for (int i = 0; i < K; ++i) {
            out.plot_rows += asset + "," + to_string(side) + "," + win + "," +
                             std::to_string(i + 1) + ",emp," + fmt_g17(ys[i]) +
                             "\n";
        }
        for (const auto& f : fits) {
            for (int i = 0; i < K; ++i) {
                const double v = f.ys[i] + f.residuals[i];
                out.plot_rows += asset + "," + to_string(side) + "," + win +
                                 "," + std::to_string(i + 1) + ",fit_" +
                                 to_string(f.model) + "," + fmt_g17(v) + "\n";
            }
        }
    }
    return out;
}

}  // namespace

void cmd_fit(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.io.inputs.empty()) {
        throw ConfigError("io.input", "fit needs at least one input file");
    }
    const std::string& dir = cfg.io.output_dir;

    std::vector<BookSnapshot> snapshots;
    for (const auto& path : cfg.io.inputs) {
        std::vector<BookSnapshot> part;
        if (looks_like_depth(path)) {
            const auto records = read_depth_csv(path);
            part = build_snapshots(records, cfg.io.tick_size);
        } else {
            part = read_snapshot_csv(path);
        }
        snapshots.insert(snapshots.end(), std::make_move_iterator(part.begin()),
                         std::make_move_iterator(part.end()));
    }

    // Windows of T consecutive snapshots (T = 0: one window over everything);
    // snapshots without both sides are skipped but counted.
    long long skipped_one_sided = 0;
    std::vector<WindowTask> tasks;
    const std::size_t window_len =
        cfg.geometry.T == 0 ? std::max<std::size_t>(snapshots.size(), 1)
                            : static_cast<std::size_t>(cfg.geometry.T);
    for (std::size_t begin = 0; begin < snapshots.size(); begin += window_len) {
        const std::size_t end = std::min(begin + window_len, snapshots.size());
        WindowTask task;
        task.window_start = snapshots[begin].timestamp;
        for (std::size_t i = begin; i < end; ++i) {
            if (snapshots[i].bids.empty() || snapshots[i].asks.empty()) {
                ++skipped_one_sided;
                continue;
            }
            task.snaps.push_back(&snapshots[i]);
        }
        if (!task.snaps.empty()) tasks.push_back(std::move(task));
    }

    std::vector<WindowOutput> outputs(tasks.size());
    parallel_for(tasks.size(),
                 [&](std::size_t i) { outputs[i] = process_window(cfg, tasks[i]); });

    std::string report =
        "asset,side,window,model,C,gamma,lambda_or_mu,sigma_or_alpha,rss,r2,"
        "aic,delta_aic,converged\n";
    std::string residuals = "asset,side,window,model,x,residual,log_residual\n";
    std::string plot = "asset,side,window,x,series,value\n";
    std::string mids = "asset,window,timestamp,mid_quote,mid_argmin,abs_diff\n";
    std::string log;
    for (const auto& o : outputs) {
        report += o.report_rows;
        residuals += o.residual_rows;
        plot += o.plot_rows;
        mids += o.mids_rows;
        log += o.log;
        for (const auto& [name, content] : o.profile_files) {
            write_file_atomic(join_path(dir, join_path("profiles", name)), content);
        }
    }
    write_file_atomic(join_path(dir, "fit_report.csv"), report);
    write_file_atomic(join_path(dir, "residuals.csv"), residuals);
    write_file_atomic(join_path(dir, "plot_data.csv"), plot);
    write_file_atomic(join_path(dir, "mids.csv"), mids);
    if (!log.empty()) write_file_atomic(join_path(dir, "fit_log.txt"), log);
    write_file_atomic(join_path(dir, "config.resolved"), render_config(cfg));

    std::ostringstream meta;
    meta << "tool = " << kVersion << "\n";
    meta << "command = fit\n";
    meta << "rng = " << kRngKind << "\n";
    meta << "snapshots = " << snapshots.size() << "\n";
    meta << "windows = " << tasks.size() << "\n";
    meta << "skipped_one_sided = " << skipped_one_sided << "\n";
    write_file_atomic(join_path(dir, "meta.txt"), meta.str());
}

// ===========================================================================
// compare
// ===========================================================================

namespace {

struct ReportRow {
    std::string asset, side, window, model;
    double r2 = kNaN, delta_aic = kNaN;
};

std::vector<ReportRow> read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw BadHeader("empty report " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line !=
        "asset,side,window,model,C,gamma,lambda_or_mu,sigma_or_alpha,rss,r2,"
        "aic,delta_aic,converged") {
        throw BadHeader("unexpected report header in " + path);
    }
    std::vector<ReportRow> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 13) {
            throw ParseError(line_no, 1, "expected 13 fields in report row");
        }
        ReportRow row;
        row.asset = fields[0];
        row.side = fields[1];
        row.window = fields[2];
        row.model = fields[3];
        row.r2 = std::strtod(fields[9].c_str(), nullptr);
        row.delta_aic = std::strtod(fields[11].c_str(), nullptr);
        rows.push_back(std::move(row));
    }
    return rows;
}

double median_inplace(std::vector<double>& xs) {
    const std::size_t n = xs.size();
    auto mid = xs.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(xs.begin(), mid, xs.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(xs.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

void cmd_compare(const std::vector<std::string>& report_paths,
                 const std::string& output_dir, std::ostream& console) {
    if (report_paths.empty()) {
        throw ConfigError("reports", "compare needs at least one report");
    }
    std::vector<ReportRow> rows;
    for (const auto& path : report_paths) {
        auto part = read_report(path);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    if (rows.empty()) throw InsufficientData("compare: reports contain no rows");

    // (asset, side) -> model -> windows' values
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>>
        groups;
    std::set<std::string> models_seen;
    for (const auto& row : rows) {
        auto& slot = groups[{row.asset, row.side}][row.model];
        if (std::isfinite(row.r2)) slot.first.push_back(row.r2);
        if (std::isfinite(row.delta_aic)) slot.second.push_back(row.delta_aic);
        models_seen.insert(row.model);
    }

    std::vector<std::string> models(models_seen.begin(), models_seen.end());
    std::string header = "asset,side";
    for (const auto& m : models) header += ",r2_" + m;
    for (const auto& m : models) {
        if (m != "integrated_gamma") header += ",delta_aic_" + m;
    }
    header += ",n_windows\n";

    std::string csv = header;
    std::ostringstream table;
    table << header;
    for (const auto& [key, per_model] : groups) {
        std::string line = key.first + "," + key.second;
        std::size_t n_windows = 0;
        for (const auto& m : models) {
            auto it = per_model.find(m);
            if (it == per_model.end() || it->second.first.empty()) {
                line += ",nan";
            } else {
                auto values = it->second.first;
                n_windows = std::max(n_windows, values.size());
                line += "," + fmt_g17(median_inplace(values));
            }
        }
        for (const auto& m : models) {
            if (m == "integrated_gamma") continue;
            auto it = per_model.find(m);
            if (it == per_model.end() || it->second.second.empty()) {
                line += ",nan";
            } else {
                auto values = it->second.second;
                line += "," + fmt_g17(median_inplace(values));
            }
        }
        line += "," + std::to_string(n_windows) + "\n";
        csv += line;
        table << line;
    }

    write_file_atomic(output_dir + "/aggregate.csv", csv);
    console << table.str();
}

// ===========================================================================
// ingest-check
// ===========================================================================

IngestSummary ingest_check(const std::string& path, double tick_size) {
    IngestSummary summary;
    std::set<std::string> venues;
    std::vector<DepthRecord> records;
    DepthReader reader(path);
    while (auto rec = reader.next()) {
        venues.insert(rec->venue);
        records.push_back(std::move(*rec));
        ++summary.records;
    }
    const auto snaps = build_snapshots(records, tick_size);
    summary.snapshots = static_cast<long long>(snaps.size());
    summary.venues = static_cast<long long>(venues.size());
    for (const auto& s : snaps) {
        if (s.bids.empty() || s.asks.empty()) ++summary.one_sided;
    }
    return summary;
}

}  // namespace lobgeom
