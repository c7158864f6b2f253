#include "lobgeom/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>

#include "lobgeom/version.hpp"

namespace lobgeom {

// ===========================================================================
// Laplacian operators
// ===========================================================================

LaplacianOp::LaplacianOp(const RelationalGraph& g) : n_(g.n_vertices()) {
    // Accumulate multi-edge weights into a sorted CSR adjacency.
    std::vector<std::vector<std::pair<int, double>>> adj(n_);
    for (auto [i, j] : g.edges()) {
        adj[i].emplace_back(j, 1.0);
        adj[j].emplace_back(i, 1.0);
    }
    row_ptr_.assign(n_ + 1, 0);
    diag_.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        auto& row = adj[i];
        std::sort(row.begin(), row.end());
        // merge duplicates
        std::vector<std::pair<int, double>> merged;
        for (auto& [j, w] : row) {
            if (!merged.empty() && merged.back().first == j) {
                merged.back().second += w;
            } else {
                merged.emplace_back(j, w);
            }
        }
        row_ptr_[i + 1] = row_ptr_[i] + static_cast<int>(merged.size());
        for (auto& [j, w] : merged) {
            col_.push_back(j);
            weight_.push_back(w);
            diag_[i] += w;
        }
    }
}

void LaplacianOp::apply(const double* x, double* y) const {
    for (int i = 0; i < n_; ++i) {
        double acc = diag_[i] * x[i];
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            acc -= weight_[k] * x[col_[k]];
        }
        y[i] = acc;
    }
}

double LaplacianOp::max_row_sum() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m = std::max(m, 2.0 * diag_[i]);
    return m;
}

Eigen::MatrixXd laplacian_dense(const RelationalGraph& g) {
    const int n = g.n_vertices();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (auto [i, j] : g.edges()) {
        L(i, j) -= 1.0;
        L(j, i) -= 1.0;
        L(i, i) += 1.0;
        L(j, j) += 1.0;
    }
    return L;
}

namespace {

bool connected(const RelationalGraph& g) {
    const int n = g.n_vertices();
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(n);
    for (auto [i, j] : g.edges()) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int w : adj[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                q.push(w);
            }
        }
    }
    return count == n;
}

void project_mean(std::vector<double>& x) {
    const double mean =
        std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (double& v : x) v -= mean;
}

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void sign_fix(std::vector<double>& coords, int& anchor_out) {
    double max_abs = 0.0;
    for (double c : coords) max_abs = std::max(max_abs, std::abs(c));
    // Ties (exact by symmetry, inexact after roundoff) resolve to the lowest
    // vertex index.
    int anchor = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (std::abs(coords[i]) >= max_abs * (1.0 - 1e-12)) {
            anchor = static_cast<int>(i);
            break;
        }
    }
    if (coords[anchor] < 0.0) {
        for (double& c : coords) c = -c;
    }
    anchor_out = anchor;
}

double eig_residual(const LaplacianOp& op, const std::vector<double>& v,
                    double lambda) {
    std::vector<double> lv(v.size());
    op.apply(v.data(), lv.data());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = lv[i] - lambda * v[i];
        s += r * r;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Dense backend
// ---------------------------------------------------------------------------

Projection fiedler_dense(const RelationalGraph& g, const LaplacianOp& op,
                         double tol) {
    const int n = g.n_vertices();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian_dense(g));
    if (es.info() != Eigen::Success) {
        throw NonConvergence("dense eigensolver failed");
    }
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();

    const double zero_thresh = 1e-12 * std::max(1.0, vals(n - 1));
    if (n < 2 || vals(1) <= zero_thresh) {
        throw Disconnected("second zero Laplacian eigenvalue detected");
    }
    const double lambda = vals(1);

    // Within a degenerate eigenspace, pick the sign-fixed candidate that is
    // lexicographically smallest, which makes the choice deterministic.
    const double degen_tol = 1e-9 * std::max(1.0, lambda);
    std::vector<double> best;
    int best_anchor = 0;
    for (int k = 1; k < n && vals(k) - lambda <= degen_tol; ++k) {
        std::vector<double> cand(n);
        for (int i = 0; i < n; ++i) cand[i] = vecs(i, k);
        project_mean(cand);
        const double nrm = norm2(cand);
        for (double& c : cand) c /= nrm;
        int anchor = 0;
        sign_fix(cand, anchor);
        if (best.empty() ||
            std::lexicographical_compare(cand.begin(), cand.end(), best.begin(),
                                         best.end())) {
            best = std::move(cand);
            best_anchor = anchor;
        }
    }

    Projection p;
    p.coords = std::move(best);
    p.eigenvalue = lambda;
    p.sign_anchor = best_anchor;
    p.residual = eig_residual(op, p.coords, lambda);
    p.solver = "dense";
    if (p.residual > tol) {
        throw NonConvergence("dense eigenpair residual above tolerance");
    }
    return p;
}

// ---------------------------------------------------------------------------
// IC(0)-preconditioned CG on the deflated Laplacian
// ---------------------------------------------------------------------------

struct IncompleteCholesky {
    int n = 0;
    // Strict lower triangle of the factor, rows sorted by column.
    std::vector<int> row_ptr, col;
    std::vector<double> val;
    std::vector<double> diag;
    // Transpose adjacency for the backward solve.
    std::vector<int> t_row_ptr, t_col;
    std::vector<double> t_val;

    // Factors A = L_lap + sigma I; bumps sigma on breakdown.
    static IncompleteCholesky build(const LaplacianOp& op) {
        IncompleteCholesky f;
        f.n = op.n();
        double sigma = 1e-8 * std::max(1.0, op.max_row_sum());
        for (int attempt = 0; attempt < 30; ++attempt) {
            if (f.try_factor(op, sigma)) {
                f.build_transpose();
                return f;
            }
            sigma *= 10.0;
        }
        throw NonConvergence("incomplete Cholesky breakdown");
    }

    bool try_factor(const LaplacianOp& op, double sigma) {
        row_ptr.assign(n + 1, 0);
        col.clear();
        val.clear();
        diag.assign(n, 0.0);

        const auto& rp = op.row_ptr();
        const auto& cols = op.col();
        const auto& w = op.weight();

        // Lower-triangular pattern of the Laplacian (columns ascending).
        for (int i = 0; i < n; ++i) {
            for (int k = rp[i]; k < rp[i + 1]; ++k) {
                if (cols[k] < i) {
                    col.push_back(cols[k]);
                    val.push_back(-w[k]);  // off-diagonal Laplacian entry
                }
            }
            row_ptr[i + 1] = static_cast<int>(col.size());
        }

        for (int i = 0; i < n; ++i) {
            for (int kk = row_ptr[i]; kk < row_ptr[i + 1]; ++kk) {
                const int j = col[kk];
                double s = val[kk];
                // subtract pattern-restricted dot of factored rows i and j
                int a = row_ptr[i], b = row_ptr[j];
                while (a < kk && b < row_ptr[j + 1]) {
                    if (col[a] == col[b]) {
                        s -= val[a] * val[b];
                        ++a;
                        ++b;
                    } else if (col[a] < col[b]) {
                        ++a;
                    } else {
                        ++b;
                    }
                }
                val[kk] = s / diag[j];
            }
            double d = op.diag()[i] + sigma;
            for (int kk = row_ptr[i]; kk < row_ptr[i + 1]; ++kk) {
                d -= val[kk] * val[kk];
            }
            if (d <= 0.0 || !std::isfinite(d)) return false;
            diag[i] = std::sqrt(d);
        }
        return true;
    }

    void build_transpose() {
        t_row_ptr.assign(n + 1, 0);
        for (int i = 0; i < n; ++i) {
            for (int kk = row_ptr[i]; kk < row_ptr[i + 1]; ++kk) {
                ++t_row_ptr[col[kk] + 1];
            }
        }
        for (int i = 0; i < n; ++i) t_row_ptr[i + 1] += t_row_ptr[i];
        t_col.assign(col.size(), 0);
        t_val.assign(col.size(), 0.0);
        std::vector<int> cursor(t_row_ptr.begin(), t_row_ptr.end() - 1);
        for (int i = 0; i < n; ++i) {
            for (int kk = row_ptr[i]; kk < row_ptr[i + 1]; ++kk) {
                const int pos = cursor[col[kk]]++;
                t_col[pos] = i;
                t_val[pos] = val[kk];
            }
        }
    }

    // z = (L L^T)^{-1} r
    void solve(const std::vector<double>& r, std::vector<double>& z,
               std::vector<double>& scratch) const {
        auto& y = scratch;
        y.resize(n);
        for (int i = 0; i < n; ++i) {
            double s = r[i];
            for (int kk = row_ptr[i]; kk < row_ptr[i + 1]; ++kk) {
                s -= val[kk] * y[col[kk]];
            }
            y[i] = s / diag[i];
        }
        z.resize(n);
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int kk = t_row_ptr[i]; kk < t_row_ptr[i + 1]; ++kk) {
                s -= t_val[kk] * z[t_col[kk]];
            }
            z[i] = s / diag[i];
        }
    }
};

// Solves L x = b (b mean-free) on the subspace orthogonal to the constant
// vector. Returns the achieved relative residual.
double pcg_solve(const LaplacianOp& op, const IncompleteCholesky& pre,
                 const std::vector<double>& b, std::vector<double>& x,
                 double rel_tol, int max_iter) {
    const int n = op.n();
    x.assign(n, 0.0);
    std::vector<double> r = b;
    project_mean(r);
    const double bnorm = std::max(norm2(r), 1e-300);

    std::vector<double> z(n), p(n), ap(n), scratch(n);
    pre.solve(r, z, scratch);
    project_mean(z);
    p = z;
    double rz = dot(r, z);

    for (int it = 0; it < max_iter; ++it) {
        op.apply(p.data(), ap.data());
        const double pap = dot(p, ap);
        if (pap <= 0.0 || !std::isfinite(pap)) break;
        const double alpha = rz / pap;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (norm2(r) <= rel_tol * bnorm) break;
        pre.solve(r, z, scratch);
        project_mean(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    project_mean(x);
    return norm2(r) / bnorm;
}

// ---------------------------------------------------------------------------
// Subspace inverse iteration with Rayleigh-Ritz extraction
// ---------------------------------------------------------------------------

Projection fiedler_iterative(const RelationalGraph& g, const LaplacianOp& op,
                             double tol, int max_outer,
                             const Projection* warm,
                             std::vector<std::vector<double>>* block_io = nullptr) {
    const int n = g.n_vertices();
    const int keep = std::min(4, n - 1);       // Ritz vectors carried across restarts
    const int max_basis = std::min(48, n - 1);

    const IncompleteCholesky pre = IncompleteCholesky::build(op);
    const double zero_thresh = 1e-12 * std::max(1.0, op.max_row_sum());

    // Deterministic fallback directions; no RNG parameter is exposed because
    // the converged answer must not depend on the start.
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    auto random_column = [&](std::vector<double>& col) {
        col.resize(n);
        for (int i = 0; i < n; ++i) {
            col[i] = static_cast<double>(detail::splitmix64(state) >> 11) *
                         0x1.0p-53 -
                     0.5;
        }
    };

    std::vector<std::vector<double>> B;   // orthonormal basis, mean-free
    std::vector<std::vector<double>> LB;  // exact L * basis

    // Returns false when the candidate is (numerically) already in the span.
    auto append_direction = [&](std::vector<double> t) {
        project_mean(t);
        const double nrm0 = norm2(t);
        if (!(nrm0 > 0.0) || !std::isfinite(nrm0)) return false;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : B) {
                const double d = dot(t, b);
                for (int i = 0; i < n; ++i) t[i] -= d * b[i];
            }
        }
        const double nrm = norm2(t);
        if (!(nrm > 1e-10 * nrm0) || !std::isfinite(nrm)) return false;
        for (double& x : t) x /= nrm;
        LB.emplace_back(n);
        op.apply(t.data(), LB.back().data());
        B.push_back(std::move(t));
        return true;
    };

    auto append_or_random = [&](std::vector<double> t) {
        if (append_direction(std::move(t))) return;
        std::vector<double> r;
        for (int tries = 0; tries < 8; ++tries) {
            random_column(r);
            if (append_direction(r)) return;
        }
    };

    // Seed: carried Ritz block from a previous solve of the evolving graph,
    // a caller-provided warm vector, or a deterministic pseudo-random start.
    if (block_io != nullptr && !block_io->empty() &&
        static_cast<int>(block_io->front().size()) == n) {
        for (const auto& col : *block_io) append_direction(col);
    } else if (warm != nullptr && static_cast<int>(warm->coords.size()) == n) {
        append_direction(warm->coords);
    }
    while (B.size() < 2) {
        std::vector<double> r;
        random_column(r);
        append_direction(r);
    }

    double best_residual = std::numeric_limits<double>::infinity();
    std::vector<double> best_v;
    double best_lambda = 0.0;

    std::vector<double> ritz(n), lritz(n), resid(n), t(n);

    const int budget = std::max(max_outer, 32);
    for (int step = 0; step < budget; ++step) {
        // Rayleigh-Ritz on the current basis with exact matvecs.
        const int m = static_cast<int>(B.size());
        Eigen::MatrixXd H(m, m);
        for (int a = 0; a < m; ++a) {
            for (int b = a; b < m; ++b) {
                H(a, b) = H(b, a) = dot(B[a], LB[b]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        const auto& theta = es.eigenvalues();
        const auto& Y = es.eigenvectors();

        const double lambda = theta(0);
        if (lambda <= zero_thresh) {
            throw Disconnected("second zero Laplacian eigenvalue detected");
        }
        std::fill(ritz.begin(), ritz.end(), 0.0);
        std::fill(lritz.begin(), lritz.end(), 0.0);
        for (int b = 0; b < m; ++b) {
            const double y = Y(b, 0);
            for (int i = 0; i < n; ++i) {
                ritz[i] += y * B[b][i];
                lritz[i] += y * LB[b][i];
            }
        }
        project_mean(ritz);
        const double nrm = norm2(ritz);
        for (int i = 0; i < n; ++i) ritz[i] /= nrm;

        double res = 0.0;
        for (int i = 0; i < n; ++i) {
            resid[i] = lritz[i] / nrm - lambda * ritz[i];
            res += resid[i] * resid[i];
        }
        res = std::sqrt(res);

        if (res < best_residual) {
            best_residual = res;
            best_v = ritz;
            best_lambda = lambda;
        }
        if (best_residual <= tol) {
            if (block_io != nullptr) {
                block_io->clear();
                const int carry = std::min(keep, m);
                for (int c = 0; c < carry; ++c) {
                    std::vector<double> vc(n, 0.0);
                    for (int b = 0; b < m; ++b) {
                        const double y = Y(b, c);
                        for (int i = 0; i < n; ++i) vc[i] += y * B[b][i];
                    }
                    block_io->push_back(std::move(vc));
                }
            }
            Projection p;
            p.coords = std::move(best_v);
            p.eigenvalue = best_lambda;
            p.residual = best_residual;
            p.solver = "subspace_inverse";
            sign_fix(p.coords, p.sign_anchor);
            return p;
        }

        // Thick restart once the basis is full: keep the leading Ritz vectors.
        if (m >= max_basis) {
            std::vector<std::vector<double>> kept;
            for (int c = 0; c < keep; ++c) {
                std::vector<double> vc(n, 0.0);
                for (int b = 0; b < m; ++b) {
                    const double y = Y(b, c);
                    for (int i = 0; i < n; ++i) vc[i] += y * B[b][i];
                }
                kept.push_back(std::move(vc));
            }
            B.clear();
            LB.clear();
            for (auto& col : kept) append_direction(col);
            if (B.empty()) {
                std::vector<double> r;
                random_column(r);
                append_direction(r);
            }
        }

        // Davidson-type expansion: the preconditioned residual. The solve can
        // be loose; extraction accuracy comes from the exact Rayleigh-Ritz.
        pcg_solve(op, pre, resid, t, 1e-3, 400);
        append_or_random(t);
    }

    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "Fiedler solver: residual %.3e did not reach tolerance %.3e",
                  best_residual, tol);
    throw NonConvergence(msg);
}

}  // namespace

Projection fiedler_projection(const RelationalGraph& g, FiedlerOptions opts) {
    const int n = g.n_vertices();
    if (n < 2) throw Disconnected("graph too small for a Fiedler projection");
    if (!connected(g)) throw Disconnected("graph is disconnected");

    LaplacianOp op(g);

    bool dense = opts.mode == FiedlerOptions::Mode::dense ||
                 (opts.mode == FiedlerOptions::Mode::automatic &&
                  n <= opts.dense_threshold);
    if (n < 8) dense = true;  // block method needs room

    const double tol = opts.tol >= 0.0 ? opts.tol : (dense ? 1e-10 : 1e-8);
    if (dense) {
        return fiedler_dense(g, op, tol);
    }
    return fiedler_iterative(g, op, tol, opts.max_iterations, opts.warm_start);
}

Projection FiedlerTracker::solve(const RelationalGraph& g) {
    const int n = g.n_vertices();
    if (n < 2) throw Disconnected("graph too small for a Fiedler projection");
    if (!connected(g)) throw Disconnected("graph is disconnected");

    LaplacianOp op(g);
    const bool dense = opts_.mode == FiedlerOptions::Mode::dense ||
                       (opts_.mode == FiedlerOptions::Mode::automatic &&
                        n <= opts_.dense_threshold) ||
                       n < 8;
    const double tol = opts_.tol >= 0.0 ? opts_.tol : (dense ? 1e-10 : 1e-8);
    if (dense) {
        return fiedler_dense(g, op, tol);
    }
    return fiedler_iterative(g, op, tol, opts_.max_iterations,
                             opts_.warm_start, &block_);
}

void align_to(const Projection& prev, Projection& next) {
    if (prev.coords.size() != next.coords.size()) {
        throw DimensionMismatch("align_to: projections over different vertex sets");
    }
    if (dot(prev.coords, next.coords) < 0.0) {
        for (double& c : next.coords) c = -c;
        // Temporal continuity overrides the static orientation, so the anchor
        // moves to the largest component that is positive after the flip.
        int anchor = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < next.coords.size(); ++i) {
            if (next.coords[i] > best) {
                best = next.coords[i];
                anchor = static_cast<int>(i);
            }
        }
        next.sign_anchor = anchor;
    }
}

ReturnSeries returns(const Projection& prev, const Projection& next) {
    if (prev.coords.size() != next.coords.size()) {
        throw DimensionMismatch("returns: projections over different vertex sets");
    }
    ReturnSeries r(prev.coords.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = next.coords[i] - prev.coords[i];
    }
    return r;
}

double check_balance(const Projection& prev, const Projection& next) {
    if (prev.coords.size() != next.coords.size()) {
        throw DimensionMismatch("check_balance: projections over different vertex sets");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < prev.coords.size(); ++i) {
        s += next.coords[i] - prev.coords[i];
    }
    return std::abs(s);
}

double risk(const std::vector<ReturnSeries>& series, int vertex) {
    if (series.size() < 2) {
        throw WindowTooShort("risk: window must contain at least 2 return series");
    }
    // Welford's streaming moments; the tests compare against a two-pass oracle.
    double mean = 0.0, m2 = 0.0;
    long long count = 0;
    for (const auto& r : series) {
        if (vertex < 0 || static_cast<std::size_t>(vertex) >= r.size()) {
            throw DimensionMismatch("risk: vertex index out of range");
        }
        ++count;
        const double x = r[vertex];
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    return m2 / static_cast<double>(count);
}

void write_projection_csv(const Projection& p, std::ostream& out) {
    out << "vertex,coord\n";
    char buf[64];
    for (std::size_t i = 0; i < p.coords.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, p.coords[i]);
        out << buf;
    }
}

void write_projection_meta(const Projection& p, std::ostream& out) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "eigenvalue = %.17g\n", p.eigenvalue);
    out << buf;
    std::snprintf(buf, sizeof buf, "residual = %.17g\n", p.residual);
    out << buf;
    out << "solver = " << p.solver << "\n";
    out << "sign_anchor = " << p.sign_anchor << "\n";
    out << "n_vertices = " << p.coords.size() << "\n";
    out << "rng = " << kRngKind << "\n";
}

}  // namespace lobgeom
