#pragma once

// Laplacian construction, Fiedler projection, and the emergent observables
// built on it: per-vertex returns, windowed risk, and the aggregate balance
// check.

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "lobgeom/graph.hpp"

namespace lobgeom {

struct Projection {
    std::vector<double> coords;  // mean-zero, unit-norm, sign-fixed
    double eigenvalue = 0.0;     // smallest nonzero Laplacian eigenvalue
    int sign_anchor = 0;         // vertex fixing the sign convention
    double residual = 0.0;       // achieved ||L v - lambda v||_2
    std::string solver;          // "dense" or "subspace_inverse"
};

using ReturnSeries = std::vector<double>;

// Weighted adjacency in CSR form; multi-edges accumulate weight.
class LaplacianOp {
public:
    explicit LaplacianOp(const RelationalGraph& g);

    int n() const { return n_; }
    void apply(const double* x, double* y) const;  // y = L x
    double max_row_sum() const;                    // Gershgorin bound on ||L||

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col() const { return col_; }
    const std::vector<double>& weight() const { return weight_; }
    const std::vector<double>& diag() const { return diag_; }

private:
    int n_;
    std::vector<int> row_ptr_;
    std::vector<int> col_;
    std::vector<double> weight_;
    std::vector<double> diag_;  // weighted degree
};

Eigen::MatrixXd laplacian_dense(const RelationalGraph& g);

struct FiedlerOptions {
    enum class Mode { automatic, dense, iterative };
    Mode mode = Mode::automatic;
    double tol = -1.0;         // < 0: backend default (1e-10 dense, 1e-8 iterative)
    int dense_threshold = 800; // automatic mode switches backend above this
    int max_iterations = 200;  // outer subspace iterations
    const Projection* warm_start = nullptr;
};

// Unit-norm, mean-zero, sign-fixed eigenvector of the smallest nonzero
// Laplacian eigenvalue. Throws Disconnected for disconnected graphs and
// NonConvergence when the residual cannot reach tol.
Projection fiedler_projection(const RelationalGraph& g, FiedlerOptions opts = {});

// Repeated projections of one evolving graph. Carries the whole iteration
// subspace between calls, which makes per-snapshot solves in a simulation run
// much cheaper than cold starts. Produces the same answer (to tolerance) as
// fiedler_projection.
class FiedlerTracker {
public:
    explicit FiedlerTracker(FiedlerOptions opts = {}) : opts_(opts) {}
    Projection solve(const RelationalGraph& g);

private:
    FiedlerOptions opts_;
    std::vector<std::vector<double>> block_;
};

// Flip next in place when its overlap with prev is negative, preserving
// temporal continuity of the price-like coordinate across updates.
void align_to(const Projection& prev, Projection& next);

// r_i = next_i - prev_i.
ReturnSeries returns(const Projection& prev, const Projection& next);

// |sum_i (next_i - prev_i)|, the aggregate balance observable.
double check_balance(const Projection& prev, const Projection& next);

// Population variance of the per-vertex return over a window of length >= 2.
double risk(const std::vector<ReturnSeries>& series, int vertex);

// CSV export `vertex,coord` with 17 significant digits, plus a key-value
// metadata sidecar.
void write_projection_csv(const Projection& p, std::ostream& out);
void write_projection_meta(const Projection& p, std::ostream& out);

}  // namespace lobgeom
