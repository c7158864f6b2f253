#pragma once

// Nonlinear least-squares engine for the cumulative liquidity models, model
// comparison metrics (R^2, AIC, delta-AIC), residual diagnostics, and the
// single-scale log-slope diagnostic.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lobgeom/bookgeom.hpp"
#include "lobgeom/errors.hpp"

namespace lobgeom {

enum class ModelKind {
    integrated_gamma,     // S(x) = C / lambda^(gamma+1) * gammainc(gamma+1, lambda x)
    gamma_differential,   // Q(x) = C x^gamma exp(-lambda x)
    cumulative_lognormal, // S(x) = C Phi((ln x - mu) / sigma)
    truncated_powerlaw,   // S(x) = S0 + C sum_{u<=x} u^(-alpha)
};

inline constexpr int kModelParamCount = 3;
inline constexpr double kGammaFloor = -1.0 + 1e-6;

const char* to_string(ModelKind m);
ModelKind model_from_string(const std::string& name);

// Natural parameter order per model:
//   integrated_gamma / gamma_differential: (C, gamma, lambda)
//   cumulative_lognormal:                  (C, mu, sigma)
//   truncated_powerlaw:                    (C, alpha, S0)
using Params = std::array<double, 3>;

double model_eval(ModelKind m, const Params& natural, double x);

// Unconstrained reparametrization used by the optimizer: positive parameters
// go through log, gamma through a shifted log with floor kGammaFloor, mu stays
// linear.
Params to_log_params(ModelKind m, const Params& natural);
Params from_log_params(ModelKind m, const Params& u);

// f(x; u) in log-parameter space, optionally with its exact gradient (forward
// duals through the full evaluation, special-function kernels included).
double model_eval_logspace(ModelKind m, const Params& u, double x,
                           Params* grad);

struct FitOptions {
    double rel_tol = 1e-10;         // relative RSS improvement declaring convergence
    double grad_tol = 1e-8;         // RSS gradient norm declaring convergence
    int max_iterations = 500;       // per start
    double multistart_scale = 4.0;  // multiplicative perturbation factor
};

struct FitResult {
    ModelKind model = ModelKind::integrated_gamma;
    Params params{};                // natural parametrization
    double rss = 0.0;
    double r2 = 0.0;
    double aic = 0.0;
    bool converged = false;
    int n_iterations = 0;
    std::vector<double> residuals;      // fitted - observed
    std::vector<double> log_residuals;  // ln(observed) - ln(fitted); NaN masked
    std::vector<double> xs, ys;         // data the fit ran on
};

// Damped Gauss-Newton (Levenberg-Marquardt schedule) over a multi-start grid
// seeded by method-of-moments estimates.
FitResult fit(ModelKind m, std::span<const double> xs,
              std::span<const double> ys, const FitOptions& opts = {});

// Gaussian-residual AIC: n ln(rss/n) + 2k.
double aic(double rss, long long n, int k);

struct ComparisonRow {
    ModelKind model;
    double r2 = 0.0;
    double aic = 0.0;
    // AIC(integrated_gamma) - AIC(model); negative means the integrated-gamma
    // geometry carries the lower AIC. NaN when no integrated-gamma fit is in
    // the comparison.
    double delta_aic = 0.0;
    bool converged = false;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    ModelKind preferred;  // lowest AIC
};

Comparison compare(std::span<const FitResult> fits);
Comparison compare(std::initializer_list<FitResult> fits);

struct LogResiduals {
    std::vector<double> values;  // ln(observed) - ln(fitted); NaN where masked
    std::vector<int> masked;     // bins with nonpositive observed or fitted value
};

LogResiduals log_residuals(const FitResult& fit, std::span<const double> ys);

// Sample autocorrelation at lags 1..max_lag (mean-removed, lag-0 normalized).
std::vector<double> residual_autocorr(std::span<const double> eps, int max_lag);

struct LogSlope {
    std::vector<double> g;                  // d ln q / dx per bin; NaN off-run
    std::vector<std::pair<int, int>> runs;  // maximal nonzero runs (start, len)
    double gamma_hat = 0.0;
    double lambda_hat = 0.0;
};

// Central differences of ln q on maximal nonzero runs, plus the implied
// (gamma, lambda) from regressing the log-slope on the discrete counterpart
// of (1/x, -1).
LogSlope logslope_diagnostic(const SideProfile& q);

// Signed-imbalance mid over the snapshot's price levels: the split point
// minimizing |mass below - mass above|, reported as the midpoint of the two
// bracketing prices. Diagnostic only; binning always uses the best-quote mid.
double argmin_mid(const BookSnapshot& snap);

}  // namespace lobgeom
