#include "lobgeom/fitkit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lobgeom/dual.hpp"
#include "lobgeom/specfun.hpp"

namespace lobgeom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename T>
T model_core(ModelKind m, const T& c, const T& p1, const T& p2, double x) {
    using std::exp;
    using std::log;
    switch (m) {
        case ModelKind::integrated_gamma: {
            const T a = p1 + T(1.0);
            const T z = p2 * T(x);
            return c * exp(log_gamma_t(a) - a * log(p2)) *
                   reg_lower_gamma_t(a, z);
        }
        case ModelKind::gamma_differential:
            return c * exp(p1 * T(std::log(x)) - p2 * T(x));
        case ModelKind::cumulative_lognormal:
            return c * std_normal_cdf_t((T(std::log(x)) - p1) / p2);
        case ModelKind::truncated_powerlaw: {
            const int ix = static_cast<int>(std::floor(x + 1e-9));
            T acc = p2;  // S0 offset
            for (int u = 1; u <= ix; ++u) {
                acc += c * exp(-p1 * T(std::log(static_cast<double>(u))));
            }
            return acc;
        }
    }
    return T(0.0);
}

void check_domain(ModelKind m, const Params& p, double x) {
    const bool params_ok = [&] {
        switch (m) {
            case ModelKind::integrated_gamma:
            case ModelKind::gamma_differential:
                return p[0] > 0.0 && p[1] > kGammaFloor && p[2] > 0.0;
            case ModelKind::cumulative_lognormal:
                return p[0] > 0.0 && std::isfinite(p[1]) && p[2] > 0.0;
            case ModelKind::truncated_powerlaw:
                return p[0] > 0.0 && p[1] > 0.0 && p[2] >= 0.0;
        }
        return false;
    }();
    if (!params_ok || !std::isfinite(p[0]) || !std::isfinite(p[1]) ||
        !std::isfinite(p[2])) {
        throw DomainError(std::string("model_eval: parameters out of domain for ") +
                          to_string(m));
    }
    const double x_min = m == ModelKind::truncated_powerlaw ? 1.0 : 0.0;
    if (!(x > x_min - 1e-12) || !std::isfinite(x) || x <= 0.0) {
        throw DomainError("model_eval: x outside the model domain");
    }
    if (m == ModelKind::truncated_powerlaw && x > 1e6) {
        throw DomainError("model_eval: x too large for the partial-sum model");
    }
}

}  // namespace

const char* to_string(ModelKind m) {
    switch (m) {
        case ModelKind::integrated_gamma: return "integrated_gamma";
        case ModelKind::gamma_differential: return "gamma_differential";
        case ModelKind::cumulative_lognormal: return "cumulative_lognormal";
        case ModelKind::truncated_powerlaw: return "truncated_powerlaw";
    }
    return "integrated_gamma";
}

ModelKind model_from_string(const std::string& name) {
    if (name == "integrated_gamma") return ModelKind::integrated_gamma;
    if (name == "gamma_differential") return ModelKind::gamma_differential;
    if (name == "cumulative_lognormal") return ModelKind::cumulative_lognormal;
    if (name == "truncated_powerlaw") return ModelKind::truncated_powerlaw;
    throw DomainError("unknown model '" + name + "'");
}

double model_eval(ModelKind m, const Params& natural, double x) {
    check_domain(m, natural, x);
    return model_core(m, natural[0], natural[1], natural[2], x);
}

Params to_log_params(ModelKind m, const Params& p) {
    switch (m) {
        case ModelKind::integrated_gamma:
        case ModelKind::gamma_differential:
            return {std::log(p[0]), std::log(p[1] - kGammaFloor), std::log(p[2])};
        case ModelKind::cumulative_lognormal:
            return {std::log(p[0]), p[1], std::log(p[2])};
        case ModelKind::truncated_powerlaw:
            return {std::log(p[0]), std::log(p[1]), std::log(std::max(p[2], 1e-300))};
    }
    return {};
}

Params from_log_params(ModelKind m, const Params& u) {
    switch (m) {
        case ModelKind::integrated_gamma:
        case ModelKind::gamma_differential:
            return {std::exp(u[0]), kGammaFloor + std::exp(u[1]), std::exp(u[2])};
        case ModelKind::cumulative_lognormal:
            return {std::exp(u[0]), u[1], std::exp(u[2])};
        case ModelKind::truncated_powerlaw:
            return {std::exp(u[0]), std::exp(u[1]), std::exp(u[2])};
    }
    return {};
}

double model_eval_logspace(ModelKind m, const Params& u, double x,
                           Params* grad) {
    if (grad == nullptr) {
        const Params p = from_log_params(m, u);
        return model_core(m, p[0], p[1], p[2], x);
    }
    using std::exp;
    const Dual3 u0(u[0], 0), u1(u[1], 1), u2(u[2], 2);
    Dual3 c, p1, p2;
    switch (m) {
        case ModelKind::integrated_gamma:
        case ModelKind::gamma_differential:
            c = exp(u0);
            p1 = Dual3(kGammaFloor) + exp(u1);
            p2 = exp(u2);
            break;
        case ModelKind::cumulative_lognormal:
            c = exp(u0);
            p1 = u1;
            p2 = exp(u2);
            break;
        case ModelKind::truncated_powerlaw:
            c = exp(u0);
            p1 = exp(u1);
            p2 = exp(u2);
            break;
    }
    const Dual3 f = model_core(m, c, p1, p2, x);
    *grad = f.d;
    return f.v;
}

// ===========================================================================
// Fitting
// ===========================================================================

namespace {

struct Seed {
    Params u;
};

// Method-of-moments seeds from the normalized increment distribution of the
// target, perturbed over a fixed 3x3 multiplicative grid on the shape
// parameters.
std::vector<Seed> make_seeds(ModelKind m, std::span<const double> xs,
                             std::span<const double> ys, double scale) {
    const std::size_t n = xs.size();
    std::vector<double> q(n);
    if (m == ModelKind::gamma_differential) {
        for (std::size_t i = 0; i < n; ++i) q[i] = std::max(ys[i], 0.0);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double prev = i == 0 ? 0.0 : ys[i - 1];
            q[i] = std::max(ys[i] - prev, 0.0);
        }
    }
    const double mass = std::accumulate(q.begin(), q.end(), 0.0);
    double y_top = 0.0;
    for (double y : ys) y_top = std::max(y_top, std::abs(y));
    if (y_top <= 0.0) y_top = 1.0;

    double mean_x, var_x;
    if (mass > 0.0) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m1 += xs[i] * q[i];
            m2 += xs[i] * xs[i] * q[i];
        }
        mean_x = m1 / mass;
        var_x = std::max(m2 / mass - mean_x * mean_x, 1e-6);
    } else {
        mean_x = 0.5 * (xs.front() + xs.back());
        var_x = std::max(mean_x * mean_x / 4.0, 1.0);
    }

    const double factors[3] = {1.0 / scale, 1.0, scale};
    std::vector<Seed> seeds;

    switch (m) {
        case ModelKind::integrated_gamma:
        case ModelKind::gamma_differential: {
            const double lambda0 = std::clamp(mean_x / var_x, 1e-4, 50.0);
            const double gamma0 =
                std::clamp(mean_x * mean_x / var_x - 1.0, kGammaFloor + 0.05, 50.0);
            const double amp =
                m == ModelKind::gamma_differential ? std::max(mass, y_top) : y_top;
            for (double fg : factors) {
                for (double fl : factors) {
                    const double g =
                        kGammaFloor + (gamma0 - kGammaFloor) * fg;
                    const double l = lambda0 * fl;
                    // Amplitude matching total mass / saturation level:
                    // C Gamma(g+1) / l^(g+1) ~ amp.
                    double logc = std::log(amp) + (g + 1.0) * std::log(l) -
                                  log_gamma_t(g + 1.0);
                    logc = std::clamp(logc, -300.0, 300.0);
                    seeds.push_back({Params{logc, std::log(g - kGammaFloor),
                                            std::log(l)}});
                }
            }
            break;
        }
        case ModelKind::cumulative_lognormal: {
            double mu0 = std::log(std::max(mean_x, 1.0));
            double s0 = 0.8;
            if (mass > 0.0) {
                double m1 = 0.0, m2 = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double lx = std::log(xs[i]);
                    m1 += lx * q[i];
                    m2 += lx * lx * q[i];
                }
                mu0 = m1 / mass;
                s0 = std::sqrt(std::max(m2 / mass - mu0 * mu0, 2.5e-3));
            }
            s0 = std::clamp(s0, 0.05, 5.0);
            const double lscale = std::log(scale);
            for (double dm : {-lscale, 0.0, lscale}) {
                for (double fs : factors) {
                    seeds.push_back({Params{std::log(y_top), mu0 + dm,
                                            std::log(std::clamp(s0 * fs, 0.01, 10.0))}});
                }
            }
            break;
        }
        case ModelKind::truncated_powerlaw: {
            // log-log regression of positive increments for the exponent.
            double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0, cnt = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (q[i] > 0.0) {
                    const double lx = std::log(xs[i]);
                    const double ly = std::log(q[i]);
                    sx += lx;
                    sy += ly;
                    sxx += lx * lx;
                    sxy += lx * ly;
                    cnt += 1.0;
                }
            }
            double alpha0 = 1.0;
            if (cnt >= 2.0) {
                const double denom = cnt * sxx - sx * sx;
                if (std::abs(denom) > 1e-12) {
                    alpha0 = std::clamp(-(cnt * sxy - sx * sy) / denom, 0.05, 8.0);
                }
            }
            const double c0 = std::max(
                mass > 0.0 ? mass / std::max(1.0, std::log(static_cast<double>(n) + 1.0))
                           : y_top,
                1e-12);
            const double s00 = std::max(1e-4 * y_top, 1e-12);
            for (double fa : factors) {
                for (double fs : factors) {
                    seeds.push_back(
                        {Params{std::log(c0), std::log(std::clamp(alpha0 * fa, 0.01, 20.0)),
                                std::log(s00 * fs)}});
                }
            }
            break;
        }
    }
    return seeds;
}

struct LmOutcome {
    Params u{};
    double rss = kInf;
    bool converged = false;
    int iterations = 0;
    bool valid = false;
};

double rss_of(ModelKind m, const Params& u, std::span<const double> xs,
              std::span<const double> ys) {
    double rss = 0.0;
    try {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double f = model_eval_logspace(m, u, xs[i], nullptr);
            if (!std::isfinite(f)) return kInf;
            rss += (f - ys[i]) * (f - ys[i]);
        }
    } catch (const Error&) {
        // Parameter corners can defeat the special-function kernels; the
        // optimizer treats such points as off-limits rather than fatal.
        return kInf;
    }
    return rss;
}

LmOutcome lm_minimize(ModelKind m, Params u, std::span<const double> xs,
                      std::span<const double> ys, const FitOptions& opts) {
    const std::size_t n = xs.size();
    LmOutcome out;

    double rss = rss_of(m, u, xs, ys);
    if (!std::isfinite(rss)) return out;

    double mu = 1e-3;
    Eigen::Matrix3d A;
    Eigen::Vector3d gvec;
    std::vector<double> f(n);
    std::vector<std::array<double, 3>> J(n);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        out.iterations = iter + 1;

        bool finite = true;
        try {
            for (std::size_t i = 0; i < n; ++i) {
                Params grad;
                f[i] = model_eval_logspace(m, u, xs[i], &grad);
                J[i] = grad;
                if (!std::isfinite(f[i]) || !std::isfinite(grad[0]) ||
                    !std::isfinite(grad[1]) || !std::isfinite(grad[2])) {
                    finite = false;
                    break;
                }
            }
        } catch (const Error&) {
            finite = false;
        }
        if (!finite) return out;  // diverged start

        A.setZero();
        gvec.setZero();
        for (std::size_t i = 0; i < n; ++i) {
            const double r = f[i] - ys[i];
            for (int a = 0; a < 3; ++a) {
                gvec(a) += J[i][a] * r;
                for (int b = a; b < 3; ++b) A(a, b) += J[i][a] * J[i][b];
            }
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < a; ++b) A(a, b) = A(b, a);
        }

        // RSS gradient is 2 J^T r.
        if ((2.0 * gvec).norm() <= opts.grad_tol) {
            out.u = u;
            out.rss = rss;
            out.converged = true;
            out.valid = true;
            return out;
        }

        bool stepped = false;
        for (int damp = 0; damp < 25; ++damp) {
            Eigen::Matrix3d M = A;
            for (int a = 0; a < 3; ++a) {
                M(a, a) += mu * std::max(A(a, a), 1e-12);
            }
            const Eigen::Vector3d delta = M.ldlt().solve(-gvec);
            Params u_try{u[0] + delta(0), u[1] + delta(1), u[2] + delta(2)};
            const double rss_try = rss_of(m, u_try, xs, ys);
            if (std::isfinite(rss_try) && rss_try <= rss) {
                const double drop = rss - rss_try;
                u = u_try;
                rss = rss_try;
                mu = std::max(mu / 3.0, 1e-12);
                stepped = true;
                if (drop <= opts.rel_tol * std::max(rss, 1e-300)) {
                    out.u = u;
                    out.rss = rss;
                    out.converged = true;
                    out.valid = true;
                    return out;
                }
                break;
            }
            mu *= 10.0;
            if (mu > 1e14) break;
        }
        if (!stepped) {
            // No downhill direction at any damping; accept as a stall point.
            out.u = u;
            out.rss = rss;
            out.converged = (2.0 * gvec).norm() <= opts.grad_tol;
            out.valid = true;
            return out;
        }
    }
    // Iteration budget exhausted without meeting a convergence criterion.
    out.u = u;
    out.rss = rss;
    out.converged = false;
    out.valid = true;
    return out;
}

}  // namespace

FitResult fit(ModelKind m, std::span<const double> xs,
              std::span<const double> ys, const FitOptions& opts) {
    if (xs.size() != ys.size()) {
        throw DimensionMismatch("fit: xs and ys differ in length");
    }
    const std::size_t n = xs.size();
    if (static_cast<long long>(n) < kModelParamCount + 2) {
        throw InsufficientData("fit: needs at least " +
                               std::to_string(kModelParamCount + 2) +
                               " data points");
    }
    for (double x : xs) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw DomainError("fit: x grid must be positive and finite");
        }
    }

    double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) /
                    static_cast<double>(n);
    double tss = 0.0;
    for (double y : ys) tss += (y - mean_y) * (y - mean_y);

    const auto seeds = make_seeds(m, xs, ys, opts.multistart_scale);

    LmOutcome best;
    for (const auto& seed : seeds) {
        const LmOutcome cand = lm_minimize(m, seed.u, xs, ys, opts);
        if (!cand.valid || !cand.converged) continue;
        if (cand.rss < best.rss) best = cand;
    }
    if (!best.valid || !best.converged) {
        throw AllStartsFailed(
            std::string("fit: every start diverged or hit the iteration "
                        "budget for ") +
            to_string(m));
    }

    FitResult result;
    result.model = m;
    result.params = from_log_params(m, best.u);
    result.rss = best.rss;
    result.converged = best.converged;
    result.n_iterations = best.iterations;
    result.xs.assign(xs.begin(), xs.end());
    result.ys.assign(ys.begin(), ys.end());
    result.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.residuals[i] =
            model_eval_logspace(m, best.u, xs[i], nullptr) - ys[i];
    }
    result.log_residuals.assign(n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
        const double fitted = ys[i] + result.residuals[i];
        if (ys[i] > 0.0 && fitted > 0.0) {
            result.log_residuals[i] = std::log(ys[i]) - std::log(fitted);
        }
    }
    result.r2 = tss > 0.0 ? 1.0 - best.rss / tss
                          : (best.rss == 0.0 ? 1.0 : -kInf);
    result.aic = best.rss > 0.0
                     ? aic(best.rss, static_cast<long long>(n), kModelParamCount)
                     : -kInf;
    return result;
}

double aic(double rss, long long n, int k) {
    if (!(rss > 0.0) || !std::isfinite(rss)) {
        throw DomainError("aic: rss must be finite and positive");
    }
    if (n <= k) throw DomainError("aic: requires n > k");
    return static_cast<double>(n) *
               std::log(rss / static_cast<double>(n)) +
           2.0 * static_cast<double>(k);
}

Comparison compare(std::span<const FitResult> fits) {
    if (fits.empty()) throw DomainError("compare: needs at least one fit");
    const auto& ref = fits.front();
    for (const auto& f : fits) {
        if (f.xs != ref.xs || f.ys != ref.ys) {
            throw MismatchedData("compare: fits ran on different data");
        }
    }
    double gamma_aic = kNaN;
    for (const auto& f : fits) {
        if (f.model == ModelKind::integrated_gamma) gamma_aic = f.aic;
    }
    Comparison table;
    const FitResult* best = &ref;
    for (const auto& f : fits) {
        ComparisonRow row;
        row.model = f.model;
        row.r2 = f.r2;
        row.aic = f.aic;
        row.converged = f.converged;
        row.delta_aic = std::isnan(gamma_aic) ? kNaN : gamma_aic - f.aic;
        table.rows.push_back(row);
        if (f.aic < best->aic) best = &f;
    }
    table.preferred = best->model;
    return table;
}

Comparison compare(std::initializer_list<FitResult> fits) {
    return compare(std::span<const FitResult>(fits.begin(), fits.size()));
}

LogResiduals log_residuals(const FitResult& fit, std::span<const double> ys) {
    if (ys.size() != fit.residuals.size()) {
        throw DimensionMismatch("log_residuals: length mismatch with fit");
    }
    LogResiduals out;
    out.values.assign(ys.size(), kNaN);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double fitted = fit.ys[i] + fit.residuals[i];
        if (ys[i] > 0.0 && fitted > 0.0) {
            out.values[i] = std::log(ys[i]) - std::log(fitted);
        } else {
            out.masked.push_back(static_cast<int>(i));
        }
    }
    return out;
}

std::vector<double> residual_autocorr(std::span<const double> eps, int max_lag) {
    if (max_lag < 1) throw DomainError("residual_autocorr: max_lag must be >= 1");
    const long long n = static_cast<long long>(eps.size());
    if (n < max_lag + 2) {
        throw SeriesTooShort("residual_autocorr: series shorter than max_lag + 2");
    }
    const double mean = std::accumulate(eps.begin(), eps.end(), 0.0) /
                        static_cast<double>(n);
    double c0 = 0.0;
    for (double e : eps) c0 += (e - mean) * (e - mean);
    if (c0 <= 0.0) {
        throw DomainError("residual_autocorr: zero variance series");
    }
    std::vector<double> acf(max_lag);
    const double var = c0 / static_cast<double>(n);
    for (int lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (long long t = 0; t + lag < n; ++t) {
            c += (eps[t] - mean) * (eps[t + lag] - mean);
        }
        acf[lag - 1] = c / static_cast<double>(n - lag) / var;
    }
    return acf;
}

LogSlope logslope_diagnostic(const SideProfile& q) {
    const int K = static_cast<int>(q.q.size());
    LogSlope out;
    out.g.assign(K, kNaN);

    int start = -1;
    for (int i = 0; i <= K; ++i) {
        const bool positive = i < K && q.q[i] > 0.0;
        if (positive) {
            if (start < 0) start = i;
        } else if (start >= 0) {
            if (i - start >= 3) out.runs.emplace_back(start, i - start);
            start = -1;
        }
    }
    if (out.runs.empty()) {
        throw TooSparse("logslope_diagnostic: needs >= 3 consecutive nonzero bins");
    }

    // Central differences of ln q at interior points of each run. The
    // regressor for the gamma/x term is the matching central difference of
    // ln x, which makes the estimate exact on noise-free gamma profiles.
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    long long points = 0;
    for (auto [s, len] : out.runs) {
        for (int i = s + 1; i < s + len - 1; ++i) {
            const double x = static_cast<double>(i + 1);  // bin index, 1-based
            const double gi =
                0.5 * (std::log(q.q[i + 1]) - std::log(q.q[i - 1]));
            out.g[i] = gi;
            const double t = 0.5 * (std::log(x + 1.0) - std::log(x - 1.0));
            // design (t, -1)
            s11 += t * t;
            s12 += -t;
            s22 += 1.0;
            b1 += t * gi;
            b2 += -gi;
            ++points;
        }
    }
    if (points < 2) {
        throw TooSparse("logslope_diagnostic: not enough interior points");
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) < 1e-14) {
        throw TooSparse("logslope_diagnostic: degenerate regression design");
    }
    out.gamma_hat = (s22 * b1 - s12 * b2) / det;
    out.lambda_hat = (s11 * b2 - s12 * b1) / det;
    return out;
}

double argmin_mid(const BookSnapshot& snap) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& l : snap.bids) {
        if (l.size > 0.0) pts.emplace_back(l.price, l.size);
    }
    for (const auto& l : snap.asks) {
        if (l.size > 0.0) pts.emplace_back(l.price, l.size);
    }
    if (pts.size() < 2) {
        throw EmptySide("argmin_mid: needs at least two priced levels");
    }
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> distinct;
    for (const auto& [p, w] : pts) {
        if (!distinct.empty() && distinct.back().first == p) {
            distinct.back().second += w;
        } else {
            distinct.emplace_back(p, w);
        }
    }
    const double total = std::accumulate(
        distinct.begin(), distinct.end(), 0.0,
        [](double s, const auto& q2) { return s + q2.second; });
    double left = 0.0;
    double best_imb = kInf;
    std::size_t best_b = 0;
    for (std::size_t b = 0; b + 1 < distinct.size(); ++b) {
        left += distinct[b].second;
        const double imb = std::abs(left - (total - left));
        if (imb <= best_imb) {
            best_imb = imb;
            best_b = b;
        }
    }
    return 0.5 * (distinct[best_b].first + distinct[best_b + 1].first);
}

}  // namespace lobgeom
