#pragma once

// Shared test oracles. Everything in here is deliberately independent of the
// implementation paths it is used to check: quadrature instead of series /
// continued fractions, Stirling instead of Lanczos, BFS instead of spectral
// connectivity, two-pass instead of streaming moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (G7, K15) quadrature
// ---------------------------------------------------------------------------

namespace gk {

// Nodes/weights for the 15-point Kronrod rule with embedded 7-point Gauss rule,
// on [-1, 1]. Values from the QUADPACK tables.
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Estimate {
    double value;
    double error;
};

template <typename F>
Estimate kronrod15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double result_g = fc * wg[3];
    double result_k = fc * wgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * xgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        result_k += wgk[j] * (f1 + f2);
        if (j % 2 == 1) result_g += wg[j / 2] * (f1 + f2);
    }
    result_g *= h;
    result_k *= h;
    return {result_k, std::abs(result_k - result_g)};
}

}  // namespace gk

// Adaptive bisection on top of K15 until the summed error estimate meets the
// requested tolerance relative to the accumulated integral.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-13,
                 int max_intervals = 4000) {
    if (a == b) return 0.0;
    struct Seg {
        double a, b, value, error;
    };
    auto mk = [&](double lo, double hi) {
        auto e = gk::kronrod15(f, lo, hi);
        return Seg{lo, hi, e.value, e.error};
    };
    std::vector<Seg> segs{mk(a, b)};
    for (int iter = 0; iter < max_intervals; ++iter) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        const double scale = std::max(std::abs(total), 1e-300);
        if (err <= rel_tol * scale || segs[worst].error == 0.0) return total;
        Seg s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        segs[worst] = mk(s.a, mid);
        segs.push_back(mk(mid, s.b));
    }
    double total = 0.0;
    for (const auto& s : segs) total += s.value;
    return total;
}

// ---------------------------------------------------------------------------
// log-gamma via Stirling's series with argument shifting
// ---------------------------------------------------------------------------

// B_{2n}/(2n(2n-1)) coefficients of the asymptotic series.
inline double lgamma_stirling(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("lgamma_stirling: x <= 0");
    static const double coef[] = {
        1.0 / 12.0,      -1.0 / 360.0,      1.0 / 1260.0,    -1.0 / 1680.0,
        1.0 / 1188.0,    -691.0 / 360360.0, 1.0 / 156.0,     -3617.0 / 122400.0,
        43867.0 / 244188.0};
    double shift = 0.0;
    while (x < 20.0) {
        shift -= std::log(x);
        x += 1.0;
    }
    const double half_log_two_pi = 0.91893853320467274178;
    double series = 0.0;
    double xpow = 1.0 / x;
    const double x2 = 1.0 / (x * x);
    for (double c : coef) {
        series += c * xpow;
        xpow *= x2;
    }
    return shift + (x - 0.5) * std::log(x) - x + half_log_two_pi + series;
}

// ---------------------------------------------------------------------------
// Regularized lower incomplete gamma by quadrature
// ---------------------------------------------------------------------------

// P(a, z) = (1/Gamma(a)) * int_0^z t^{a-1} e^{-t} dt. For a < 1 the integrand
// is singular at 0; substituting t = u^{1/a} removes the singularity:
//   int_0^z t^{a-1} e^{-t} dt = (1/a) int_0^{z^a} exp(-u^{1/a}) du.
inline double reg_lower_gamma_quad(double a, double z, double rel_tol = 1e-13) {
    if (z <= 0.0) return 0.0;
    const double lg = lgamma_stirling(a);
    if (a < 1.0) {
        const double inv_a = 1.0 / a;
        const double upper = std::pow(z, a);
        const double raw = integrate(
            [&](double u) { return u > 0.0 ? std::exp(-std::pow(u, inv_a)) : 1.0; },
            0.0, upper, rel_tol);
        return raw * inv_a * std::exp(-lg);
    }
    // Integrate the regularized integrand directly; split at the mode so the
    // adaptive rule starts with the peak bracketed.
    auto g = [&](double t) {
        if (t <= 0.0) return 0.0;
        return std::exp((a - 1.0) * std::log(t) - t - lg);
    };
    const double mode = a - 1.0;
    if (mode > 0.0 && mode < z) {
        return integrate(g, 0.0, mode, rel_tol) + integrate(g, mode, z, rel_tol);
    }
    return integrate(g, 0.0, z, rel_tol);
}

// Unregularized form; overflows for large a exactly where Gamma(a) does.
// The integrand is scaled by its maximum so the quadrature never sums
// denormals even when the value itself is deep in the tail.
inline double lower_gamma_quad(double a, double z, double rel_tol = 1e-13) {
    if (z <= 0.0) return 0.0;
    if (a < 1.0) {
        return reg_lower_gamma_quad(a, z, rel_tol) * std::exp(lgamma_stirling(a));
    }
    const double t_peak = std::min(z, a - 1.0);
    const double log_max =
        t_peak > 0.0 ? (a - 1.0) * std::log(t_peak) - t_peak : 0.0;
    auto g = [&](double t) {
        if (t <= 0.0) return 0.0;
        return std::exp((a - 1.0) * std::log(t) - t - log_max);
    };
    double raw;
    if (t_peak > 0.0 && t_peak < z) {
        raw = integrate(g, 0.0, t_peak, rel_tol) + integrate(g, t_peak, z, rel_tol);
    } else {
        raw = integrate(g, 0.0, z, rel_tol);
    }
    return raw * std::exp(log_max);
}

// Standard normal CDF by quadrature from 0 (plus the exact half).
inline double std_normal_cdf_quad(double z) {
    const double inv_sqrt_two_pi = 0.39894228040143267794;
    const double body = integrate(
        [&](double t) { return inv_sqrt_two_pi * std::exp(-0.5 * t * t); },
        0.0, std::abs(z), 1e-14);
    return z >= 0.0 ? 0.5 + body : 0.5 - body;
}

// ---------------------------------------------------------------------------
// Small statistics helpers
// ---------------------------------------------------------------------------

inline double two_pass_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("variance needs >= 2 values");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size());
}

inline double median_sorted_copy(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty set");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double gini(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double sum = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum += xs[i];
        weighted += (static_cast<double>(i) + 1.0) * xs[i];
    }
    if (sum == 0.0) return 0.0;
    return (2.0 * weighted) / (n * sum) - (n + 1.0) / n;
}

// BFS connectivity over an edge list.
inline bool bfs_connected(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n <= 1) return true;
    std::vector<std::vector<int>> adj(n);
    for (auto [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int visited = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : adj[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++visited;
                q.push(w);
            }
        }
    }
    return visited == n;
}

}  // namespace oracle
