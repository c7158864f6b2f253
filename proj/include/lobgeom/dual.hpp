#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace lobgeom {

// Forward-mode dual number carrying a fixed-width gradient. Used to obtain
// analytic Jacobians of model functions whose evaluation involves series,
// continued fractions, and special-function kernels.
template <std::size_t N>
struct Dual {
    double v = 0.0;
    std::array<double, N> d{};

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit by design (constants)
    Dual(double value, std::size_t seed_index) : v(value) { d[seed_index] = 1.0; }

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const double inv = 1.0 / o.v;
        for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
        v *= inv;
        return *this;
    }
};

template <std::size_t N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <std::size_t N>
Dual<N> operator-(const Dual<N>& a) {
    Dual<N> r;
    r.v = -a.v;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}

template <std::size_t N> bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.v < b.v; }
template <std::size_t N> bool operator>(const Dual<N>& a, const Dual<N>& b) { return a.v > b.v; }
template <std::size_t N> bool operator<=(const Dual<N>& a, const Dual<N>& b) { return a.v <= b.v; }
template <std::size_t N> bool operator>=(const Dual<N>& a, const Dual<N>& b) { return a.v >= b.v; }

template <std::size_t N>
Dual<N> exp(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::exp(a.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = r.v * a.d[i];
    return r;
}

template <std::size_t N>
Dual<N> log(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::log(a.v);
    const double inv = 1.0 / a.v;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = inv * a.d[i];
    return r;
}

template <std::size_t N>
Dual<N> sqrt(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::sqrt(a.v);
    const double inv = 0.5 / r.v;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = inv * a.d[i];
    return r;
}

template <std::size_t N>
Dual<N> fabs(const Dual<N>& a) {
    return a.v < 0.0 ? -a : a;
}

// pow restricted to positive base, which is all the model code needs.
template <std::size_t N>
Dual<N> pow(const Dual<N>& base, const Dual<N>& expo) {
    return exp(expo * log(base));
}

template <std::size_t N>
Dual<N> erfc(const Dual<N>& a) {
    Dual<N> r;
    r.v = std::erfc(a.v);
    const double slope = -2.0 / std::sqrt(M_PI) * std::exp(-a.v * a.v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = slope * a.d[i];
    return r;
}

// Scalar shims so templated kernels can be instantiated with plain double.
inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Dual<N>& x) { return x.v; }

using Dual3 = Dual<3>;

}  // namespace lobgeom
