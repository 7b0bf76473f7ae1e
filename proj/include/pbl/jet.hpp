#pragma once

#include <array>
#include <cmath>

namespace pbl {

/// Truncated Taylor series c[k] = f^(k)(t0)/k! for k <= N.
template <int N>
struct Jet {
    std::array<double, N + 1> c{};

    static Jet variable(double t0) {
        Jet j;
        j.c[0] = t0;
        if constexpr (N >= 1) j.c[1] = 1.0;
        return j;
    }
    static Jet constant(double v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    /// k-th derivative value
    double d(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }
};

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] + b.c[k];
    return r;
}
template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] - b.c[k];
    return r;
}
template <int N>
Jet<N> operator*(double s, const Jet<N>& a) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = s * a.c[k];
    return r;
}
template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k)
        for (int i = 0; i <= k; ++i) r.c[k] += a.c[i] * b.c[k - i];
    return r;
}
template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
        r.c[k] = s / b.c[0];
    }
    return r;
}
template <int N>
Jet<N> exp(const Jet<N>& a) {
    // r' = a' r
    Jet<N> r;
    r.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += i * a.c[i] * r.c[k - i];
        r.c[k] = s / k;
    }
    return r;
}

} // namespace pbl
