#include "pbl/euler_base.hpp"

#include "pbl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace pbl {

std::string to_string(FlowKind k) {
    switch (k) {
    case FlowKind::shear: return "shear";
    case FlowKind::strain: return "strain";
    case FlowKind::harmonic: return "harmonic";
    }
    return "?";
}

FlowKind flow_kind_from_string(const std::string& s) {
    if (s == "shear") return FlowKind::shear;
    if (s == "strain") return FlowKind::strain;
    if (s == "harmonic" || s == "harmonic-perturbation") return FlowKind::harmonic;
    throw ConfigError(fmt::format("unknown flow kind '{}' (expected shear, strain or harmonic)", s));
}

EulerFlow::EulerFlow(FlowKind kind, FlowParams p) : kind_(kind), p_(p) {}

namespace {

// a-th derivative of cos(t)
double dcos(int a, double t) {
    switch (a & 3) {
    case 0: return std::cos(t);
    case 1: return -std::sin(t);
    case 2: return -std::cos(t);
    default: return std::sin(t);
    }
}
double dsinh(int b, double t) { return (b & 1) ? std::cosh(t) : std::sinh(t); }

} // namespace

EulerFlow EulerFlow::translated(double origin) const {
    EulerFlow f = *this;
    f.origin_ += origin;
    return f;
}

double EulerFlow::psi(double X, double Y, int a, int b) const {
    X += origin_;
    switch (kind_) {
    case FlowKind::shear: {
        if (a > 0) return 0.0;
        if (b == 0) return Y + p_.beta * (1.0 - std::exp(-Y));
        return u(X, Y, 0, b - 1);
    }
    case FlowKind::strain: {
        const double al = p_.alpha;
        if (a == 0 && b == 0) return (1.0 + al * X) * Y;
        if (a == 1 && b == 0) return al * Y;
        if (a == 0 && b == 1) return 1.0 + al * X;
        if (a == 1 && b == 1) return al;
        return 0.0;
    }
    case FlowKind::harmonic: {
        const double k = p_.k;
        double base = (a == 0 && b == 0) ? Y : (a == 0 && b == 1) ? 1.0 : 0.0;
        return base + p_.alpha / k * std::pow(k, a + b) * dcos(a, k * X) * dsinh(b, k * Y);
    }
    }
    return 0.0;
}

double EulerFlow::u(double X, double Y, int a, int b) const {
    if (kind_ == FlowKind::shear) {
        if (a > 0) return 0.0;
        if (b == 0) return 1.0 + p_.beta * std::exp(-Y);
        return p_.beta * ((b & 1) ? -1.0 : 1.0) * std::exp(-Y);
    }
    return psi(X, Y, a, b + 1);
}

double EulerFlow::v(double X, double Y, int a, int b) const {
    if (kind_ == FlowKind::shear) return 0.0;
    return -psi(X, Y, a + 1, b);
}

double EulerFlow::p(double X, double Y) const {
    if (kind_ == FlowKind::shear) return 0.0;
    double uu = u(X, Y), vv = v(X, Y);
    return -0.5 * (uu * uu + vv * vv);
}

double EulerFlow::pX(double X, double Y) const {
    if (kind_ == FlowKind::shear) return 0.0;
    return -(u(X, Y) * u(X, Y, 1, 0) + v(X, Y) * v(X, Y, 1, 0));
}

double EulerFlow::pY(double X, double Y) const {
    if (kind_ == FlowKind::shear) return 0.0;
    return -(u(X, Y) * u(X, Y, 0, 1) + v(X, Y) * v(X, Y, 0, 1));
}

double EulerFlow::feprime(double X, double Y) const { return lap_u(X, Y) / u(X, Y); }

double EulerFlow::fepp(double X, double Y) const {
    double uu = u(X, Y), uy = u(X, Y, 0, 1);
    double lap = lap_u(X, Y), lapy = u(X, Y, 2, 1) + u(X, Y, 0, 3);
    return (lapy * uu - lap * uy) / (uu * uu * uu);
}

double EulerFlow::bilap_psi(double X, double Y) const {
    return psi(X, Y, 4, 0) + 2.0 * psi(X, Y, 2, 2) + psi(X, Y, 0, 4);
}

EulerFlow make_flow(FlowKind kind, FlowParams params, double L, double Y_max) {
    if (!(L > 0.0) || !(Y_max > 0.0)) throw ConfigError("make_flow: extents must be positive");
    if (kind == FlowKind::harmonic && !(params.k > 0.0)) throw ConfigError("make_flow: harmonic wavenumber must be positive");
    EulerFlow f(kind, params);
    const int nx = 101, ny = 801;
    double lo = INFINITY, hi = -INFINITY, xlo = 0, ylo = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double X = L * i / (nx - 1), Y = Y_max * j / (ny - 1);
            double uu = f.u(X, Y);
            if (uu < lo) {
                lo = uu;
                xlo = X;
                ylo = Y;
            }
            hi = std::max(hi, uu);
        }
    if (!(lo > 0.0))
        throw DomainError(fmt::format("{} flow violates u_e > 0: u_e = {} at (X={}, Y={})", to_string(kind), lo, xlo, ylo));
    f.set_bounds(lo, hi);
    return f;
}

FeFields extract_feprime(const EulerFlow& flow, const GridPtr& grid) {
    FeFields r{Field::sample(grid, [&](double X, double Y) { return flow.feprime(X, Y); }, "Fe'"),
               Field::sample(grid, [&](double X, double Y) { return flow.fepp(X, Y); }, "Fe''")};
    return r;
}

EulerResidual euler_residual(const EulerFlow& flow, const GridPtr& grid) {
    Field u = Field::sample(grid, [&](double X, double Y) { return flow.u(X, Y); }, "u");
    Field v = Field::sample(grid, [&](double X, double Y) { return flow.v(X, Y); }, "v");
    Field p = Field::sample(grid, [&](double X, double Y) { return flow.p(X, Y); }, "p");
    Field ux = diff(u, Axis::x, 1), uy = diff(u, Axis::y, 1);
    Field vx = diff(v, Axis::x, 1), vy = diff(v, Axis::y, 1);
    Field px = diff(p, Axis::x, 1), py = diff(p, Axis::y, 1);
    EulerResidual r{u * ux + v * uy + px, u * vx + v * vy + py, ux + vy};
    r.momentum_x.set_label("r_x");
    r.momentum_y.set_label("r_y");
    r.divergence.set_label("r_div");
    return r;
}

} // namespace pbl
