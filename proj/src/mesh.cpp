#include "pbl/mesh.hpp"

#include "pbl/errors.hpp"
#include "pbl/jet.hpp"

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdint>

namespace pbl {

namespace {

void check_nodes(const std::vector<double>& v, const char* name) {
    if (v.size() < 4) throw ConfigError(fmt::format("grid axis {} needs at least 4 nodes", name));
    if (v.front() != 0.0) throw ConfigError(fmt::format("grid axis {} must start at 0", name));
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] > v[k - 1]) || !std::isfinite(v[k]))
            throw ConfigError(fmt::format("grid axis {} is not strictly increasing at node {}", name, k));
    }
}

double max_gap(const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) m = std::max(m, v[k] - v[k - 1]);
    return m;
}

} // namespace

Grid::Grid(std::vector<double> x, std::vector<double> y, double y_max)
    : x_(std::move(x)), y_(std::move(y)), y_max_(y_max) {
    check_nodes(x_, "X");
    check_nodes(y_, "Y");
}

double Grid::max_dx() const { return max_gap(x_); }
double Grid::max_dy() const { return max_gap(y_); }

std::vector<double> Grid::layer_y(double eps) const {
    if (!(eps > 0.0)) throw DomainError("layer coordinates need eps > 0");
    std::vector<double> out(y_.size());
    double s = 1.0 / std::sqrt(eps);
    for (std::size_t j = 0; j < y_.size(); ++j) out[j] = y_[j] * s;
    return out;
}

std::vector<double> uniform_nodes(double a, double b, int n) {
    if (n < 2 || !(b > a)) throw ConfigError("uniform_nodes: need n >= 2 and b > a");
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = a + (b - a) * k / (n - 1);
    v.back() = b;
    return v;
}

std::vector<double> tanh_wall_nodes(double a, double b, int n, double beta) {
    if (beta <= 1e-12) return uniform_nodes(a, b, n);
    std::vector<double> v(n);
    double tb = std::tanh(beta);
    for (int k = 0; k < n; ++k) {
        double s = static_cast<double>(k) / (n - 1);
        v[k] = a + (b - a) * (1.0 - std::tanh(beta * (1.0 - s)) / tb);
    }
    v.front() = a;
    v.back() = b;
    return v;
}

std::vector<double> tanh_two_sided_nodes(double a, double b, int n, double beta) {
    if (beta <= 1e-12) return uniform_nodes(a, b, n);
    std::vector<double> v(n);
    double tb = std::tanh(beta);
    for (int k = 0; k < n; ++k) {
        double s = static_cast<double>(k) / (n - 1);
        v[k] = a + (b - a) * 0.5 * (1.0 + std::tanh(beta * (2.0 * s - 1.0)) / tb);
    }
    v.front() = a;
    v.back() = b;
    return v;
}

double tanh_beta_for_half(double extent, double target) {
    if (target >= 0.5 * extent) return 0.0;
    auto f = [&](double b) { return extent * (1.0 - std::tanh(0.5 * b) / std::tanh(b)) - target; };
    double lo = 1e-6, hi = 60.0;
    if (f(hi) > 0.0) return hi;
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
    // slightly stronger clustering than the root so the requirement holds
    return 0.5 * (r.first + r.second) * (1.0 + 1e-9);
}

GridPtr build_grid(const GridSpec& s) {
    if (!(s.L > 0.0) || !(s.Y_max > 0.0) || !(s.y_max > 0.0))
        throw ConfigError("build_grid: extents must be positive");
    if (s.nx < 8 || s.ny < 8) throw ConfigError("build_grid: node counts must be >= 8");
    auto x = uniform_nodes(0.0, s.L, s.nx);
    std::vector<double> y;
    if (s.stretch.kind == StretchKind::uniform) {
        y = uniform_nodes(0.0, s.Y_max, s.ny);
    } else {
        if (!(s.stretch.eps_min > 0.0)) throw ConfigError("build_grid: eps_min must be positive");
        double beta = tanh_beta_for_half(s.Y_max, 4.0 * std::sqrt(s.stretch.eps_min));
        y = tanh_wall_nodes(0.0, s.Y_max, s.ny, beta);
    }
    return std::make_shared<const Grid>(std::move(x), std::move(y), s.y_max);
}

GridPtr make_grid(std::vector<double> x, std::vector<double> y, double y_max) {
    return std::make_shared<const Grid>(std::move(x), std::move(y), y_max);
}

GridSpec refined(const GridSpec& s) {
    GridSpec r = s;
    r.nx = 2 * s.nx - 1;
    r.ny = 2 * s.ny - 1;
    return r;
}

// ---------------------------------------------------------------- Field

Field::Field(GridPtr g, std::string label) : g_(std::move(g)), label_(std::move(label)) {
    if (!g_) throw UsageError("Field: null grid");
    v_.assign(g_->size(), 0.0);
}

Field::Field(GridPtr g, std::vector<double> values, std::string label)
    : g_(std::move(g)), v_(std::move(values)), label_(std::move(label)) {
    if (!g_) throw UsageError("Field: null grid");
    if (v_.size() != g_->size()) throw UsageError("Field: value count does not match grid");
}

Field Field::sample(GridPtr g, const std::function<double(double, double)>& f, std::string label) {
    Field out(std::move(g), std::move(label));
    const Grid& gr = out.grid();
    for (int i = 0; i < gr.nx(); ++i)
        for (int j = 0; j < gr.ny(); ++j) out(i, j) = f(gr.x(i), gr.y(j));
    return out;
}

std::vector<double> Field::row(int j) const {
    std::vector<double> r(g_->nx());
    for (int i = 0; i < g_->nx(); ++i) r[i] = (*this)(i, j);
    return r;
}

void Field::check_finite() const {
    for (std::size_t k = 0; k < v_.size(); ++k) {
        if (!std::isfinite(v_[k])) {
            int i = static_cast<int>(k / g_->ny()), j = static_cast<int>(k % g_->ny());
            throw DomainError(fmt::format("field '{}' is not finite at (X={}, Y={})", label_, g_->x(i), g_->y(j)));
        }
    }
}

static void same_grid(const Field& a, const Field& b) {
    if (a.grid_ptr() != b.grid_ptr() && !a.grid().same_nodes(b.grid()))
        throw UsageError("field arithmetic on different grids");
}

Field& Field::operator+=(const Field& o) {
    same_grid(*this, o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
}
Field& Field::operator-=(const Field& o) {
    same_grid(*this, o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
}
Field& Field::operator*=(double s) {
    for (auto& v : v_) v *= s;
    return *this;
}
Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(const Field& a, const Field& b) {
    same_grid(a, b);
    Field r = a;
    for (std::size_t k = 0; k < a.values().size(); ++k) r[k] *= b[k];
    return r;
}

// ---------------------------------------------------------------- differences

std::vector<double> fd_weights(double z, const double* x, int n, int m) {
    // Fornberg (1988)
    std::vector<double> c(static_cast<std::size_t>(n) * (m + 1), 0.0);
    auto C = [&](int i, int k) -> double& { return c[static_cast<std::size_t>(i) * (m + 1) + k]; };
    double c1 = 1.0, c4 = x[0] - z;
    C(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
                C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
            C(j, 0) = c4 * C(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = C(i, m);
    return w;
}

std::vector<Stencil> derivative_stencils(const std::vector<double>& x, int order, Scheme scheme) {
    const int n = static_cast<int>(x.size());
    if (order != 1 && order != 2) throw UsageError("diff: order must be 1 or 2");
    if (n < 4) throw UsageError("diff: need at least 4 nodes");
    std::vector<Stencil> st(n);
    for (int i = 0; i < n; ++i) {
        Stencil s;
        if (order == 1) {
            s.n = 3;
            if (scheme == Scheme::biased)
                s.first = i <= 1 ? 0 : i - 2;
            else
                s.first = std::clamp(i - 1, 0, n - 3);
        } else {
            if (i == 0) {
                s.first = 0;
                s.n = 4;
            } else if (i == n - 1) {
                s.first = n - 4;
                s.n = 4;
            } else {
                s.first = i - 1;
                s.n = 3;
            }
        }
        auto w = fd_weights(x[i], x.data() + s.first, s.n, order);
        for (int k = 0; k < s.n; ++k) s.w[k] = w[k];
        st[i] = s;
    }
    return st;
}

std::vector<double> diff1d(const std::vector<double>& nodes, const std::vector<double>& f, int order,
                           Scheme scheme) {
    if (f.size() != nodes.size()) throw UsageError("diff1d: size mismatch");
    auto st = derivative_stencils(nodes, order, scheme);
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        double s = 0.0;
        for (int k = 0; k < st[i].n; ++k) s += st[i].w[k] * f[st[i].first + k];
        out[i] = s;
    }
    return out;
}

Field diff(const Field& f, Axis axis, int order, Scheme scheme) {
    if (axis != Axis::x && axis != Axis::y) throw UsageError("diff: invalid axis");
    const Grid& g = f.grid();
    Field out(f.grid_ptr(), f.label() + (axis == Axis::x ? "_X" : "_Y") + (order == 2 ? "2" : ""));
    const int nx = g.nx(), ny = g.ny();
    if (axis == Axis::y) {
        auto st = derivative_stencils(g.y(), order, Scheme::centered);
        for (int i = 0; i < nx; ++i) {
            const double* c = f.column(i);
            double* o = out.column(i);
            for (int j = 0; j < ny; ++j) {
                const Stencil& s = st[j];
                double acc = 0.0;
                for (int k = 0; k < s.n; ++k) acc += s.w[k] * c[s.first + k];
                o[j] = acc;
            }
        }
    } else {
        auto st = derivative_stencils(g.x(), order, order == 1 ? scheme : Scheme::centered);
        for (int i = 0; i < nx; ++i) {
            const Stencil& s = st[i];
            double* o = out.column(i);
            for (int k = 0; k < s.n; ++k) {
                const double* c = f.column(s.first + k);
                double w = s.w[k];
                for (int j = 0; j < ny; ++j) o[j] += w * c[j];
            }
        }
    }
    return out;
}

Eigen::SparseMatrix<double> derivative_matrix(const Grid& g, Axis axis, int order) {
    const int nx = g.nx(), ny = g.ny();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(g.size() * 4);
    if (axis == Axis::y) {
        auto st = derivative_stencils(g.y(), order);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                for (int k = 0; k < st[j].n; ++k)
                    t.emplace_back(static_cast<int>(g.index(i, j)), static_cast<int>(g.index(i, st[j].first + k)),
                                   st[j].w[k]);
    } else {
        auto st = derivative_stencils(g.x(), order);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                for (int k = 0; k < st[i].n; ++k)
                    t.emplace_back(static_cast<int>(g.index(i, j)), static_cast<int>(g.index(st[i].first + k, j)),
                                   st[i].w[k]);
    }
    Eigen::SparseMatrix<double> m(static_cast<int>(g.size()), static_cast<int>(g.size()));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// ---------------------------------------------------------------- quadrature

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double h = x[k + 1] - x[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    return w;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) s += 0.5 * (x[k + 1] - x[k]) * (f[k] + f[k + 1]);
    return s;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t k = 1; k < x.size(); ++k) out[k] = out[k - 1] + 0.5 * (x[k] - x[k - 1]) * (f[k] + f[k - 1]);
    return out;
}

std::vector<double> tail_trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t k = x.size() - 1; k-- > 0;) out[k] = out[k + 1] + 0.5 * (x[k + 1] - x[k]) * (f[k] + f[k + 1]);
    return out;
}

double integrate(const Field& f) {
    const Grid& g = f.grid();
    auto wx = trapezoid_weights(g.x()), wy = trapezoid_weights(g.y());
    double s = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
        const double* c = f.column(i);
        double si = 0.0;
        for (int j = 0; j < g.ny(); ++j) si += wy[j] * c[j];
        s += wx[i] * si;
    }
    return s;
}

static std::vector<double> restricted_weights(const std::vector<double>& x, double a, double b) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        if (x[k] >= a && x[k + 1] <= b) {
            double h = x[k + 1] - x[k];
            w[k] += 0.5 * h;
            w[k + 1] += 0.5 * h;
        }
    }
    return w;
}

double integrate(const Field& f, const Region& r) {
    const Grid& g = f.grid();
    auto wx = restricted_weights(g.x(), r.x0, r.x1), wy = restricted_weights(g.y(), r.y0, r.y1);
    double s = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
        if (wx[i] == 0.0) continue;
        const double* c = f.column(i);
        double si = 0.0;
        for (int j = 0; j < g.ny(); ++j) si += wy[j] * c[j];
        s += wx[i] * si;
    }
    return s;
}

double inner(const Field& a, const Field& b) { return integrate(a * b); }

double l2_norm(const Field& f) {
    f.check_finite();
    return std::sqrt(std::max(0.0, integrate(f * f)));
}

double sup_norm(const Field& f) {
    f.check_finite();
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::fabs(v));
    return m;
}

// ---------------------------------------------------------------- interpolation

CubicInterpolator::CubicInterpolator(std::vector<double> nodes, Extrapolation ext)
    : nodes_(std::move(nodes)), ext_(ext) {
    if (nodes_.size() < 4) throw UsageError("CubicInterpolator: need at least 4 nodes");
}

Stencil CubicInterpolator::weights(double t) const {
    const int n = static_cast<int>(nodes_.size());
    const double a = nodes_.front(), b = nodes_.back();
    const double tol = 1e-12 * std::max(1.0, std::fabs(b - a));
    Stencil s;
    if (t < a - tol || t > b + tol) {
        if (ext_ == Extrapolation::error) throw DomainError(fmt::format("interpolation point {} outside [{}, {}]", t, a, b));
        if (ext_ == Extrapolation::zero) return s;
        s.first = t < a ? 0 : n - 1;
        s.n = 1;
        s.w[0] = 1.0;
        return s;
    }
    t = std::clamp(t, a, b);
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    int k = static_cast<int>(it - nodes_.begin());
    if (k < n && nodes_[k] == t) {
        s.first = k;
        s.n = 1;
        s.w[0] = 1.0;
        return s;
    }
    // t in (nodes[k-1], nodes[k])
    s.first = std::clamp(k - 2, 0, n - 4);
    s.n = 4;
    auto w = fd_weights(t, nodes_.data() + s.first, 4, 0);
    for (int q = 0; q < 4; ++q) s.w[q] = w[q];
    return s;
}

double CubicInterpolator::operator()(const double* f, double t) const {
    Stencil s = weights(t);
    double v = 0.0;
    for (int k = 0; k < s.n; ++k) v += s.w[k] * f[s.first + k];
    return v;
}

Field resample(const Field& f, const GridPtr& target, Extrapolation ext) {
    const Grid& src = f.grid();
    const Grid& tg = *target;
    // pass 1: y
    std::vector<double> tmp(static_cast<std::size_t>(src.nx()) * tg.ny());
    {
        CubicInterpolator iy(src.y(), ext);
        std::vector<Stencil> st(tg.ny());
        for (int j = 0; j < tg.ny(); ++j) st[j] = iy.weights(tg.y(j));
        for (int i = 0; i < src.nx(); ++i) {
            const double* c = f.column(i);
            for (int j = 0; j < tg.ny(); ++j) {
                double v = 0.0;
                for (int k = 0; k < st[j].n; ++k) v += st[j].w[k] * c[st[j].first + k];
                tmp[static_cast<std::size_t>(i) * tg.ny() + j] = v;
            }
        }
    }
    Field out(target, f.label());
    CubicInterpolator ix(src.x(), ext);
    for (int i = 0; i < tg.nx(); ++i) {
        Stencil s = ix.weights(tg.x(i));
        double* o = out.column(i);
        for (int k = 0; k < s.n; ++k) {
            const double* c = tmp.data() + static_cast<std::size_t>(s.first + k) * tg.ny();
            for (int j = 0; j < tg.ny(); ++j) o[j] += s.w[k] * c[j];
        }
    }
    return out;
}

Bundle make_bundle(const Field& f, Scheme xscheme) {
    Bundle b;
    b.f = f;
    b.fx = diff(f, Axis::x, 1, xscheme);
    b.fy = diff(f, Axis::y, 1);
    b.fxx = diff(f, Axis::x, 2);
    b.fyy = diff(f, Axis::y, 2);
    return b;
}

Bundle zero_bundle(const GridPtr& g) {
    Field z(g);
    return Bundle{z, z, z, z, z};
}

Field slice_columns(const Field& f, const GridPtr& target, int offset) {
    const Grid& g = f.grid();
    if (target->ny() != g.ny() || offset < 0 || offset + target->nx() > g.nx())
        throw UsageError("slice_columns: target does not fit");
    Field out(target, f.label());
    for (int i = 0; i < target->nx(); ++i) std::copy(f.column(offset + i), f.column(offset + i) + g.ny(), out.column(i));
    return out;
}

Bundle slice_columns(const Bundle& b, const GridPtr& target, int offset) {
    return Bundle{slice_columns(b.f, target, offset), slice_columns(b.fx, target, offset),
                  slice_columns(b.fy, target, offset), slice_columns(b.fxx, target, offset),
                  slice_columns(b.fyy, target, offset)};
}

std::vector<double> extend_linear(const std::vector<double>& x, const std::vector<double>& f,
                                  const std::vector<double>& ext_x, int pre) {
    if (x.size() != f.size() || ext_x.size() != x.size() + pre || x.size() < 3)
        throw UsageError("extend_linear: size mismatch");
    if (pre == 0) return f;
    auto w = fd_weights(x[0], x.data(), 3, 1);
    const double s = w[0] * f[0] + w[1] * f[1] + w[2] * f[2];
    const double x0 = ext_x[pre];
    std::vector<double> out(ext_x.size());
    for (int i = 0; i < pre; ++i) out[i] = f[0] + s * (ext_x[i] - x0);
    std::copy(f.begin(), f.end(), out.begin() + pre);
    return out;
}

Field extend_columns_linear(const Field& f, const GridPtr& ext, int pre) {
    const Grid& g = f.grid();
    if (ext->ny() != g.ny() || ext->nx() != g.nx() + pre) throw UsageError("extend_columns_linear: grid mismatch");
    Field out(ext, f.label());
    std::vector<double> row(g.nx());
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) row[i] = f(i, j);
        auto e = extend_linear(g.x(), row, ext->x(), pre);
        for (int i = 0; i < ext->nx(); ++i) out(i, j) = e[i];
    }
    return out;
}

// ---------------------------------------------------------------- cutoffs

std::array<double, 4> cutoff(double s) {
    if (s <= 1.0) return {1.0, 0.0, 0.0, 0.0};
    if (s >= 2.0) return {0.0, 0.0, 0.0, 0.0};
    using J = Jet<3>;
    J t = J::variable(s - 1.0);
    J one = J::constant(1.0), zero = J::constant(0.0);
    J a = exp(zero - one / t);
    J b = exp(zero - one / (one - t));
    J chi = one - a / (a + b);
    return {chi.d(0), chi.d(1), chi.d(2), chi.d(3)};
}

double eta_delta(double Y, double delta) { return 1.0 - cutoff(Y / delta)[0]; }

// ---------------------------------------------------------------- weighted norms

void WeightedNormConfig::validate(double L) const {
    if (!(eps > 0.0)) throw DomainError("weighted norm: eps must be positive");
    if (!Us) throw UsageError("weighted norm: U_s field missing");
    if (weight == WeightKind::eta_delta) {
        double dmin = std::max(std::sqrt(L), std::pow(eps, 0.25));
        if (delta < dmin * (1.0 - 1e-12))
            throw DomainError(fmt::format("delta = {} below max(L^1/2, eps^1/4) = {}", delta, dmin));
    }
}

double WeightedNormConfig::weight_at(double X, double Y, double L) const {
    switch (weight) {
    case WeightKind::none: return 1.0;
    case WeightKind::omega: return L - X;
    case WeightKind::omega_tilde: return X * (L - X);
    case WeightKind::eta_delta: return eta_delta(Y, delta);
    }
    return 1.0;
}

QuotientNorms quotient_norms(const Field& G, const WeightedNormConfig& cfg) {
    const Grid& g = G.grid();
    cfg.validate(g.length());
    const Field& U = *cfg.Us;
    if (!g.same_nodes(U.grid())) throw UsageError("quotient_norms: G and U_s on different grids");
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            double u = U(i, j);
            // the wall row is zero up to rounding
            if (j == 0 ? u < -1e-12 : !(u > 0.0))
                throw DomainError(fmt::format("U_s = {} at (X={}, Y={}) is not positive", u, g.x(i), g.y(j)));
        }
    Field Gx = diff(G, Axis::x, 1), Gy = diff(G, Axis::y, 1);
    Field Gxx = diff(G, Axis::x, 2), Gyy = diff(G, Axis::y, 2), Gxy = diff(Gx, Axis::y, 1);
    Field a(G.grid_ptr()), b(G.grid_ptr());
    const double L = g.length();
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            double w = cfg.weight_at(g.x(i), g.y(j), L), u = std::max(0.0, U(i, j));
            a(i, j) = w * u * u * (Gx(i, j) * Gx(i, j) + Gy(i, j) * Gy(i, j));
            b(i, j) = w * u * (Gxx(i, j) * Gxx(i, j) + 2.0 * Gxy(i, j) * Gxy(i, j) + Gyy(i, j) * Gyy(i, j));
        }
    QuotientNorms q;
    q.X_sq = integrate(a);
    q.Y_sq = cfg.eps * integrate(b);
    q.X = std::sqrt(std::max(0.0, q.X_sq));
    q.Y = std::sqrt(std::max(0.0, q.Y_sq));
    return q;
}

ZNorm z_norm(const Field& U, const Field& V, double eps) {
    auto sq = [](const Field& f) { return integrate(f * f); };
    ZNorm z;
    z.l2 = std::sqrt(sq(U) + sq(V));
    double g2 = 0.0, h2 = 0.0;
    for (const Field* f : {&U, &V}) {
        Field fx = diff(*f, Axis::x, 1), fy = diff(*f, Axis::y, 1);
        g2 += sq(fx) + sq(fy);
        h2 += sq(diff(*f, Axis::x, 2)) + 2.0 * sq(diff(fx, Axis::y, 1)) + sq(diff(*f, Axis::y, 2));
    }
    z.grad = std::sqrt(g2);
    z.hess = std::sqrt(h2);
    z.total = z.l2 + std::sqrt(eps) * z.grad + std::pow(eps, 1.5) * z.hess;
    return z;
}

double HardyResult::constant() const {
    double d = parts[0] + parts[1];
    if (lhs == 0.0) return 0.0;
    return d > 0.0 ? lhs / d : INFINITY;
}

HardyResult hardy_probe(const std::vector<double>& Y, const std::vector<double>& H,
                        const std::vector<double>& Us, double xi, double eps) {
    if (!(xi > 0.0 && xi <= 1.0)) throw DomainError(fmt::format("hardy_probe: xi = {} outside (0, 1]", xi));
    if (H.size() != Y.size() || Us.size() != Y.size()) throw UsageError("hardy_probe: size mismatch");
    auto Hy = diff1d(Y, H, 1);
    std::vector<double> a(Y.size()), b(Y.size()), c(Y.size());
    for (std::size_t j = 0; j < Y.size(); ++j) {
        a[j] = H[j] * H[j];
        b[j] = Us[j] * Hy[j] * Hy[j];
        c[j] = Us[j] * Us[j] * H[j] * H[j];
    }
    HardyResult r;
    r.lhs = trapezoid(Y, a);
    r.parts[0] = xi * eps * trapezoid(Y, b);
    r.parts[1] = trapezoid(Y, c) / (xi * xi);
    return r;
}

} // namespace pbl
