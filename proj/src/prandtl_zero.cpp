#include "pbl/prandtl_zero.hpp"

#include "pbl/blasius.hpp"
#include "pbl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace pbl {

bool CompatReport::ok(double tol) const {
    return std::fabs(value_residual) <= tol && std::fabs(parabolic_residual) <= tol;
}

void InflowProfile::validate(const EulerFlow& flow, double far_tol) const {
    if (y.size() != U0P.size() || y.size() < 4) throw ConfigError("inflow: malformed profile");
    if (std::fabs(U0P.front()) > 1e-12) throw ConfigError(fmt::format("inflow: U(0) = {} is not 0", U0P.front()));
    for (std::size_t j = 1; j < y.size(); ++j)
        if (!(U0P[j] > 0.0)) throw ConfigError(fmt::format("inflow: U({}) = {} is not positive", y[j], U0P[j]));
    if (!(wall_shear > 0.0)) throw ConfigError("inflow: wall shear must be positive");
    double far = std::fabs(U0P.back() - flow.u(x_at, 0.0));
    if (far > far_tol) throw ConfigError(fmt::format("inflow: far value misses u_e({},0) by {}", x_at, far));
}

CompatReport compatibility_check(const EulerFlow& flow, const InflowProfile& in) {
    CompatReport r;
    r.value_residual = in.U0P.empty() ? 0.0 : in.U0P.front();
    r.parabolic_residual = in.wall_curvature + flow.u(in.x_at, 0.0) * flow.u(in.x_at, 0.0, 1, 0);
    r.far_residual = in.U0P.empty() ? 0.0 : in.U0P.back() - flow.u(in.x_at, 0.0);
    return r;
}

InflowProfile make_blasius_inflow(const EulerFlow& flow, const std::vector<double>& y, bool corner_correction,
                                  double x_at, double age) {
    if (!(age > 0.0)) throw ConfigError("blasius inflow: age must be positive");
    const Blasius& b = blasius();
    const double ue = flow.u(x_at, 0.0), ux = flow.u(x_at, 0.0, 1, 0);
    if (!(ue > 0.0)) throw ConfigError(fmt::format("blasius inflow: u_e({},0) = {} is not positive", x_at, ue));
    const double s = std::sqrt(ue / age);
    const double c = corner_correction ? -0.5 * ue * ux : 0.0;
    InflowProfile in;
    in.y = y;
    in.x_at = x_at;
    in.U0P.resize(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) in.U0P[j] = ue * b.fp(y[j] * s) + c * y[j] * y[j] * cutoff(y[j])[0];
    in.U0P.front() = 0.0;
    in.wall_shear = ue * s * b.wall_curvature();
    // f'''(0) = 0
    in.wall_curvature = 2.0 * c;
    in.source = corner_correction && c != 0.0 ? "blasius+corner" : "blasius";
    in.compat = compatibility_check(flow, in);
    return in;
}

InflowProfile load_inflow(const std::string& path, const EulerFlow& flow, const std::vector<double>& y) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("inflow: cannot open '{}'", path));
    std::vector<double> ys, us;
    std::string line;
    while (std::getline(is, line)) {
        auto p = line.find_first_not_of(" \t");
        if (p == std::string::npos || line[p] == '#') continue;
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) throw ConfigError(fmt::format("inflow: unparsable line '{}' in '{}'", line, path));
        ys.push_back(a);
        us.push_back(b);
    }
    if (ys.size() < 5) throw ConfigError("inflow: need at least 5 rows");
    if (ys.front() != 0.0) throw ConfigError("inflow: first y must be 0");
    for (std::size_t k = 1; k < ys.size(); ++k)
        if (!(ys[k] > ys[k - 1])) throw ConfigError("inflow: y column must be increasing");
    CubicInterpolator I(ys, Extrapolation::hold);
    InflowProfile in;
    in.y = y;
    in.U0P.resize(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) in.U0P[j] = I(us.data(), y[j]);
    {
        auto w1 = fd_weights(0.0, ys.data(), 5, 1), w2 = fd_weights(0.0, ys.data(), 5, 2);
        double s1 = 0.0, s2 = 0.0;
        for (int k = 0; k < 5; ++k) {
            s1 += w1[k] * us[k];
            s2 += w2[k] * us[k];
        }
        in.wall_shear = s1;
        in.wall_curvature = s2;
    }
    in.source = path;
    in.compat = compatibility_check(flow, in);
    return in;
}

GridPtr make_layer_grid(double L, double y_max, int nx, int ny) {
    if (!(L > 0.0) || !(y_max > 0.0)) throw ConfigError("layer grid: extents must be positive");
    if (nx < 8 || ny < 8) throw ConfigError("layer grid: node counts must be >= 8");
    return make_grid(uniform_nodes(0.0, L, nx), uniform_nodes(0.0, y_max, ny), y_max);
}

void derive_layer_parts(const EulerFlow& flow, PrandtlSolution& sol) {
    derive_layer_parts(flow, sol.u0p, sol.v0p, 0.0, sol.u0b, sol.v0b);
}

void derive_layer_parts(const EulerFlow& flow, const Field& u0p, const Field& v0p, double shift, Field& u0b,
                        Field& v0b) {
    const Grid& g = u0p.grid();
    u0b = Field(u0p.grid_ptr(), "u0b");
    v0b = Field(u0p.grid_ptr(), "v0b");
    const int N = g.ny();
    for (int i = 0; i < g.nx(); ++i) {
        const double x = g.x(i) - shift, ue = flow.u(x, 0.0), vy = flow.v(x, 0.0, 0, 1);
        const double* u = u0p.column(i);
        const double* v = v0p.column(i);
        double* ub = u0b.column(i);
        double* vb = v0b.column(i);
        const double c = -(v[N - 1] - g.y(N - 1) * vy);
        for (int j = 0; j < N; ++j) {
            ub[j] = u[j] - ue;
            vb[j] = v[j] - g.y(j) * vy + c;
        }
    }
}

static void finish(const EulerFlow& flow, PrandtlSolution& sol) {
    const Grid& g = *sol.grid;
    sol.ue.resize(g.nx());
    sol.p0px.resize(g.nx());
    for (int i = 0; i < g.nx(); ++i) {
        sol.ue[i] = flow.u(g.x(i), 0.0);
        sol.p0px[i] = -sol.ue[i] * flow.u(g.x(i), 0.0, 1, 0);
    }
    derive_layer_parts(flow, sol);
    Field uy = diff(sol.u0p, Axis::y, 1);
    sol.wall_shear.resize(g.nx());
    for (int i = 0; i < g.nx(); ++i) sol.wall_shear[i] = uy(i, 0);
    sol.m0 = *std::min_element(sol.wall_shear.begin(), sol.wall_shear.end());
    // y0: largest y with u_y >= m0/2 on [0, y0] at every station
    int jmax = g.ny() - 1;
    for (int i = 0; i < g.nx(); ++i) {
        int j = 0;
        while (j + 1 < g.ny() && uy(i, j + 1) >= 0.5 * sol.m0) ++j;
        jmax = std::min(jmax, j);
    }
    sol.y0 = g.y(jmax);
}

GridPtr make_spinup_grid(const GridPtr& grid, const SpinUpOptions& spin, int& pre) {
    const Grid& g = *grid;
    pre = 0;
    if (!(spin.length > 0.0)) return grid;
    if (!(spin.ratio >= 1.0)) throw ConfigError("spin-up: spacing ratio must be >= 1");
    const double dx = g.x(1) - g.x(0);
    std::vector<double> h;
    double sum = 0.0;
    while (sum < spin.length) {
        h.push_back(dx * std::pow(spin.ratio, static_cast<int>(h.size())));
        sum += h.back();
    }
    if (h.size() > 1 && sum - spin.length > 0.5 * h.back()) {
        sum -= h.back();
        h.pop_back();
    }
    for (double& v : h) v *= spin.length / sum;
    pre = static_cast<int>(h.size());
    std::vector<double> x(pre + g.nx());
    x[pre] = spin.length;
    for (int k = 0; k < pre; ++k) x[pre - 1 - k] = x[pre - k] - h[k];
    x[0] = 0.0;
    for (int i = 1; i < g.nx(); ++i) x[pre + i] = g.x(i) + spin.length;
    return make_grid(std::move(x), g.y(), g.y_max());
}

PrandtlSolution solve_prandtl(const EulerFlow& flow, const InflowProfile& inflow, const GridPtr& grid,
                              NewtonOptions newton, SpinUpOptions spin) {
    const Grid& g = *grid;
    if (inflow.y.size() != static_cast<std::size_t>(g.ny())) throw UsageError("solve_prandtl: inflow not on the layer grid");
    if (spin.length < 0.0 || spin.linear_length < 0.0) throw ConfigError("solve_prandtl: spin-up lengths must be >= 0");
    int pre = 0;
    GridPtr eg = make_spinup_grid(grid, spin, pre);
    const double shift = pre > 0 ? spin.length : 0.0;
    if (std::fabs(inflow.x_at + shift) > 1e-12)
        throw ConfigError(fmt::format("solve_prandtl: inflow posed at x={} but the march starts at x={}", inflow.x_at,
                                      -shift));
    inflow.validate(flow);
    NonlinearMarchInput in;
    in.grid = eg;
    in.inflow = inflow.U0P;
    in.newton = newton;
    in.ue.resize(eg->nx());
    in.px.resize(eg->nx());
    for (int i = 0; i < eg->nx(); ++i) {
        const double x = eg->x(i) - shift;
        in.ue[i] = flow.u(x, 0.0);
        in.px[i] = -in.ue[i] * flow.u(x, 0.0, 1, 0);
    }
    auto m = march_prandtl(in);
    PrandtlSolution sol;
    sol.grid = grid;
    sol.ext.grid = eg;
    sol.ext.offset = pre;
    sol.ext.shift = shift;
    sol.ext.linear_start = 0;
    while (sol.ext.linear_start < pre && eg->x(sol.ext.linear_start) - shift < -spin.linear_length - 1e-12)
        ++sol.ext.linear_start;
    {
        const int ls = sol.ext.linear_start;
        std::vector<double> lx(eg->x().begin() + ls, eg->x().end());
        const double x0 = lx.front();
        for (double& v : lx) v -= x0;
        lx.front() = 0.0;
        sol.ext.linear_grid = ls == 0 ? eg : make_grid(std::move(lx), g.y(), g.y_max());
    }
    sol.ext.ue = in.ue;
    sol.ext.p0px = in.px;
    sol.ext.u0p = std::move(m.u);
    sol.ext.v0p = std::move(m.v);
    derive_layer_parts(flow, sol.ext.u0p, sol.ext.v0p, shift, sol.ext.u0b, sol.ext.v0b);
    sol.u0p = slice_columns(sol.ext.u0p, grid, pre);
    sol.v0p = slice_columns(sol.ext.v0p, grid, pre);
    sol.newton_iterations.assign(m.iterations.begin() + std::min<std::size_t>(pre, m.iterations.size()), m.iterations.end());
    finish(flow, sol);
    return sol;
}

static void trivial_extension(PrandtlSolution& sol) {
    sol.ext.grid = sol.grid;
    sol.ext.offset = 0;
    sol.ext.linear_start = 0;
    sol.ext.linear_grid = sol.grid;
    sol.ext.shift = 0.0;
    sol.ext.u0p = sol.u0p;
    sol.ext.v0p = sol.v0p;
    sol.ext.u0b = sol.u0b;
    sol.ext.v0b = sol.v0b;
    sol.ext.ue = sol.ue;
    sol.ext.p0px = sol.p0px;
}

OleinikReport check_oleinik(const PrandtlSolution& sol, double decay_tol) {
    const Grid& g = *sol.grid;
    OleinikReport r;
    r.m0 = sol.m0;
    r.y0 = sol.y0;
    r.min_interior_u = INFINITY;
    std::string where;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 1; j < g.ny(); ++j)
            if (sol.u0p(i, j) < r.min_interior_u) {
                r.min_interior_u = sol.u0p(i, j);
                where = fmt::format("(x={}, y={})", g.x(i), g.y(j));
            }
    r.positivity = r.min_interior_u > 0.0;
    if (!r.positivity) r.failure += "u0p not positive at " + where + "; ";
    r.wall_shear = true;
    for (int i = 0; i < g.nx(); ++i)
        if (!(sol.wall_shear[i] > 0.0)) {
            r.wall_shear = false;
            r.failure += fmt::format("wall shear {} at x={}; ", sol.wall_shear[i], g.x(i));
            break;
        }
    auto supf = [](const Field& f) {
        double m = 0.0;
        for (double v : f.values()) m = std::max(m, std::fabs(v));
        return m;
    };
    r.sup_u = supf(sol.u0p);
    r.sup_uy = supf(diff(sol.u0p, Axis::y, 1));
    r.sup_uyy = supf(diff(sol.u0p, Axis::y, 2));
    r.sup_ux = supf(diff(sol.u0p, Axis::x, 1, Scheme::biased));
    r.bounds = std::isfinite(r.sup_u) && std::isfinite(r.sup_uy) && std::isfinite(r.sup_uyy) && std::isfinite(r.sup_ux);
    if (!r.bounds) r.failure += "unbounded derivative; ";
    r.tail = 0.0;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            if (g.y(j) >= 0.5 * g.height()) r.tail = std::max(r.tail, std::fabs(sol.u0b(i, j)));
    r.decay = r.tail <= decay_tol;
    if (!r.decay) r.failure += fmt::format("tail {} above {}; ", r.tail, decay_tol);
    return r;
}

void write_prandtl(const std::string& path, const PrandtlSolution& sol) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError(fmt::format("cannot write '{}'", path));
    const Grid& g = *sol.grid;
    std::fprintf(f, "# x y u v\n");
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j)
            std::fprintf(f, "%.17g %.17g %.17g %.17g\n", g.x(i), g.y(j), sol.u0p(i, j), sol.v0p(i, j));
    std::fclose(f);
}

PrandtlSolution read_prandtl(const std::string& path, const EulerFlow& flow) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot open Prandtl dump '{}'", path));
    std::vector<double> xs, ys, us, vs;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        double a, b, c, d;
        if (std::sscanf(line.c_str(), "%lf %lf %lf %lf", &a, &b, &c, &d) != 4)
            throw ConfigError(fmt::format("malformed Prandtl dump line '{}'", line));
        xs.push_back(a);
        ys.push_back(b);
        us.push_back(c);
        vs.push_back(d);
    }
    std::vector<double> x, y;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (x.empty() || xs[k] != x.back()) x.push_back(xs[k]);
        if (x.size() == 1) y.push_back(ys[k]);
    }
    if (x.size() * y.size() != xs.size()) throw ConfigError("Prandtl dump is not a tensor grid");
    double ymax = y.back();
    PrandtlSolution sol;
    sol.grid = make_grid(x, y, ymax);
    sol.u0p = Field(sol.grid, us, "u0p");
    sol.v0p = Field(sol.grid, vs, "v0p");
    finish(flow, sol);
    trivial_extension(sol);
    return sol;
}

} // namespace pbl
