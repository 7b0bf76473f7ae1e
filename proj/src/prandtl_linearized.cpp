#include "pbl/prandtl_linearized.hpp"

#include "pbl/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace pbl {

namespace {

std::vector<double> on_nodes(const std::vector<double>& src, const std::vector<double>& vals,
                             const std::vector<double>& dst) {
    if (src == dst) return vals;
    CubicInterpolator I(src, Extrapolation::error);
    std::vector<double> out(dst.size());
    for (std::size_t k = 0; k < dst.size(); ++k) out[k] = I(vals.data(), dst[k]);
    return out;
}

std::vector<double> wall_row(const Field& f) { return f.row(0); }

Field tail_integral(const Field& q, double sign) {
    const Grid& g = q.grid();
    Field out(q.grid_ptr());
    for (int i = 0; i < g.nx(); ++i) {
        std::vector<double> col(q.column(i), q.column(i) + g.ny());
        auto t = tail_trapezoid(g.y(), col);
        for (int j = 0; j < g.ny(); ++j) out(i, j) = sign * t[j];
    }
    return out;
}

Field cum_integral_y(const Field& q) {
    const Grid& g = q.grid();
    Field out(q.grid_ptr());
    for (int i = 0; i < g.nx(); ++i) {
        std::vector<double> col(q.column(i), q.column(i) + g.ny());
        auto t = cumulative_trapezoid(g.y(), col);
        for (int j = 0; j < g.ny(); ++j) out(i, j) = t[j];
    }
    return out;
}

/// pressure bundle with p_y taken from its defining integrand
Bundle pressure_bundle(const Field& p, const Field& py) {
    Bundle b;
    b.f = p;
    b.fx = diff(p, Axis::x, 1, Scheme::biased);
    b.fy = py;
    b.fxx = diff(p, Axis::x, 2);
    b.fyy = diff(py, Axis::y, 1);
    return b;
}

} // namespace

double homogenizer(double y) { return (1.0 - y) * std::exp(-y); }
double homogenizer_tail(double y) { return -y * std::exp(-y); }

OuterTraces OuterTraces::from(const std::vector<double>& layer_x, const EulerCorrector* c1,
                              const EulerCorrector* c2) {
    OuterTraces t;
    const std::size_t n = layer_x.size();
    auto zeros = [n] { return std::vector<double>(n, 0.0); };
    if (!c1) {
        t.U1 = t.U1x = t.U1Y = t.U1Yx = zeros();
        t.V1 = t.V1x = t.V1Y = t.V1Yx = t.V1YY = t.V1YYx = zeros();
    } else {
        const auto& X = c1->grid->x();
        auto tr = [&](const Field& f) { return on_nodes(X, wall_row(f), layer_x); };
        t.U1 = tr(c1->u.f);
        t.U1x = tr(c1->u.fx);
        t.U1Y = tr(c1->u.fy);
        t.U1Yx = diff1d(layer_x, t.U1Y, 1);
        t.V1 = tr(c1->v.f);
        t.V1x = tr(c1->v.fx);
        t.V1Y = tr(c1->v.fy);
        t.V1Yx = diff1d(layer_x, t.V1Y, 1);
        t.V1YY = tr(c1->v.fyy);
        t.V1YYx = diff1d(layer_x, t.V1YY, 1);
    }
    if (!c2) {
        t.U2 = t.U2x = t.V2 = t.V2x = t.V2Y = t.V2Yx = zeros();
    } else {
        const auto& X = c2->grid->x();
        auto tr = [&](const Field& f) { return on_nodes(X, wall_row(f), layer_x); };
        t.U2 = tr(c2->u.f);
        t.U2x = tr(c2->u.fx);
        t.V2 = tr(c2->v.f);
        t.V2x = tr(c2->v.fx);
        t.V2Y = tr(c2->v.fy);
        t.V2Yx = diff1d(layer_x, t.V2Y, 1);
    }
    return t;
}

MatchedAggregates build_aggregates(const EulerFlow& flow, const GridPtr& layer_grid, const OuterTraces& t) {
    const Grid& g = *layer_grid;
    if (t.U1.size() != static_cast<std::size_t>(g.nx())) throw UsageError("build_aggregates: traces not on layer x nodes");
    MatchedAggregates A;
    A.grid = layer_grid;
    for (int k = 0; k < 3; ++k) {
        for (auto* f : {&A.u[k], &A.ux[k], &A.uy[k], &A.v[k], &A.vx[k], &A.vy[k]}) *f = Field(layer_grid);
        A.u[k].set_label(fmt::format("u^({})_e", k));
        A.v[k].set_label(fmt::format("v^({})_e", k));
    }
    for (int i = 0; i < g.nx(); ++i) {
        const double x = g.x(i);
        auto U = [&](int a, int b) { return flow.u(x, 0.0, a, b); };
        auto V = [&](int a, int b) { return flow.v(x, 0.0, a, b); };
        for (int j = 0; j < g.ny(); ++j) {
            const double y = g.y(j), y2 = 0.5 * y * y, y3 = y * y * y / 6.0;
            A.u[0](i, j) = U(0, 0);
            A.ux[0](i, j) = U(1, 0);
            A.uy[0](i, j) = 0.0;
            A.v[0](i, j) = y * V(0, 1);
            A.vx[0](i, j) = y * V(1, 1);
            A.vy[0](i, j) = V(0, 1);

            A.u[1](i, j) = y * U(0, 1) + t.U1[i];
            A.ux[1](i, j) = y * U(1, 1) + t.U1x[i];
            A.uy[1](i, j) = U(0, 1);
            A.v[1](i, j) = y2 * V(0, 2) + y * t.V1Y[i];
            A.vx[1](i, j) = y2 * V(1, 2) + y * t.V1Yx[i];
            A.vy[1](i, j) = y * V(0, 2) + t.V1Y[i];

            A.u[2](i, j) = y2 * U(0, 2) + y * t.U1Y[i] + t.U2[i];
            A.ux[2](i, j) = y2 * U(1, 2) + y * t.U1Yx[i] + t.U2x[i];
            A.uy[2](i, j) = y * U(0, 2) + t.U1Y[i];
            A.v[2](i, j) = y3 * V(0, 3) + y2 * t.V1YY[i] + y * t.V2Y[i];
            A.vx[2](i, j) = y3 * V(1, 3) + y2 * t.V1YYx[i] + y * t.V2Yx[i];
            A.vy[2](i, j) = y2 * V(0, 3) + y * t.V1YY[i] + t.V2Y[i];
        }
    }
    return A;
}

void attach_order0(MatchedAggregates& agg, const PrandtlSolution& p) {
    agg.u_p[0] = p.u0p;
    agg.v_p[0] = agg.v[0];
    // v0b - v0b|0 + v^(0)
    const Grid& g = *p.grid;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) agg.v_p[0](i, j) += p.v0b(i, j) - p.v0b(i, 0);
}

void attach_order1(MatchedAggregates& agg, const BLCorrector& bl1) {
    agg.u_p[1] = bl1.u.f + agg.u[1];
    agg.v_p[1] = bl1.w + agg.v[1];
}

LayerBase make_layer_base(const PrandtlSolution& p) {
    const auto& E = p.ext;
    const Grid& eg = *E.grid;
    Bundle u0b = make_bundle(E.u0b, Scheme::biased), v0b = make_bundle(E.v0b, Scheme::biased);
    LayerBase b;
    b.ext_u0p_x = u0b.fx;
    auto uex = diff1d(eg.x(), E.ue, 1, Scheme::biased);
    for (int i = 0; i < eg.nx(); ++i)
        for (int j = 0; j < eg.ny(); ++j) b.ext_u0p_x(i, j) += uex[i];
    b.ext_u0p_y = u0b.fy;
    b.u0b = slice_columns(u0b, p.grid, E.offset);
    b.v0b = slice_columns(v0b, p.grid, E.offset);
    b.u0p_x = slice_columns(b.ext_u0p_x, p.grid, E.offset);
    b.u0p_y = slice_columns(b.ext_u0p_y, p.grid, E.offset);
    return b;
}

Field build_f1(const PrandtlSolution& p, const LayerBase& base, const MatchedAggregates& A) {
    const GridPtr& gp = p.grid;
    Field f(gp, "f1");
    for (std::size_t k = 0; k < gp->size(); ++k)
        f[k] = -(base.u0b.f[k] * A.ux[1][k] + base.u0b.fx[k] * A.u[1][k] + base.v0b.f[k] * A.uy[1][k] +
                 base.u0b.fy[k] * A.v[1][k]);
    return f;
}

std::vector<double> corrector_inflow(const Field& ubar_x, const Field& rhs, double a0, InflowChoice choice) {
    const Grid& g = rhs.grid();
    const int ny = g.ny();
    double c2 = 0.0, c3 = 0.0;
    if (choice == InflowChoice::compatible) {
        // u_yy = -rhs and u_yyy = a ubar_xy - rhs_y at the starting corner
        auto d1 = derivative_stencils(g.y(), 1);
        double rhs_y = 0.0, ubar_xy = 0.0;
        for (int q = 0; q < d1[0].n; ++q) {
            rhs_y += d1[0].w[q] * rhs(0, d1[0].first + q);
            ubar_xy += d1[0].w[q] * ubar_x(0, d1[0].first + q);
        }
        c2 = -rhs(0, 0) + 2.0 * a0;
        c3 = a0 * ubar_xy - rhs_y;
    }
    std::vector<double> U(ny);
    for (int j = 0; j < ny; ++j) {
        const double y = g.y(j), chi = cutoff(y)[0];
        U[j] = a0 * std::exp(-y * y) + (0.5 * c2 * y * y + c3 * y * y * y / 6.0) * chi;
    }
    return U;
}

BLCorrector solve_bl_corrector(int order, const PrandtlSolution& p, const LayerBase& base, const Field& rhs_main,
                               const std::vector<double>& wall_main, InflowChoice choice, bool homogenize) {
    const GridPtr& mp = p.grid;
    const auto& E = p.ext;
    const GridPtr& gp = E.linear_grid;
    const Grid& g = *gp;
    const int nx = g.nx(), ny = g.ny(), ls = E.linear_start, pre = E.offset - ls;
    const Field ubar = slice_columns(E.u0p, gp, ls), vbar = slice_columns(E.v0p, gp, ls);
    const Field ubar_x = slice_columns(base.ext_u0p_x, gp, ls), ubar_y = slice_columns(base.ext_u0p_y, gp, ls);
    if (static_cast<int>(wall_main.size()) != mp->nx() || !rhs_main.grid().same_nodes(*mp))
        throw UsageError("solve_bl_corrector: wall or rhs not on the layer grid");
    const Field rhs = extend_columns_linear(rhs_main, gp, pre);
    const std::vector<double> wall = extend_linear(mp->x(), wall_main, g.x(), pre);

    BLCorrector c;
    c.order = order;
    c.start = corrector_inflow(ubar_x, rhs, wall.front(), choice);
    c.eta.resize(ny);
    c.I_eta.resize(ny);
    for (int j = 0; j < ny; ++j) {
        c.eta[j] = homogenizer(g.y(j));
        c.I_eta[j] = homogenizer_tail(g.y(j));
    }

    LinearMarchInput in;
    in.grid = gp;
    in.ubar = ubar;
    in.vbar = vbar;
    in.ubar_x = ubar_x;
    in.ubar_y = ubar_y;
    in.rhs = rhs;
    in.wall = wall;
    in.inflow = c.start;
    in.far.assign(nx, 0.0);

    Field lu(gp), lw(gp);
    if (homogenize) {
        // u = u_b - a(x) eta(y) has zero wall data
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) lu(i, j) = wall[i] * c.eta[j];
        lw = integrate_continuity(lu);
        Field lux = diff(lu, Axis::x, 1, Scheme::biased), luy = diff(lu, Axis::y, 1), luyy = diff(lu, Axis::y, 2);
        for (std::size_t k = 0; k < g.size(); ++k)
            in.rhs[k] -= ubar[k] * lux[k] + ubar_x[k] * lu[k] + vbar[k] * luy[k] + ubar_y[k] * lw[k] - luyy[k];
        for (int i = 0; i < nx; ++i) {
            in.wall[i] = 0.0;
            in.far[i] = -lu(i, ny - 1);
        }
        for (int j = 0; j < ny; ++j) in.inflow[j] -= lu(0, j);
    }
    auto r = march_linear(in);
    Field u = r.u, w = r.w;
    if (homogenize) {
        u += lu;
        w += lw;
    }
    u.set_label(fmt::format("u{}b", order));
    w.set_label(fmt::format("w{}b", order));
    Field v(gp, fmt::format("v{}b", order));
    std::vector<double> vw(nx);
    for (int i = 0; i < nx; ++i) {
        vw[i] = -w(i, ny - 1);
        for (int j = 0; j < ny; ++j) v(i, j) = w(i, j) + vw[i];
    }
    u.check_finite();
    v.check_finite();
    Bundle ub = make_bundle(u, Scheme::biased);
    c.corner_residual = ub.fyy(0, 0) + rhs(0, 0);
    c.u = slice_columns(ub, mp, pre);
    c.v = slice_columns(make_bundle(v, Scheme::biased), mp, pre);
    c.w = slice_columns(w, mp, pre);
    auto vwx = diff1d(g.x(), vw, 1, Scheme::biased), vwxx = diff1d(g.x(), vw, 2);
    c.v_wall.assign(vw.begin() + pre, vw.end());
    c.v_wall_x.assign(vwx.begin() + pre, vwx.end());
    c.v_wall_xx.assign(vwxx.begin() + pre, vwxx.end());
    c.inflow.assign(c.u.f.column(0), c.u.f.column(0) + ny);
    c.p = zero_bundle(mp);
    return c;
}

BLCorrector solve_bl1(const PrandtlSolution& p, const LayerBase& base, const Field& f1, const OuterTraces& t,
                      InflowChoice choice) {
    const Grid& g = *p.grid;
    std::vector<double> wall(g.nx());
    for (int i = 0; i < g.nx(); ++i) wall[i] = -t.U1[i];
    return solve_bl_corrector(1, p, base, f1, wall, choice);
}

SecondOrderLayerForcing build_f2_g2(const PrandtlSolution& p, const LayerBase& base, const MatchedAggregates& A,
                                    const BLCorrector& bl1, const OuterTraces& t) {
    const GridPtr& gp = p.grid;
    const Grid& g = *gp;
    if (A.u_p[1].empty()) throw UsageError("build_f2_g2: order-1 aggregates not attached");
    SecondOrderLayerForcing r{Field(gp, "f2"), Field(gp, "g2")};
    const Bundle &u0 = base.u0b, &v0 = base.v0b, &u1 = bl1.u;
    const Field& v1 = bl1.v.f;
    for (int i = 0; i < g.nx(); ++i) {
        for (int j = 0; j < g.ny(); ++j) {
            const std::size_t k = g.index(i, j);
            r.f2[k] = -(u0.f[k] * A.ux[2][k] + u0.fx[k] * A.u[2][k] + v0.f[k] * A.uy[2][k] + u0.fy[k] * A.v[2][k] +
                        A.u_p[1][k] * u1.fx[k] + u1.f[k] * A.ux[1][k] + A.v_p[1][k] * u1.fy[k] +
                        v1[k] * A.uy[1][k] - u0.fxx[k]);
            // v0p_x, v0p_y with the wall trace of v0b replaced by -v^1_e(x,0)
            const double v0p_x = v0.fx[k] + t.V1x[i] + A.vx[0][k];
            const double v0p_y = v0.fy[k] + A.vy[0][k];
            r.g2[k] = -(u0.f[k] * v0p_x + A.u[0][k] * v0.fx[k] + v0.f[k] * v0p_y + (A.v[0][k] + t.V1[i]) * v0.fy[k] -
                        v0.fyy[k]);
        }
    }
    return r;
}

SecondOrderLayer solve_bl2_and_pressures(const PrandtlSolution& p, const LayerBase& base, const MatchedAggregates& A,
                                         const BLCorrector& bl1, const SecondOrderLayerForcing& fg,
                                         const OuterTraces& t, InflowChoice choice) {
    const GridPtr& gp = p.grid;
    const Grid& g = *gp;
    SecondOrderLayer L2;
    Field p2 = tail_integral(fg.g2, -1.0);
    p2.set_label("p2b");
    Bundle pb = pressure_bundle(p2, fg.g2);
    Field rhs = fg.f2 - pb.fx;
    std::vector<double> wall(g.nx());
    for (int i = 0; i < g.nx(); ++i) wall[i] = -t.U2[i];
    L2.bl2 = solve_bl_corrector(2, p, base, rhs, wall, choice);
    L2.bl2.p = pb;
    L2.I2 = cum_integral_y(L2.bl2.u.f);
    L2.I2.set_label("I2");

    // p3b = int_y^inf q
    const Bundle &u0 = base.u0b, &v0 = base.v0b, &u1 = bl1.u, &v1 = bl1.v;
    Field q(gp, "q3");
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            const std::size_t k = g.index(i, j);
            const double v0p_x = v0.fx[k] + t.V1x[i] + A.vx[0][k];
            const double v0p_y = v0.fy[k] + A.vy[0][k];
            const double v1p_x = v1.fx[k] + t.V2x[i] + A.vx[1][k];
            const double v1p_y = v1.fy[k] + A.vy[1][k];
            q[k] = u1.f[k] * v0p_x + A.u[1][k] * v0.fx[k] + v1.f[k] * v0p_y + (A.v[1][k] + t.V2[i]) * v0.fy[k] +
                   u0.f[k] * v1p_x + A.u[0][k] * v1.fx[k] + v0.f[k] * v1p_y + (A.v[0][k] + t.V1[i]) * v1.fy[k] -
                   v1.fyy[k];
        }
    Field p3 = tail_integral(q, 1.0);
    p3.set_label("p3b");
    L2.p3b = pressure_bundle(p3, -1.0 * q);
    return L2;
}

HatValues hat_values(const HatInputs& in, double y, double eps) {
    const double s = std::sqrt(eps);
    const auto c = cutoff(s * y);
    const double dv = in.v - in.v0, dvx = in.vx - in.v0x, dvxx = in.vxx - in.v0xx;
    HatValues h;
    h.u = c[0] * in.u + s * c[1] * in.I;
    h.uy = c[0] * in.uy + 2.0 * s * c[1] * in.u + s * s * c[2] * in.I;
    h.uyy = c[0] * in.uyy + 3.0 * s * c[1] * in.uy + 3.0 * s * s * c[2] * in.u + s * s * s * c[3] * in.I;
    h.ux = c[0] * in.ux - s * c[1] * dv;
    h.uxx = c[0] * in.uxx - s * c[1] * dvx;
    h.v = c[0] * dv;
    h.vy = s * c[1] * dv + c[0] * in.vy;
    h.vyy = s * s * c[2] * dv + 2.0 * s * c[1] * in.vy + c[0] * in.vyy;
    h.vx = c[0] * dvx;
    h.vxx = c[0] * dvxx;
    return h;
}

ModifiedBL2 modify_bl2(const SecondOrderLayer& L2, double eps) {
    if (!(eps > 0.0)) throw DomainError("modify_bl2: eps must be positive");
    const Bundle &u = L2.bl2.u, &v = L2.bl2.v;
    const GridPtr& gp = u.f.grid_ptr();
    const Grid& g = *gp;
    ModifiedBL2 m;
    m.eps = eps;
    m.u_hat = Field(gp, "u2b_hat");
    m.v_hat = Field(gp, "v2b_hat");
    m.p3b = L2.p3b.f;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            HatInputs in;
            in.u = u.f(i, j);
            in.v = v.f(i, j);
            in.vy = v.fy(i, j);
            in.v0 = L2.bl2.v_wall[i];
            in.I = L2.I2(i, j);
            auto h = hat_values(in, g.y(j), eps);
            m.u_hat(i, j) = h.u;
            m.v_hat(i, j) = h.v;
        }
    return m;
}

} // namespace pbl
