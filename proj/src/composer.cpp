#include "pbl/composer.hpp"

#include "pbl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbl {

InflowProfile default_inflow(const EulerFlow& flow, const ExpansionOptions& opt) {
    auto lg = make_layer_grid(opt.L, opt.y_max, opt.layer_nx, opt.layer_ny);
    const double len = opt.spin.length;
    return make_blasius_inflow(flow, lg->y(), true, -len, 1.0 - len);
}

PrandtlStage solve_prandtl_stage(const EulerFlow& flow, const InflowProfile& inflow, const ExpansionOptions& opt) {
    if (!(opt.L > 0.0) || opt.layer_nx < 8) throw ConfigError("build_profiles: bad layer grid");
    PrandtlStage st;
    const double dx = opt.L / (opt.layer_nx - 1);
    SpinUpOptions spin = opt.spin;
    int k = 0;
    // a profile posed at x = 0 (file inflow) is marched from there, without margin
    if (inflow.x_at == 0.0) {
        spin.length = 0.0;
    } else {
        k = static_cast<int>(std::lround(opt.margin / dx));
        spin.length -= k * dx;
        if (!(spin.length > 0.0)) throw ConfigError("build_profiles: spin-up must exceed the margin");
    }
    st.margin = k * dx;
    st.col0 = k;
    const EulerFlow fw = flow.translated(-st.margin);
    const int nxw = opt.layer_nx + 2 * k;
    auto lg = make_layer_grid(dx * (nxw - 1), opt.y_max, nxw, opt.layer_ny);
    InflowProfile in = inflow;
    in.x_at = -spin.length;
    st.prandtl = solve_prandtl(fw, in, lg, {}, spin);
    return st;
}

ExpansionProfiles build_profiles(const EulerFlow& flow, const InflowProfile& inflow, const ExpansionOptions& opt) {
    return build_profiles(flow, solve_prandtl_stage(flow, inflow, opt), opt);
}

ExpansionProfiles build_profiles(const EulerFlow& flow, PrandtlStage stage, const ExpansionOptions& opt) {
    ExpansionProfiles pr;
    pr.flow = std::make_shared<const EulerFlow>(flow);
    pr.margin = stage.margin;
    pr.col0 = stage.col0;
    pr.work_flow = std::make_shared<const EulerFlow>(flow.translated(-pr.margin));
    const EulerFlow& fw = *pr.work_flow;
    pr.prandtl = std::move(stage.prandtl);
    const PrandtlSolution& P = pr.prandtl;
    const GridPtr& lg = P.grid;
    const int k = pr.col0, nxp = lg->nx() - 2 * k;
    if (nxp < 8) throw UsageError("build_profiles: Prandtl stage does not match the margin");
    {
        std::vector<double> xp(nxp);
        for (int i = 0; i < nxp; ++i) xp[i] = lg->x(k + i) - lg->x(k);
        pr.physical_grid = make_grid(xp, lg->y(), lg->y_max());
    }
    auto eg = make_euler_grid(lg->x(), opt.Y_max, opt.euler_ny, opt.euler_beta);
    pr.c1 = solve_corrector1(fw, P, eg);
    pr.base = make_layer_base(P);
    auto t1 = OuterTraces::from(lg->x(), &pr.c1, nullptr);
    auto A1 = build_aggregates(fw, lg, t1);
    attach_order0(A1, P);
    auto f1 = build_f1(P, pr.base, A1);
    pr.bl1 = solve_bl1(P, pr.base, f1, t1);
    auto H = build_h_forcing(fw, pr.c1);
    pr.c2 = solve_corrector2(fw, H, lg->x(), pr.bl1.v_wall, pr.c1, eg);
    pr.traces = OuterTraces::from(lg->x(), &pr.c1, &pr.c2);
    auto A2 = build_aggregates(fw, lg, pr.traces);
    attach_order0(A2, P);
    attach_order1(A2, pr.bl1);
    auto fg = build_f2_g2(P, pr.base, A2, pr.bl1, pr.traces);
    pr.L2 = solve_bl2_and_pressures(P, pr.base, A2, pr.bl1, fg, pr.traces);
    return pr;
}

namespace {

struct Jet {
    double f = 0, x = 0, y = 0, xx = 0, yy = 0;
};

/// tensor-product stencil
struct Tap {
    Stencil sx, sy;
    double operator()(const Field& F) const {
        double v = 0.0;
        for (int a = 0; a < sx.n; ++a) {
            const double* c = F.column(sx.first + a);
            double t = 0.0;
            for (int b = 0; b < sy.n; ++b) t += sy.w[b] * c[sy.first + b];
            v += sx.w[a] * t;
        }
        return v;
    }
    double operator()(const std::vector<double>& col) const {
        double v = 0.0;
        for (int a = 0; a < sx.n; ++a) v += sx.w[a] * col[sx.first + a];
        return v;
    }
    Jet operator()(const Bundle& b) const { return {(*this)(b.f), (*this)(b.fx), (*this)(b.fy), (*this)(b.fxx), (*this)(b.fyy)}; }
};

Jet analytic_u(const EulerFlow& fl, double X, double Y) {
    return {fl.u(X, Y), fl.u(X, Y, 1, 0), fl.u(X, Y, 0, 1), fl.u(X, Y, 2, 0), fl.u(X, Y, 0, 2)};
}
Jet analytic_v(const EulerFlow& fl, double X, double Y) {
    return {fl.v(X, Y), fl.v(X, Y, 1, 0), fl.v(X, Y, 0, 1), fl.v(X, Y, 2, 0), fl.v(X, Y, 0, 2)};
}

void put(Bundle& b, std::size_t k, const Jet& j) {
    b.f[k] = j.f;
    b.fx[k] = j.x;
    b.fy[k] = j.y;
    b.fxx[k] = j.xx;
    b.fyy[k] = j.yy;
}

Bundle empty_bundle(const GridPtr& g) { return zero_bundle(g); }

} // namespace

GridPtr composer_grid(const ExpansionProfiles& prof, double eps, int ny, double Y_max) {
    if (!(eps > 0.0)) throw DomainError("composer_grid: eps must be positive");
    const double beta = tanh_beta_for_half(Y_max, 4.0 * std::sqrt(eps));
    return make_grid(prof.physical_grid->x(), tanh_wall_nodes(0.0, Y_max, ny, beta), prof.physical_grid->y_max());
}

ApproximateSolution assemble(const ExpansionProfiles& prof, double eps, const GridPtr& grid, Truncation trunc) {
    if (!(eps > 0.0)) throw DomainError("assemble: eps must be positive");
    const Grid& g = *grid;
    const double s = std::sqrt(eps), e32 = eps * s;
    {
        int inside = 0;
        for (double Y : g.y())
            if (Y > 0.0 && Y <= s) ++inside;
        if (inside < 8)
            throw ResolutionError(fmt::format("assemble: {} nodes in 0 < Y <= sqrt(eps) at eps = {:.3e} (need 8)", inside, eps),
                                  eps);
    }
    const Grid& lg = *prof.prandtl.grid;
    const Grid& eg = *prof.c1.grid;
    if (g.height() > eg.height() * (1.0 + 1e-12)) throw UsageError("assemble: target grid exceeds the Euler strip");
    const bool ord2 = trunc == Truncation::full;
    const EulerFlow& fl = *prof.flow;

    CubicInterpolator lx(lg.x()), ly(lg.y(), Extrapolation::zero), lyh(lg.y(), Extrapolation::hold);
    CubicInterpolator ex(eg.x()), ey(eg.y());

    const auto& c1 = prof.c1;
    const auto& c2 = prof.c2;
    const auto& b0 = prof.base;
    const auto& b1 = prof.bl1;
    const auto& bl2 = prof.L2.bl2;

    ApproximateSolution a;
    a.eps = eps;
    a.grid = grid;
    a.base = prof.flow;
    for (Bundle* b : {&a.U, &a.V, &a.dU, &a.dV}) *b = empty_bundle(grid);
    for (Field* f : {&a.P, &a.PX, &a.PY, &a.dPX, &a.dPY, &a.U0}) *f = Field(grid);
    a.U.f.set_label("U_s");
    a.V.f.set_label("V_s");
    a.P.set_label("P_s");
    a.a0.assign(g.ny(), 0.0);
    a.aL = a.b0 = a.bL = a.a0;

    std::vector<Stencil> sy_l(g.ny()), sy_h(g.ny()), sy_e(g.ny());
    for (int j = 0; j < g.ny(); ++j) {
        sy_l[j] = ly.weights(g.y(j) / s);
        sy_h[j] = lyh.weights(g.y(j) / s);
        sy_e[j] = ey.weights(g.y(j));
    }
    for (int i = 0; i < g.nx(); ++i) {
        const double X = g.x(i), xi = X + prof.margin;
        const Stencil sxl = lx.weights(xi), sxe = ex.weights(xi);
        const Tap wall{sxl, {}};
        const double vw = ord2 ? wall(bl2.v_wall) : 0.0, vwx = ord2 ? wall(bl2.v_wall_x) : 0.0,
                     vwxx = ord2 ? wall(bl2.v_wall_xx) : 0.0;
        for (int j = 0; j < g.ny(); ++j) {
            const double Y = g.y(j), y = Y / s;
            const Tap L{sxl, sy_l[j]}, Lh{sxl, sy_h[j]}, E{sxe, sy_e[j]};
            const Jet u0 = L(b0.u0b), v0 = L(b0.v0b), u1 = L(b1.u), v1 = L(b1.v);
            const Jet e1u = E(c1.u), e1v = E(c1.v);
            const double p1 = E(c1.p), p1X = E(c1.pX), p1Y = E(c1.pY);
            Jet e2u, e2v;
            double p2 = 0, p2X = 0, p2Y = 0, q2 = 0, q2x = 0, q2y = 0, q3 = 0, q3x = 0, q3y = 0;
            HatValues h;
            if (ord2) {
                e2u = E(c2.u);
                e2v = E(c2.v);
                p2 = E(c2.p);
                p2X = E(c2.pX);
                p2Y = E(c2.pY);
                q2 = L(bl2.p.f);
                q2x = L(bl2.p.fx);
                q2y = L(bl2.p.fy);
                q3 = L(prof.L2.p3b.f);
                q3x = L(prof.L2.p3b.fx);
                q3y = L(prof.L2.p3b.fy);
                const Jet u2 = L(bl2.u), v2 = L(bl2.v);
                HatInputs in;
                in.u = u2.f;
                in.ux = u2.x;
                in.uy = u2.y;
                in.uxx = u2.xx;
                in.uyy = u2.yy;
                in.v = v2.f;
                in.vx = v2.x;
                in.vy = v2.y;
                in.vxx = v2.xx;
                in.vyy = v2.yy;
                in.v0 = vw;
                in.v0x = vwx;
                in.v0xx = vwxx;
                in.I = Lh(prof.L2.I2);
                h = hat_values(in, y, eps);
            }
            Jet dU, dV;
            dU.f = u0.f + s * (e1u.f + u1.f) + eps * (e2u.f + h.u);
            dU.x = u0.x + s * (e1u.x + u1.x) + eps * (e2u.x + h.ux);
            dU.y = u0.y / s + s * e1u.y + u1.y + eps * e2u.y + s * h.uy;
            dU.xx = u0.xx + s * (e1u.xx + u1.xx) + eps * (e2u.xx + h.uxx);
            dU.yy = u0.yy / eps + s * e1u.yy + u1.yy / s + eps * e2u.yy + h.uyy;
            dV.f = s * (v0.f + e1v.f) + eps * (v1.f + e2v.f) + e32 * h.v;
            dV.x = s * (v0.x + e1v.x) + eps * (v1.x + e2v.x) + e32 * h.vx;
            dV.y = v0.y + s * e1v.y + s * v1.y + eps * e2v.y + eps * h.vy;
            dV.xx = s * (v0.xx + e1v.xx) + eps * (v1.xx + e2v.xx) + e32 * h.vxx;
            dV.yy = v0.yy / s + s * e1v.yy + v1.yy + eps * e2v.yy + s * h.vyy;
            const double dP = s * p1 + eps * (p2 + q2) + e32 * q3;
            const double dPX = s * p1X + eps * (p2X + q2x) + e32 * q3x;
            const double dPY = s * p1Y + eps * p2Y + s * q2y + eps * q3y;

            const std::size_t k = g.index(i, j);
            const Jet bu = analytic_u(fl, X, Y), bv = analytic_v(fl, X, Y);
            put(a.dU, k, dU);
            put(a.dV, k, dV);
            put(a.U, k, {bu.f + dU.f, bu.x + dU.x, bu.y + dU.y, bu.xx + dU.xx, bu.yy + dU.yy});
            put(a.V, k, {bv.f + dV.f, bv.x + dV.x, bv.y + dV.y, bv.xx + dV.xx, bv.yy + dV.yy});
            a.dPX[k] = dPX;
            a.dPY[k] = dPY;
            a.P[k] = fl.p(X, Y) + dP;
            a.U0[k] = bu.f + u0.f;
            a.PX[k] = fl.pX(X, Y) + dPX;
            a.PY[k] = fl.pY(X, Y) + dPY;
            const double at = e1u.f + u1.f + s * (e2u.f + h.u);
            const double bt = v0.f + e1v.f + s * (v1.f + e2v.f) + eps * h.v;
            if (i == 0) {
                a.a0[j] = at;
                a.b0[j] = bt;
            }
            if (i == g.nx() - 1) {
                a.aL[j] = at;
                a.bL[j] = bt;
            }
        }
    }
    for (const Field* f : {&a.U.f, &a.V.f, &a.P})
        f->check_finite();
    return a;
}

ApproximateSolution ApproximateSolution::from_fields(const Field& U, const Field& V, const Field& P, double eps) {
    if (!(eps > 0.0)) throw DomainError("from_fields: eps must be positive");
    ApproximateSolution a;
    a.eps = eps;
    a.grid = U.grid_ptr();
    a.U = make_bundle(U);
    a.V = make_bundle(V);
    a.P = P;
    a.PX = diff(P, Axis::x, 1);
    a.PY = diff(P, Axis::y, 1);
    const Grid& g = *a.grid;
    a.a0.resize(g.ny());
    a.aL.resize(g.ny());
    a.b0.resize(g.ny());
    a.bL.resize(g.ny());
    for (int j = 0; j < g.ny(); ++j) {
        a.a0[j] = U(0, j);
        a.aL[j] = U(g.nx() - 1, j);
        a.b0[j] = V(0, j);
        a.bL[j] = V(g.nx() - 1, j);
    }
    return a;
}

Remainder remainder(const ApproximateSolution& a) {
    const GridPtr& gp = a.grid;
    const Grid& g = *gp;
    Remainder r{Field(gp, "R1"), Field(gp, "R2")};
    const double eps = a.eps;
    if (!a.base) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            r.R1[k] = a.U.f[k] * a.U.fx[k] + a.V.f[k] * a.U.fy[k] - eps * (a.U.fxx[k] + a.U.fyy[k]) + a.PX[k];
            r.R2[k] = a.U.f[k] * a.V.fx[k] + a.V.f[k] * a.V.fy[k] - eps * (a.V.fxx[k] + a.V.fyy[k]) + a.PY[k];
        }
    } else {
        // the base flow balances u u_X + v u_Y + p_X exactly; only its viscous term stays
        const EulerFlow& fl = *a.base;
        for (int i = 0; i < g.nx(); ++i)
            for (int j = 0; j < g.ny(); ++j) {
                const std::size_t k = g.index(i, j);
                const double X = g.x(i), Y = g.y(j);
                const Jet bu = analytic_u(fl, X, Y), bv = analytic_v(fl, X, Y);
                const Bundle &dU = a.dU, &dV = a.dV;
                r.R1[k] = bu.f * dU.fx[k] + dU.f[k] * bu.x + dU.f[k] * dU.fx[k] + bv.f * dU.fy[k] + dV.f[k] * bu.y +
                          dV.f[k] * dU.fy[k] - eps * (bu.xx + bu.yy + dU.fxx[k] + dU.fyy[k]) + a.dPX[k];
                r.R2[k] = bu.f * dV.fx[k] + dU.f[k] * bv.x + dU.f[k] * dV.fx[k] + bv.f * dV.fy[k] + dV.f[k] * bv.y +
                          dV.f[k] * dV.fy[k] - eps * (bv.xx + bv.yy + dV.fxx[k] + dV.fyy[k]) + a.dPY[k];
            }
    }
    r.norm1 = l2_norm(r.R1);
    r.norm2 = l2_norm(r.R2);
    return r;
}

ProfileFacts profile_facts(const ApproximateSolution& a, const ExpansionProfiles& prof, double delta) {
    const Grid& g = *a.grid;
    const double s = std::sqrt(a.eps), L = g.length();
    ProfileFacts pf;
    pf.delta = delta > 0.0 ? delta : std::max(std::sqrt(L), std::pow(a.eps, 0.25));
    const double inf = std::numeric_limits<double>::infinity();
    pf.min_interior = pf.lower_inner = pf.lower_outer = inf;
    for (int i = 0; i < g.nx(); ++i) {
        pf.wall_max = std::max(pf.wall_max, std::fabs(a.U.f(i, 0)));
        for (int j = 1; j < g.ny(); ++j) {
            const double Y = g.y(j), U = a.U.f(i, j);
            const std::size_t k = g.index(i, j);
            pf.min_interior = std::min(pf.min_interior, U);
            if (Y <= s) pf.lower_inner = std::min(pf.lower_inner, U * s / Y);
            if (Y >= s) pf.lower_outer = std::min(pf.lower_outer, U);
            if (Y <= pf.delta) pf.v_ratio = std::max(pf.v_ratio, std::fabs(a.V.f[k]) / (pf.delta * std::max(U, 1e-300)));
            if (Y >= pf.delta && a.base) {
                pf.away0 = std::max(pf.away0, std::fabs(a.dU.f[k]) / s);
                pf.away1 = std::max(pf.away1, std::fabs(a.dU.fy[k]) / s);
            }
        }
        for (int j = 0; j < g.ny(); ++j) {
            const std::size_t k = g.index(i, j);
            // the base flow is divergence-free analytically
            const double d = a.base ? a.dU.fx[k] + a.dV.fy[k] : a.U.fx[k] + a.V.fy[k];
            pf.divergence = std::max(pf.divergence, std::fabs(d));
        }
    }
    const Grid& lg = *prof.prandtl.grid;
    const double hx = lg.max_dx(), hy = lg.max_dy();
    pf.div_constant = pf.divergence / (hx * hx + hy * hy);
    return pf;
}

int GridPolicy::ny_for(double eps) const {
    const double dec = std::max(0.0, std::log10(eps_ref / eps));
    int n = static_cast<int>(std::lround(ny_ref * std::pow(2.0, dec)));
    if (n % 2 == 0) ++n;
    return n;
}

std::pair<double, double> loglog_fit(const std::vector<double>& eps, const std::vector<double>& v) {
    if (eps.size() != v.size() || eps.size() < 2) throw UsageError("loglog_fit: need at least two matching points");
    const double n = static_cast<double>(eps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0.0) || !(v[k] > 0.0)) throw DomainError("loglog_fit: values must be positive");
        const double x = std::log(eps[k]), y = std::log(v[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

RemainderReport sweep(const ExpansionProfiles& prof, const std::vector<double>& eps_list, const GridPolicy& policy,
                      Truncation trunc) {
    if (eps_list.size() < 4)
        throw UsageError(fmt::format("sweep: insufficient points ({} eps values, need 4)", eps_list.size()));
    for (std::size_t k = 1; k < eps_list.size(); ++k)
        if (!(eps_list[k] < eps_list[k - 1])) throw UsageError("sweep: eps list must be strictly decreasing");
    if (std::log10(eps_list.front() / eps_list.back()) < 1.5 - 1e-9)
        throw UsageError("sweep: eps list must span at least 1.5 decades");
    RemainderReport rep;
    std::vector<double> es, vs;
    for (double eps : eps_list) {
        SweepRow row;
        row.eps = eps;
        row.ny = policy.ny_for(eps);
        auto grid = composer_grid(prof, eps, row.ny, policy.Y_max);
        auto a = assemble(prof, eps, grid, trunc);
        auto r = remainder(a);
        row.norm1 = r.norm1;
        row.norm2 = r.norm2;
        row.total = r.total();
        row.facts = profile_facts(a, prof);
        es.push_back(eps);
        vs.push_back(row.total);
        if (es.size() >= 2) row.slope_so_far = loglog_fit(es, vs).first;
        rep.rows.push_back(row);
    }
    std::tie(rep.slope, rep.intercept) = loglog_fit(es, vs);
    return rep;
}

std::string sweep_csv(const RemainderReport& r) {
    std::string out = "eps,ny,R1,R2,R1+R2,slope_so_far\n";
    for (const auto& row : r.rows)
        out += fmt::format("{:.6e},{},{:.6e},{:.6e},{:.6e},{:.4f}\n", row.eps, row.ny, row.norm1, row.norm2, row.total,
                           row.slope_so_far);
    return out;
}

} // namespace pbl
