#include "pbl/euler_linearized.hpp"

#include "pbl/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <cmath>

namespace pbl {

namespace {

struct FaceOp {
    const Grid& g;
    const std::function<double(double, double)>& a;
    // volumes
    double V(int i) const { return 0.5 * (g.x(i + 1) - g.x(i - 1)); }
    double W(int j) const { return 0.5 * (g.y(j + 1) - g.y(j - 1)); }
    double ae(int i, int j) const { return a(0.5 * (g.x(i) + g.x(i + 1)), g.y(j)); }
    double an(int i, int j) const { return a(g.x(i), 0.5 * (g.y(j) + g.y(j + 1))); }
};

} // namespace

Field apply_divergence_form(const std::function<double(double, double)>& a, const Field& w) {
    const Grid& g = w.grid();
    FaceOp op{g, a};
    Field out(w.grid_ptr(), "A(w)");
    for (int i = 1; i < g.nx() - 1; ++i)
        for (int j = 1; j < g.ny() - 1; ++j) {
            double fe = op.ae(i, j) * (w(i + 1, j) - w(i, j)) / (g.x(i + 1) - g.x(i));
            double fw = op.ae(i - 1, j) * (w(i, j) - w(i - 1, j)) / (g.x(i) - g.x(i - 1));
            double fn = op.an(i, j) * (w(i, j + 1) - w(i, j)) / (g.y(j + 1) - g.y(j));
            double fs = op.an(i, j - 1) * (w(i, j) - w(i, j - 1)) / (g.y(j) - g.y(j - 1));
            out(i, j) = (fe - fw) / op.V(i) + (fn - fs) / op.W(j);
        }
    return out;
}

EllipticResult solve_divergence_form(const std::function<double(double, double)>& a, const Field& rhs,
                                     const Field& lift) {
    const Grid& g = rhs.grid();
    if (!g.same_nodes(lift.grid())) throw UsageError("solve_divergence_form: rhs and lift on different grids");
    FaceOp op{g, a};
    const int nx = g.nx(), ny = g.ny(), mx = nx - 2, my = ny - 2;
    auto id = [&](int i, int j) { return (i - 1) * my + (j - 1); };

    EllipticResult res;
    Field Alift = apply_divergence_form(a, lift);
    res.forcing = Field(rhs.grid_ptr(), "forcing");
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) res.forcing(i, j) = rhs(i, j) - Alift(i, j);

    std::vector<Eigen::Triplet<double>> T;
    T.reserve(static_cast<std::size_t>(mx) * my * 5);
    Eigen::VectorXd b(mx * my);
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            const int r = id(i, j);
            const double Vi = op.V(i), Wj = op.W(j);
            const double ce = Wj * op.ae(i, j) / (g.x(i + 1) - g.x(i));
            const double cw = Wj * op.ae(i - 1, j) / (g.x(i) - g.x(i - 1));
            const double cn = Vi * op.an(i, j) / (g.y(j + 1) - g.y(j));
            const double cs = Vi * op.an(i, j - 1) / (g.y(j) - g.y(j - 1));
            // -M is SPD
            T.emplace_back(r, r, ce + cw + cn + cs);
            if (i + 1 < nx - 1) T.emplace_back(r, id(i + 1, j), -ce);
            if (i - 1 > 0) T.emplace_back(r, id(i - 1, j), -cw);
            if (j + 1 < ny - 1) T.emplace_back(r, id(i, j + 1), -cn);
            if (j - 1 > 0) T.emplace_back(r, id(i, j - 1), -cs);
            b[r] = -Vi * Wj * res.forcing(i, j);
        }
    Eigen::SparseMatrix<double> K(mx * my, mx * my);
    K.setFromTriplets(T.begin(), T.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    if (solver.info() != Eigen::Success) throw SolverError("divergence-form solve: factorization failed");
    Eigen::VectorXd z = solver.solve(b);
    for (int sweep = 0; sweep < 2; ++sweep) z += solver.solve(b - K * z);
    if (solver.info() != Eigen::Success || !z.allFinite()) throw SolverError("divergence-form solve: back-substitution failed");
    const double bn = b.norm();
    res.residual = bn > 0.0 ? (K * z - b).norm() / bn : (K * z - b).norm();
    if (res.residual > 1e-8) throw AccuracyError(fmt::format("divergence-form solve: residual {}", res.residual));

    res.w = Field(rhs.grid_ptr(), "w");
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) res.w(i, j) = z[id(i, j)];

    const Field& w = res.w;
    double grad = 0.0, pair = 0.0;
    for (int i = 0; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            double d = w(i + 1, j) - w(i, j);
            grad += op.W(j) * op.ae(i, j) * d * d / (g.x(i + 1) - g.x(i));
        }
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 0; j < ny - 1; ++j) {
            double d = w(i, j + 1) - w(i, j);
            grad += op.V(i) * op.an(i, j) * d * d / (g.y(j + 1) - g.y(j));
        }
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) pair += op.V(i) * op.W(j) * w(i, j) * res.forcing(i, j);
    res.energy_grad = grad;
    res.energy_pair = pair;
    return res;
}

namespace {

/// derivative of order m at node i0 (an end) from a least-squares quintic over a window of given width
double end_derivative(const std::vector<double>& x, const std::vector<double>& f, int i0, int m, double width) {
    const int n = static_cast<int>(x.size());
    const int dir = i0 == 0 ? 1 : -1;
    std::vector<int> idx;
    for (int k = 0; k < n; ++k) {
        const int i = i0 + dir * k;
        if (std::fabs(x[i] - x[i0]) > width && idx.size() >= 9) break;
        idx.push_back(i);
    }
    const int deg = std::min<int>(5, static_cast<int>(idx.size()) - 1);
    if (deg < m) return 0.0;
    const double h = std::max(std::fabs(x[idx.back()] - x[i0]), 1e-300);
    Eigen::MatrixXd A(idx.size(), deg + 1);
    Eigen::VectorXd b(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const double t = (x[idx[r]] - x[i0]) / h;
        double p = 1.0;
        for (int c = 0; c <= deg; ++c, p *= t) A(r, c) = p;
        b[r] = f[idx[r]];
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    double fact = 1.0;
    for (int k = 2; k <= m; ++k) fact *= k;
    return c[m] * fact / std::pow(h, m);
}

} // namespace

GridPtr make_euler_grid(const std::vector<double>& x, double Y_max, int ny, double beta) {
    if (ny < 8) throw ConfigError("Euler grid: ny must be >= 8");
    return make_grid(x, tanh_wall_nodes(0.0, Y_max, ny, beta));
}

EulerCorrector solve_stream_corrector(const EulerFlow& flow, int order, const Field& S, const std::vector<double>& vwall,
                                      const EulerCorrector* lower, SideChoice choice) {
    const GridPtr& gp = S.grid_ptr();
    const Grid& g = *gp;
    const int nx = g.nx(), ny = g.ny();
    if (static_cast<int>(vwall.size()) != nx) throw UsageError("stream corrector: wall trace size mismatch");
    if (order == 2 && !lower) throw UsageError("stream corrector: order 2 needs the order-1 corrector");
    const double L = g.length();

    EulerCorrector c;
    c.order = order;
    c.grid = gp;
    c.source = S;
    CorrectorBC& bc = c.bc;
    bc.choice = choice;
    bc.wall = cumulative_trapezoid(g.x(), vwall);
    const auto gpp = diff1d(g.x(), vwall, 1);
    const double gL = bc.wall.back();
    const double Fp0 = flow.feprime(0.0, 0.0), FpL = flow.feprime(L, 0.0);
    // h = g + S_YY - S_XX + (F' psi)_YY - (F' psi)_XX at a wall corner, h = side data
    auto quartic = [&](int i0, double s2) {
        const int n = std::min(nx, 5), m = std::min(ny, 6);
        std::vector<double> xs(n), Sx(n), Fg(n), ys(m), Sy(m);
        const int dir = i0 == 0 ? 1 : -1;
        for (int k = 0; k < n; ++k) {
            const int i = i0 + dir * k;
            xs[k] = g.x(i);
            Sx[k] = S(i, 0);
            Fg[k] = flow.feprime(g.x(i), 0.0) * bc.wall[i];
        }
        for (int k = 0; k < m; ++k) {
            ys[k] = g.y(k);
            Sy[k] = S(i0, k);
        }
        auto d = [](const std::vector<double>& z, const std::vector<double>& f, int order, int np) {
            auto w = fd_weights(z[0], z.data(), np, order);
            double r = 0.0;
            for (int k = 0; k < np; ++k) r += w[k] * f[k];
            return r;
        };
        const double X0 = g.x(i0), hF = 1e-3;
        const double FYY = (flow.feprime(X0, hF) - 2.0 * flow.feprime(X0, 0.0) + flow.feprime(X0, -hF)) / (hF * hF);
        const double g0 = bc.wall[i0];
        const double FpsiYY = FYY * g0 + flow.feprime(X0, 0.0) * s2;
        return end_derivative(g.x(), vwall, i0, 3, 0.25 * L) + d(ys, Sy, 2, m) - d(xs, Sx, 2, n) + FpsiYY - d(xs, Fg, 2, n);
    };
    bc.side0.resize(ny);
    bc.sideL.resize(ny);
    double curv0 = 0.0, curvL = 0.0;
    if (choice != SideChoice::exponential) {
        bc.s0 = S(0, 0) + Fp0 * bc.wall.front() - gpp.front();
        bc.sL = S(nx - 1, 0) + FpL * gL - gpp.back();
        if (choice == SideChoice::corner_compatible) {
            bc.q0 = quartic(0, bc.s0);
            bc.qL = quartic(nx - 1, bc.sL);
        }
        for (int j = 0; j < ny; ++j) {
            double Y = g.y(j), chi = cutoff(Y)[0], Y2 = Y * Y, Y4 = Y2 * Y2 / 24.0;
            bc.side0[j] = (0.5 * bc.s0 * Y2 + bc.q0 * Y4) * chi;
            bc.sideL[j] = (gL + 0.5 * bc.sL * Y2 + bc.qL * Y4) * chi;
        }
        curv0 = bc.s0;
        curvL = bc.sL;
    } else {
        const double Ym = g.height();
        for (int j = 0; j < ny; ++j) {
            double Y = g.y(j);
            bc.side0[j] = 0.0;
            bc.sideL[j] = gL * (std::exp(-Y) - Y / Ym * std::exp(-Ym));
        }
        curvL = gL;
    }
    bc.side0.back() = 0.0;
    bc.sideL.back() = 0.0;
    bc.corner_residual0 = gpp.front() + curv0 - Fp0 * bc.wall.front() - S(0, 0);
    bc.corner_residualL = gpp.back() + curvL - FpL * gL - S(nx - 1, 0);

    c.lift = Field(gp, "lift");
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double X = g.x(i), chi = cutoff(g.y(j))[0];
            c.lift(i, j) = (L - X) / L * bc.side0[j] + X / L * (bc.sideL[j] - chi * gL) + chi * bc.wall[i];
        }
    // exact corner values
    for (int i = 0; i < nx; ++i) c.lift(i, 0) = bc.wall[i];
    for (int j = 0; j < ny; ++j) {
        c.lift(0, j) = bc.side0[j];
        c.lift(nx - 1, j) = bc.sideL[j];
    }
    for (int i = 0; i < nx; ++i) c.lift(i, ny - 1) = 0.0;
    c.lift(0, 0) = bc.wall.front();
    c.lift(nx - 1, 0) = bc.wall.back();

    Field ue = Field::sample(gp, [&](double X, double Y) { return flow.u(X, Y); });
    Field rhs = ue * S;
    Field liftw(gp);
    for (std::size_t k = 0; k < g.size(); ++k) liftw[k] = c.lift[k] / ue[k];
    auto a = [&](double X, double Y) {
        double u = flow.u(X, Y);
        return u * u;
    };
    c.solve = solve_divergence_form(a, rhs, liftw);
    c.psi = Field(gp, fmt::format("psi{}", order));
    for (std::size_t k = 0; k < g.size(); ++k) c.psi[k] = ue[k] * c.solve.w[k] + c.lift[k];

    Field u = diff(c.psi, Axis::y, 1);
    Field v = -1.0 * diff(c.psi, Axis::x, 1);
    for (int i = 0; i < nx; ++i) v(i, 0) = -vwall[i];
    u.set_label(fmt::format("u{}e", order));
    v.set_label(fmt::format("v{}e", order));
    c.u = make_bundle(u);
    c.v = make_bundle(v);
    // continuity: v_Y = -u_X, the one-sided psi_X stencils on the sides are too rough for this
    c.v.fy = -1.0 * c.u.fx;
    c.v.fyy = -1.0 * diff(c.u.fx, Axis::y, 1);

    // pressure from the linearized momentum equations
    c.pX = Field(gp, fmt::format("p{}e_X", order));
    Field pYi(gp);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double X = g.x(i), Y = g.y(j);
            double u0 = flow.u(X, Y), u0X = flow.u(X, Y, 1, 0), u0Y = flow.u(X, Y, 0, 1);
            double v0 = flow.v(X, Y), v0X = flow.v(X, Y, 1, 0), v0Y = flow.v(X, Y, 0, 1);
            double px = -(u0 * c.u.fx(i, j) + u0X * c.u.f(i, j) + v0 * c.u.fy(i, j) + u0Y * c.v.f(i, j));
            double py = -(u0 * c.v.fx(i, j) + v0X * c.u.f(i, j) + v0 * c.v.fy(i, j) + v0Y * c.v.f(i, j));
            if (order == 2) {
                const Bundle &u1 = lower->u, &v1 = lower->v;
                px += -(u1.f(i, j) * u1.fx(i, j) + v1.f(i, j) * u1.fy(i, j)) + flow.lap_u(X, Y);
                py += -(u1.f(i, j) * v1.fx(i, j) + v1.f(i, j) * v1.fy(i, j)) + flow.lap_v(X, Y);
            }
            c.pX(i, j) = px;
            pYi(i, j) = py;
        }
    c.p = Field(gp, fmt::format("p{}e", order));
    {
        // anchored at the middle column: near the sides the data need not satisfy the vorticity
        // equation, and a curl error picked up there would shift p_Y at every later X
        const int ia = nx / 2;
        std::vector<double> col(pYi.column(ia), pYi.column(ia) + ny);
        auto p0 = tail_trapezoid(g.y(), col);
        for (int j = 0; j < ny; ++j) {
            std::vector<double> rowx = c.pX.row(j);
            auto cum = cumulative_trapezoid(g.x(), rowx);
            for (int i = 0; i < nx; ++i) c.p(i, j) = -p0[j] + cum[i] - cum[ia];
        }
    }
    c.pY = diff(c.p, Axis::y, 1);
    c.psi.check_finite();
    return c;
}

static std::vector<double> to_nodes(const std::vector<double>& src_x, const std::vector<double>& vals,
                                    const std::vector<double>& dst_x) {
    if (src_x == dst_x) return vals;
    CubicInterpolator I(src_x, Extrapolation::error);
    std::vector<double> out(dst_x.size());
    for (std::size_t k = 0; k < dst_x.size(); ++k) out[k] = I(vals.data(), dst_x[k]);
    return out;
}

EulerCorrector solve_corrector1(const EulerFlow& flow, const PrandtlSolution& prandtl, const GridPtr& grid,
                                SideChoice choice) {
    const Grid& bl = *prandtl.grid;
    std::vector<double> trace(bl.nx());
    for (int i = 0; i < bl.nx(); ++i) trace[i] = prandtl.v0b(i, 0);
    auto vwall = to_nodes(bl.x(), trace, grid->x());
    Field S(grid, "S1");
    return solve_stream_corrector(flow, 1, S, vwall, nullptr, choice);
}

SecondOrderForcing build_h_forcing(const EulerFlow& flow, const EulerCorrector& c1) {
    const GridPtr& gp = c1.grid;
    const Grid& g = *gp;
    SecondOrderForcing f{Field(gp, "H"), Field(gp, "quad")};
    for (int j = 0; j < g.ny(); ++j) {
        std::vector<double> integrand(g.nx());
        for (int i = 0; i < g.nx(); ++i) integrand[i] = flow.bilap_psi(g.x(i), g.y(j)) / flow.u(g.x(i), g.y(j));
        auto H = cumulative_trapezoid(g.x(), integrand);
        for (int i = 0; i < g.nx(); ++i) f.H(i, j) = H[i];
    }
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            double p1 = c1.psi(i, j);
            f.quad(i, j) = 0.5 * flow.fepp(g.x(i), g.y(j)) * p1 * p1;
        }
    return f;
}

EulerCorrector solve_corrector2(const EulerFlow& flow, const SecondOrderForcing& forcing,
                                const std::vector<double>& layer_x, const std::vector<double>& v1b_wall,
                                const EulerCorrector& c1, const GridPtr& grid, SideChoice choice) {
    if (!grid->same_nodes(*c1.grid)) throw UsageError("solve_corrector2: grid differs from the order-1 corrector grid");
    auto vwall = to_nodes(layer_x, v1b_wall, grid->x());
    Field S = forcing.quad + forcing.H;
    S.set_label("S2");
    return solve_stream_corrector(flow, 2, S, vwall, &c1, choice);
}

} // namespace pbl
