#include "pbl/ns_remainder.hpp"

#include "pbl/errors.hpp"

#include <Eigen/SparseLU>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace pbl {

namespace {

double first_spacing(double L, int n, double beta) {
    return tanh_two_sided_nodes(0.0, L, n, beta)[1];
}

double norm2(const Field& a, const Field& b) { return std::sqrt(integrate(a * a) + integrate(b * b)); }

} // namespace

GridPtr ns_grid(double L, double eps, const NSGridOptions& opt) {
    if (!(eps > 0.0) || !(L > 0.0)) throw DomainError("ns_grid: L and eps must be positive");
    if (opt.nx < 9 || opt.ny < 9) throw ConfigError("ns_grid: need at least 9 nodes per direction");
    const double target = opt.x_layer * eps;
    double beta = 0.0;
    if (target < L / (opt.nx - 1)) {
        auto f = [&](double b) { return first_spacing(L, opt.nx, b) - target; };
        double hi = 40.0;
        if (f(hi) > 0.0) {
            beta = hi;
        } else {
            std::uintmax_t it = 200;
            auto r = boost::math::tools::toms748_solve(f, 1e-6, hi, boost::math::tools::eps_tolerance<double>(40), it);
            beta = 0.5 * (r.first + r.second);
        }
    }
    auto x = tanh_two_sided_nodes(0.0, L, opt.nx, beta);
    const double by = tanh_beta_for_half(opt.Y_max, 4.0 * std::sqrt(eps));
    return make_grid(std::move(x), tanh_wall_nodes(0.0, opt.Y_max, opt.ny, by));
}

LinearizedProblem LinearizedProblem::from(const ApproximateSolution& a) {
    LinearizedProblem p;
    p.eps = a.eps;
    p.grid = a.grid;
    p.Us = a.U.f;
    p.UsX = a.U.fx;
    p.UsY = a.U.fy;
    p.lapUs = a.U.fxx + a.U.fyy;
    p.Vs = a.V.f;
    p.VsX = a.V.fx;
    p.VsY = a.V.fy;
    p.lapVs = a.V.fxx + a.V.fyy;
    return p;
}

struct LinearizedSolver::Factor {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

LinearizedSolver::~LinearizedSolver() = default;
LinearizedSolver::LinearizedSolver(LinearizedSolver&&) noexcept = default;
LinearizedSolver& LinearizedSolver::operator=(LinearizedSolver&&) noexcept = default;

LinearizedSolver::LinearizedSolver(LinearizedProblem p) : p_(std::move(p)) {
    if (!p_.grid) throw UsageError("linearized solver: no grid");
    if (!(p_.eps > 0.0)) throw DomainError("linearized solver: eps must be positive");
    const Grid& g = *p_.grid;
    for (const Field* f : {&p_.Us, &p_.UsX, &p_.UsY, &p_.lapUs, &p_.Vs, &p_.VsX, &p_.VsY, &p_.lapVs}) {
        if (f->empty() || !f->grid().same_nodes(g)) throw UsageError("linearized solver: coefficient on a different grid");
        f->check_finite();
    }
    const int nx = g.nx(), ny = g.ny();
    if (nx < 7 || ny < 7) throw UsageError("linearized solver: need at least 7 nodes per direction");
    const double eps = p_.eps;
    const auto& X = g.x();
    const auto& Y = g.y();

    // 1D weights at interior nodes: 3-point for orders 1, 2 and 5-point for orders 3, 4
    struct W1 {
        std::vector<double> d1, d2, d3, d4;
    };
    auto weights = [](const std::vector<double>& z, int k) {
        W1 w;
        w.d1 = fd_weights(z[k], &z[k - 1], 3, 1);
        w.d2 = fd_weights(z[k], &z[k - 1], 3, 2);
        w.d3 = fd_weights(z[k], &z[k - 2], 5, 3);
        w.d4 = fd_weights(z[k], &z[k - 2], 5, 4);
        return w;
    };
    std::vector<W1> wx(nx), wy(ny);
    for (int i = 2; i < nx - 2; ++i) wx[i] = weights(X, i);
    for (int j = 2; j < ny - 2; ++j) wy[j] = weights(Y, j);

    const auto N = static_cast<Eigen::Index>(g.size());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(N) * 21);
    interior_.assign(g.size(), 0);
    auto id = [&](int i, int j) { return static_cast<int>(g.index(i, j)); };

    const auto ny0 = fd_weights(Y[0], &Y[0], 3, 1), nyL = fd_weights(Y[ny - 1], &Y[ny - 3], 3, 1);
    const auto nx0 = fd_weights(X[0], &X[0], 3, 1), nxL = fd_weights(X[nx - 1], &X[nx - 3], 3, 1);

    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            const int r = id(i, j);
            if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
                t.emplace_back(r, r, 1.0);
                continue;
            }
            // clamp rows: d_Y Phi at the wall / top on rows 1 and ny-2, d_X Phi at the sides otherwise
            if (j == 1) {
                for (int b = 0; b < 3; ++b) t.emplace_back(r, id(i, b), ny0[b]);
                continue;
            }
            if (j == ny - 2) {
                for (int b = 0; b < 3; ++b) t.emplace_back(r, id(i, ny - 3 + b), nyL[b]);
                continue;
            }
            if (i == 1) {
                for (int a = 0; a < 3; ++a) t.emplace_back(r, id(a, j), nx0[a]);
                continue;
            }
            if (i == nx - 2) {
                for (int a = 0; a < 3; ++a) t.emplace_back(r, id(nx - 3 + a, j), nxL[a]);
                continue;
            }
            interior_[static_cast<std::size_t>(r)] = 1;
            const double us = p_.Us(i, j), vs = p_.Vs(i, j), lu = p_.lapUs(i, j), lv = p_.lapVs(i, j);
            const W1 &a = wx[i], &b = wy[j];
            for (int k = 0; k < 5; ++k) {
                double cx = us * a.d3[k] - eps * a.d4[k];
                double cy = vs * b.d3[k] - eps * b.d4[k];
                if (k >= 1 && k <= 3) {
                    cx -= lu * a.d1[k - 1];
                    cy -= lv * b.d1[k - 1];
                }
                t.emplace_back(r, id(i - 2 + k, j), cx);
                t.emplace_back(r, id(i, j - 2 + k), cy);
            }
            for (int ka = 0; ka < 3; ++ka)
                for (int kb = 0; kb < 3; ++kb) {
                    double c = us * a.d1[ka] * b.d2[kb] + vs * a.d2[ka] * b.d1[kb] - 2.0 * eps * a.d2[ka] * b.d2[kb];
                    t.emplace_back(r, id(i - 1 + ka, j - 1 + kb), c);
                }
        }
    A_.resize(N, N);
    A_.setFromTriplets(t.begin(), t.end());
    A_.makeCompressed();
    lu_ = std::make_unique<Factor>();
    lu_->lu.analyzePattern(A_);
    lu_->lu.factorize(A_);
    if (lu_->lu.info() != Eigen::Success)
        throw SolverError(fmt::format("linearized solver: factorization failed ({})", lu_->lu.lastErrorMessage()));
}

Field LinearizedSolver::apply(const Field& Phi) const {
    if (!Phi.grid().same_nodes(*p_.grid)) throw UsageError("apply: field on a different grid");
    Eigen::Map<const Eigen::VectorXd> x(Phi.values().data(), static_cast<Eigen::Index>(Phi.values().size()));
    Eigen::VectorXd y = A_ * x;
    Field out(p_.grid, "A Phi");
    for (std::size_t k = 0; k < out.values().size(); ++k)
        if (interior_[k]) out[k] = y[static_cast<Eigen::Index>(k)];
    return out;
}

Field LinearizedSolver::solve_stream(const Field& rhs, double* residual) const {
    if (!rhs.grid().same_nodes(*p_.grid)) throw UsageError("solve_stream: rhs on a different grid");
    rhs.check_finite();
    const auto N = static_cast<Eigen::Index>(rhs.values().size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
    for (Eigen::Index k = 0; k < N; ++k)
        if (interior_[static_cast<std::size_t>(k)]) b[k] = rhs[static_cast<std::size_t>(k)];
    Field Phi(p_.grid, "Phi");
    const double bn = b.norm();
    if (bn == 0.0) {
        if (residual) *residual = 0.0;
        return Phi;
    }
    Eigen::VectorXd x = lu_->lu.solve(b);
    if (lu_->lu.info() != Eigen::Success) throw SolverError("linearized solver: back substitution failed");
    Eigen::VectorXd r = b - A_ * x;
    // one refinement sweep
    x += lu_->lu.solve(r);
    r = b - A_ * x;
    const double res = r.norm() / bn;
    if (residual) *residual = res;
    for (Eigen::Index k = 0; k < N; ++k) Phi[static_cast<std::size_t>(k)] = x[k];
    // boundary rows are identities with zero data; drop the refinement round-off
    const Grid& g = *p_.grid;
    for (int i = 0; i < g.nx(); ++i) Phi(i, 0) = Phi(i, g.ny() - 1) = 0.0;
    for (int j = 0; j < g.ny(); ++j) Phi(0, j) = Phi(g.nx() - 1, j) = 0.0;
    Phi.check_finite();
    return Phi;
}

Field stream_rhs(const Field& F1, const Field& F2) {
    if (!F1.grid().same_nodes(F2.grid())) throw UsageError("stream_rhs: forcing on different grids");
    Field f = diff(F1, Axis::y, 1) - diff(F2, Axis::x, 1);
    f.set_label("dY F1 - dX F2");
    return f;
}

LinearizedSolution LinearizedSolver::recover(const Field& Phi, const Field& F1, const Field& F2) const {
    const Grid& g = *p_.grid;
    const int nx = g.nx(), ny = g.ny();
    const double eps = p_.eps;
    LinearizedSolution s;
    s.Phi = Phi;
    s.U = diff(Phi, Axis::y, 1);
    s.V = -1.0 * diff(Phi, Axis::x, 1);
    s.U.set_label("U");
    s.V.set_label("V");
    // the clamped data make both velocities vanish on the boundary; remove the rounding
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) s.U(i, j) = s.V(i, j) = 0.0;
    const Field Ux = diff(s.U, Axis::x, 1), Uy = diff(s.U, Axis::y, 1);
    const Field Vx = diff(s.V, Axis::x, 1), Vy = diff(s.V, Axis::y, 1);
    const Field lapU = diff(s.U, Axis::x, 2) + diff(s.U, Axis::y, 2);
    const Field lapV = diff(s.V, Axis::x, 2) + diff(s.V, Axis::y, 2);
    Field px(p_.grid), py(p_.grid);
    for (std::size_t k = 0; k < g.size(); ++k) {
        px[k] = F1[k] - (p_.Us[k] * Ux[k] + p_.UsX[k] * s.U[k] + p_.Vs[k] * Uy[k] + p_.UsY[k] * s.V[k] - eps * lapU[k]);
        py[k] = F2[k] - (p_.Us[k] * Vx[k] + p_.VsX[k] * s.U[k] + p_.Vs[k] * Vy[k] + p_.VsY[k] * s.V[k] - eps * lapV[k]);
    }
    s.P = Field(p_.grid, "P");
    std::vector<double> col(py.column(0), py.column(0) + ny);
    auto P0 = cumulative_trapezoid(g.y(), col);
    for (int j = 0; j < ny; ++j) {
        auto cum = cumulative_trapezoid(g.x(), px.row(j));
        for (int i = 0; i < nx; ++i) s.P(i, j) = P0[j] + cum[i];
    }
    return s;
}

LinearizedSolution LinearizedSolver::solve(const Field& F1, const Field& F2) const {
    F1.check_finite();
    F2.check_finite();
    if (!F1.grid().same_nodes(*p_.grid) || !F2.grid().same_nodes(*p_.grid))
        throw UsageError("solve: forcing on a different grid");
    double res = 0.0;
    Field Phi = solve_stream(stream_rhs(F1, F2), &res);
    if (res > 1e-8) throw AccuracyError(fmt::format("linearized solver: relative residual {:.3e} exceeds 1e-8", res));
    auto s = recover(Phi, F1, F2);
    s.residual = res;
    return s;
}

double prop_ratio(const LinearizedSolver& solver, const Field& F1, const Field& F2) {
    const double fn = l2_norm(F1) + l2_norm(F2);
    if (!(fn > 0.0)) throw DomainError("prop_ratio: zero forcing");
    auto s = solver.solve(F1, F2);
    const double se = std::sqrt(solver.problem().eps);
    auto grad = [](const Field& f) { return norm2(diff(f, Axis::x, 1), diff(f, Axis::y, 1)); };
    return (l2_norm(s.U) + l2_norm(s.V) + se * grad(s.U) + se * grad(s.V)) / fn;
}

double LemmaSides::constant() const {
    if (lhs == 0.0) return 0.0;
    return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
}

Field quotient_field(const Field& Phi, const Field& Us) {
    const Grid& g = Phi.grid();
    if (!g.same_nodes(Us.grid())) throw UsageError("quotient_field: grids differ");
    Field G(Phi.grid_ptr(), "G");
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 1; j < g.ny(); ++j) {
            const double u = Us(i, j);
            if (!(u > 0.0)) throw DomainError(fmt::format("quotient_field: U_s = {} at (X={}, Y={})", u, g.x(i), g.y(j)));
            G(i, j) = Phi(i, j) / u;
        }
    return G;
}

ProbeReport lemma_probes(const LinearizedSolver& solver, const Field& Phi, const Field& F1, const Field& F2,
                         double delta) {
    const LinearizedProblem& p = solver.problem();
    const Grid& g = *p.grid;
    const double L = g.length(), eps = p.eps, se = std::sqrt(eps);
    ProbeReport r;
    r.delta = delta > 0.0 ? delta : std::max(std::sqrt(L), std::pow(eps, 0.25));
    WeightedNormConfig cfg;
    cfg.eps = eps;
    cfg.Us = &p.Us;
    cfg.weight = WeightKind::eta_delta;
    cfg.delta = r.delta;
    cfg.validate(L);
    cfg.weight = WeightKind::none;

    const Field G = quotient_field(Phi, p.Us);
    r.norms = quotient_norms(G, cfg);
    const Field f = stream_rhs(F1, F2);
    const double XY = r.norms.X_sq + r.norms.Y_sq;

    r.basic.lhs = r.norms.Y_sq;
    r.basic.rhs = r.norms.X_sq + std::fabs(inner(f, G));

    const Field Gx = diff(G, Axis::x, 1), Gy = diff(G, Axis::y, 1);
    Field form(p.grid), Gw(p.grid);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            const double u = p.Us(i, j);
            form(i, j) = 1.5 * u * u * Gx(i, j) * Gx(i, j) + 0.5 * u * u * Gy(i, j) * Gy(i, j) +
                         p.Vs(i, j) * u * Gx(i, j) * Gy(i, j);
            Gw(i, j) = G(i, j) * (L - g.x(i));
        }
    r.derivative.lhs = integrate(form);
    r.derivative.rhs = (L + se) * XY + std::fabs(inner(f, Gw));

    const Field Px = diff(Phi, Axis::x, 1), Py = diff(Phi, Axis::y, 1);
    Field aw(p.grid);
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 1; j < g.ny(); ++j) {
            const double w = eta_delta(g.y(j), r.delta);
            if (w == 0.0) continue;
            const double q = Px(i, j) + p.Vs(i, j) / p.Us(i, j) * Py(i, j);
            aw(i, j) = q * q * w;
        }
    r.away.lhs = integrate(aw);
    r.away.rhs = (L + se) * XY + integrate(F1 * F1) + integrate(F2 * F2);
    return r;
}

PicardResult picard_solve(const LinearizedSolver& solver, const Field& R1, const Field& R2, const PicardOptions& opt) {
    const LinearizedProblem& p = solver.problem();
    const double eps = p.eps, e32 = std::pow(eps, 1.5);
    R1.check_finite();
    R2.check_finite();
    const double tol = opt.tol_factor * e32;
    const double Rn = norm2(R1, R2);
    PicardResult out;
    ContractionState& st = out.state;
    st.C1 = Rn / e32;
    out.U = Field(p.grid, "U");
    out.V = Field(p.grid, "V");
    out.P = Field(p.grid, "P");
    out.Phi = Field(p.grid, "Phi");
    // T is affine, so each step solves for the increment T(U_n) - U_n = L^-1 (F_n - F_{n-1}).
    // The absolute iterate carries the rounding floor of the fourth-order solve (about 1e-9 of
    // ||U||_Z), which would stall the steps above tol; the increments do not.
    Field F1_prev(p.grid), F2_prev(p.grid);
    int bad = 0;
    for (int n = 1; n <= opt.max_iter; ++n) {
        Field F1 = -1.0 * R1, F2 = -1.0 * R2;
        if (n > 1) {
            const Field Ux = diff(out.U, Axis::x, 1), Uy = diff(out.U, Axis::y, 1);
            const Field Vx = diff(out.V, Axis::x, 1), Vy = diff(out.V, Axis::y, 1);
            for (std::size_t k = 0; k < F1.values().size(); ++k) {
                F1[k] -= out.U[k] * Ux[k] + out.V[k] * Uy[k];
                F2[k] -= out.U[k] * Vx[k] + out.V[k] * Vy[k];
            }
        }
        const Field d1 = F1 - F1_prev, d2 = F2 - F2_prev;
        double res = 0.0;
        const Field dPhi = solver.solve_stream(stream_rhs(d1, d2), &res);
        if (res > 1e-8) throw AccuracyError(fmt::format("picard: relative residual {:.3e} exceeds 1e-8", res));
        const auto dW = solver.recover(dPhi, d1, d2);
        const double step = z_norm(dW.U, dW.V, eps).total;
        out.Phi += dPhi;
        out.U += dW.U;
        out.V += dW.V;
        F1_prev = F1;
        F2_prev = F2;
        if (n == 1 && Rn > 0.0) st.C2 = step / Rn;
        st.steps.push_back(step);
        st.iterates = n;
        if (n >= 2) {
            const double prev = st.steps[st.steps.size() - 2];
            const double ratio = prev > 0.0 ? step / prev : 0.0;
            st.ratios.push_back(ratio);
            st.factor = std::max(st.factor, ratio);
            bad = ratio >= 1.0 ? bad + 1 : 0;
        }
        if (bad >= 3)
            throw DivergenceError(fmt::format("picard: three consecutive ratios >= 1 at eps = {:.3e} (last {:.3f})", eps,
                                              st.ratios.back()));
        if (step < tol) {
            st.converged = true;
            break;
        }
    }
    out.P = solver.recover(out.Phi, F1_prev, F2_prev).P;
    if (!st.converged)
        throw DivergenceError(fmt::format("picard: no convergence in {} iterates at eps = {:.3e}", opt.max_iter, eps));
    st.z = z_norm(out.U, out.V, eps);
    for (std::size_t k = 0; k < out.U.values().size(); ++k)
        st.sup = std::max(st.sup, std::hypot(out.U[k], out.V[k]));
    st.sup_ratio = st.sup / std::pow(eps, 0.875);
    st.C0 = st.C1 * st.C2 + 1.0;
    st.in_ball = st.z.total <= st.C0 * e32;
    return out;
}

std::pair<Field, Field> smooth_forcing(const GridPtr& grid) {
    const double L = grid->length(), H = grid->height();
    const double pi = std::acos(-1.0);
    auto F1 = Field::sample(grid, [&](double X, double Y) {
        return std::sin(pi * X / L) * std::sin(pi * Y / H) * (1.0 + Y) * std::exp(-Y);
    }, "F1");
    auto F2 = Field::sample(grid, [&](double X, double Y) {
        return 0.5 * std::sin(2.0 * pi * X / L) * std::sin(pi * Y / H) * std::exp(-Y);
    }, "F2");
    return {F1, F2};
}

std::pair<Field, Field> random_forcing(const GridPtr& grid, std::uint64_t seed) {
    const double L = grid->length(), H = grid->height();
    const double pi = std::acos(-1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), rate(0.5, 4.0);
    std::uniform_int_distribution<int> mode(1, 4);
    struct Term {
        double a, b;
        int kx, ky;
    };
    auto draw = [&]() {
        std::vector<Term> v(3);
        for (auto& t : v) t = {amp(rng), rate(rng), mode(rng), mode(rng)};
        return v;
    };
    const auto t1 = draw(), t2 = draw();
    auto eval = [&](const std::vector<Term>& ts, double X, double Y) {
        double s = 0.0;
        for (const auto& t : ts) s += t.a * std::sin(t.kx * pi * X / L) * std::sin(t.ky * pi * Y / H) * std::exp(-t.b * Y);
        return s;
    };
    return {Field::sample(grid, [&](double X, double Y) { return eval(t1, X, Y); }, "F1"),
            Field::sample(grid, [&](double X, double Y) { return eval(t2, X, Y); }, "F2")};
}

double HardyRow::change() const { return C > 0.0 ? std::fabs(C_fine / C - 1.0) : std::numeric_limits<double>::infinity(); }

bool HardyCorpusReport::finite() const {
    if (rows.empty()) return false;
    for (const auto& r : rows)
        if (!std::isfinite(r.C) || !std::isfinite(r.C_fine) || !(r.C > 0.0)) return false;
    return true;
}

double HardyCorpusReport::max_change() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.change());
    return m;
}

HardyCorpusReport hardy_corpus(const ExpansionProfiles& prof, double eps, const HardyCorpusOptions& opt) {
    if (opt.profiles < 1) throw UsageError("hardy_corpus: need at least one profile");
    const double L = prof.physical_grid->length();
    const double beta = tanh_beta_for_half(opt.Y_max, 4.0 * std::sqrt(eps));
    auto column = [&](int ny) {
        auto g = make_grid({0.0, 0.25 * L, 0.5 * L, 0.75 * L}, tanh_wall_nodes(0.0, opt.Y_max, ny, beta));
        auto a = assemble(prof, eps, g);
        return std::make_pair(g->y(), std::vector<double>(a.U.f.column(2), a.U.f.column(2) + ny));
    };
    const auto [Yc, Uc] = column(opt.ny);
    const auto [Yf, Uf] = column(2 * opt.ny - 1);

    // H = sum a_k (Y/l_k)^m_k exp(-Y/l_k), scales from sqrt(eps)/2 to 1
    struct Term {
        double a, l;
        int m;
    };
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), lg(std::log10(0.5 * std::sqrt(eps)), 0.0);
    std::uniform_int_distribution<int> pw(0, 2);
    std::vector<std::vector<Term>> corpus(opt.profiles);
    for (auto& c : corpus) {
        c.resize(3);
        for (auto& t : c) t = {amp(rng), std::pow(10.0, lg(rng)), pw(rng)};
    }
    auto sample = [](const std::vector<Term>& c, const std::vector<double>& Y) {
        std::vector<double> h(Y.size(), 0.0);
        for (std::size_t j = 0; j < Y.size(); ++j)
            for (const auto& t : c) h[j] += t.a * std::pow(Y[j] / t.l, t.m) * std::exp(-Y[j] / t.l);
        return h;
    };
    HardyCorpusReport rep;
    rep.eps = eps;
    for (double xi : opt.xis) {
        HardyRow row;
        row.xi = xi;
        for (const auto& c : corpus) {
            row.C = std::max(row.C, hardy_probe(Yc, sample(c, Yc), Uc, xi, eps).constant());
            row.C_fine = std::max(row.C_fine, hardy_probe(Yf, sample(c, Yf), Uf, xi, eps).constant());
        }
        rep.rows.push_back(row);
    }
    return rep;
}

TheoremRatios theorem_ratios(const ApproximateSolution& a, const Field& U, const Field& V) {
    if (!a.base || a.U0.empty()) throw UsageError("theorem_ratios: needs an assembled expansion");
    const Grid& g = *a.grid;
    const double s = std::sqrt(a.eps);
    TheoremRatios t;
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.ny(); ++j) {
            const std::size_t k = g.index(i, j);
            t.u = std::max(t.u, std::fabs(a.U.f[k] + U[k] - a.U0[k]) / s);
            t.v = std::max(t.v, std::fabs(a.V.f[k] + V[k] - a.base->v(g.x(i), g.y(j))) / s);
        }
    return t;
}

std::string contraction_csv(const ContractionState& s) {
    std::string out = "iterate,step_Z,ratio\n";
    for (std::size_t n = 0; n < s.steps.size(); ++n)
        out += fmt::format("{},{:.6e},{}\n", n + 1, s.steps[n], n == 0 ? std::string() : fmt::format("{:.6e}", s.ratios[n - 1]));
    return out;
}

} // namespace pbl
