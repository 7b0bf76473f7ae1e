#include "pbl/bl_march.hpp"

#include "pbl/errors.hpp"

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace pbl {

namespace {

/// fraction of the inflow wall shear below which a Newton failure is reported as separation
constexpr double kSeparationFraction = 0.25;

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

std::vector<std::vector<int>> station_blocks(int nx) {
    if (nx < 3) throw UsageError("march: need at least 3 stations");
    std::vector<std::vector<int>> b;
    b.push_back({1, 2});
    for (int i = 3; i < nx; ++i) b.push_back({i});
    return b;
}

/// Shared bookkeeping for one block of stations.
struct Block {
    const std::vector<int>& S;
    std::vector<int> loc;
    int N;
    Block(const std::vector<int>& s, int nx, int ny) : S(s), loc(nx, -1), N(ny) {
        for (std::size_t k = 0; k < s.size(); ++k) loc[s[k]] = static_cast<int>(k);
    }
    int size() const { return 2 * N * static_cast<int>(S.size()); }
    int ui(int s, int j) const { return s * 2 * N + 2 * j; }
    int vi(int s, int j) const { return s * 2 * N + 2 * j + 1; }
};

// Generic residual/Jacobian assembly. `mom` adds the interior momentum row,
// `bc` gives wall/far values.
template <class Mom>
void assemble(const Block& B, const Grid& g, const std::vector<Stencil>& xst, const std::vector<double>& U,
              const std::vector<double>& V, const std::vector<double>& wall, const std::vector<double>& far,
              Mom&& mom, Vec& F, std::vector<Eigen::Triplet<double>>& T) {
    const int N = B.N;
    F.setZero(B.size());
    T.clear();
    auto at = [&](int i, int j) { return static_cast<std::size_t>(i) * N + j; };
    for (std::size_t s = 0; s < B.S.size(); ++s) {
        const int i = B.S[s];
        const Stencil& xs = xst[i];
        auto Dx = [&](int j) {
            double a = 0.0;
            for (int q = 0; q < xs.n; ++q) a += xs.w[q] * U[at(xs.first + q, j)];
            return a;
        };
        const int si = static_cast<int>(s);
        // wall
        F[B.ui(si, 0)] = U[at(i, 0)] - wall[i];
        T.emplace_back(B.ui(si, 0), B.ui(si, 0), 1.0);
        F[B.vi(si, 0)] = V[at(i, 0)];
        T.emplace_back(B.vi(si, 0), B.vi(si, 0), 1.0);
        // far field
        F[B.ui(si, N - 1)] = U[at(i, N - 1)] - far[i];
        T.emplace_back(B.ui(si, N - 1), B.ui(si, N - 1), 1.0);
        for (int j = 1; j < N - 1; ++j) mom(si, i, j, Dx(j), F, T);
        for (int j = 1; j < N; ++j) {
            const int r = B.vi(si, j);
            const double h = g.y(j) - g.y(j - 1);
            F[r] = V[at(i, j)] - V[at(i, j - 1)] + 0.5 * h * (Dx(j) + Dx(j - 1));
            T.emplace_back(r, B.vi(si, j), 1.0);
            T.emplace_back(r, B.vi(si, j - 1), -1.0);
            for (int q = 0; q < xs.n; ++q) {
                int k = B.loc[xs.first + q];
                if (k < 0) continue;
                T.emplace_back(r, B.ui(k, j), 0.5 * h * xs.w[q]);
                T.emplace_back(r, B.ui(k, j - 1), 0.5 * h * xs.w[q]);
            }
        }
    }
}

void scatter(const Block& B, const Vec& z, std::vector<double>& U, std::vector<double>& V) {
    const int N = B.N;
    for (std::size_t s = 0; s < B.S.size(); ++s)
        for (int j = 0; j < N; ++j) {
            U[static_cast<std::size_t>(B.S[s]) * N + j] = z[B.ui(static_cast<int>(s), j)];
            V[static_cast<std::size_t>(B.S[s]) * N + j] = z[B.vi(static_cast<int>(s), j)];
        }
}

Vec gather(const Block& B, const std::vector<double>& U, const std::vector<double>& V) {
    const int N = B.N;
    Vec z(B.size());
    for (std::size_t s = 0; s < B.S.size(); ++s)
        for (int j = 0; j < N; ++j) {
            z[B.ui(static_cast<int>(s), j)] = U[static_cast<std::size_t>(B.S[s]) * N + j];
            z[B.vi(static_cast<int>(s), j)] = V[static_cast<std::size_t>(B.S[s]) * N + j];
        }
    return z;
}

// continuity at station 0 after the march
void fill_station0(const Grid& g, const std::vector<Stencil>& xst, const std::vector<double>& U, std::vector<double>& V) {
    const int N = g.ny();
    const Stencil& xs = xst[0];
    auto Dx = [&](int j) {
        double a = 0.0;
        for (int q = 0; q < xs.n; ++q) a += xs.w[q] * U[static_cast<std::size_t>(xs.first + q) * N + j];
        return a;
    };
    V[0] = 0.0;
    for (int j = 1; j < N; ++j) V[j] = V[j - 1] - 0.5 * (g.y(j) - g.y(j - 1)) * (Dx(j) + Dx(j - 1));
}

void check_size(const std::vector<double>& v, int n, const char* what) {
    if (static_cast<int>(v.size()) != n) throw UsageError(fmt::format("march: '{}' has {} entries, expected {}", what, v.size(), n));
}

} // namespace

NonlinearMarchResult march_prandtl(const NonlinearMarchInput& in) {
    const Grid& g = *in.grid;
    const int nx = g.nx(), N = g.ny();
    check_size(in.ue, nx, "ue");
    check_size(in.px, nx, "px");
    check_size(in.inflow, N, "inflow");
    auto xst = derivative_stencils(g.x(), 1, Scheme::biased);
    auto d1 = derivative_stencils(g.y(), 1), d2 = derivative_stencils(g.y(), 2);
    std::vector<double> U(g.size(), 0.0), V(g.size(), 0.0);
    std::vector<double> wall(nx, 0.0);
    for (int j = 0; j < N; ++j) U[j] = in.inflow[j];
    NonlinearMarchResult res;
    res.iterations.assign(nx, 0);

    Vec F;
    std::vector<Eigen::Triplet<double>> T;
    Eigen::SparseLU<SpMat> lu;
    auto wall_shear = [&](int i) {
        double tau = 0.0;
        for (int q = 0; q < d1[0].n; ++q) tau += d1[0].w[q] * U[static_cast<std::size_t>(i) * N + d1[0].first + q];
        return tau;
    };
    double tau_in = 0.0, tau_last = 0.0, tau_prev = 0.0, x_last = g.x(0), x_prev = g.x(0);
    for (int q = 0; q < d1[0].n; ++q) tau_in += d1[0].w[q] * in.inflow[d1[0].first + q];
    tau_last = tau_in;
    // Newton fails just ahead of a separation point (the wall shear collapses like a square root)
    auto fail = [&](const std::string& why, int st) {
        // tau^2 extrapolated linearly in x reaches zero within a few steps
        bool collapsing = false;
        if (x_last > x_prev && tau_last < tau_prev) {
            const double slope = (tau_last * tau_last - tau_prev * tau_prev) / (x_last - x_prev);
            collapsing = x_last - tau_last * tau_last / slope - x_last <= 3.0 * (x_last - x_prev);
        }
        if (collapsing || tau_last < kSeparationFraction * tau_in)
            throw SeparationError(fmt::format("separation ahead of station {} (x = {}): wall shear fell from {} to {}, {}", st,
                                              g.x(st), tau_in, tau_last, why),
                                  st);
        throw MarchError(fmt::format("Prandtl march: {} at station {} (wall shear {} of {})", why, st, tau_last, tau_in), st);
    };
    for (const auto& S : station_blocks(nx)) {
        Block B(S, nx, N);
        // initial guess: previous known station
        const int prev = S.front() - 1;
        for (int i : S)
            for (int j = 0; j < N; ++j) {
                U[static_cast<std::size_t>(i) * N + j] = U[static_cast<std::size_t>(prev) * N + j];
                V[static_cast<std::size_t>(i) * N + j] = V[static_cast<std::size_t>(prev) * N + j];
            }
        auto mom = [&](int s, int i, int j, double dx, Vec& Fv, std::vector<Eigen::Triplet<double>>& Tv) {
            const std::size_t c = static_cast<std::size_t>(i) * N;
            const int r = B.ui(s, j);
            const double u = U[c + j], v = V[c + j];
            const Stencil &a = d1[j], &b = d2[j];
            double uy = 0.0, uyy = 0.0;
            for (int m = 0; m < 3; ++m) {
                uy += a.w[m] * U[c + a.first + m];
                uyy += b.w[m] * U[c + b.first + m];
            }
            Fv[r] = u * dx + v * uy - uyy + in.px[i];
            const Stencil& xs = xst[i];
            for (int q = 0; q < xs.n; ++q) {
                int k = B.loc[xs.first + q];
                if (k >= 0) Tv.emplace_back(r, B.ui(k, j), u * xs.w[q]);
            }
            Tv.emplace_back(r, B.ui(s, j), dx);
            for (int m = 0; m < 3; ++m) Tv.emplace_back(r, B.ui(s, a.first + m), v * a.w[m] - b.w[m]);
            Tv.emplace_back(r, B.vi(s, j), uy);
        };
        auto residual_norm = [&]() {
            assemble(B, g, xst, U, V, wall, in.ue, mom, F, T);
            return F.norm();
        };
        bool converged = false;
        int it = 0;
        for (; it < in.newton.max_iter; ++it) {
            assemble(B, g, xst, U, V, wall, in.ue, mom, F, T);
            const double f0 = F.norm();
            SpMat J(B.size(), B.size());
            J.setFromTriplets(T.begin(), T.end());
            lu.compute(J);
            if (lu.info() != Eigen::Success)
                fail("singular Newton matrix", S.front());
            Vec dz = lu.solve(-F);
            Vec z0 = gather(B, U, V);
            double lam = 1.0;
            for (int ls = 0; ls < 12; ++ls) {
                scatter(B, z0 + lam * dz, U, V);
                if (residual_norm() < f0 || f0 < 1e-14) break;
                lam *= 0.5;
            }
            double step = lam * dz.lpNorm<Eigen::Infinity>();
            if (!std::isfinite(step))
                fail("Newton diverged", S.front());
            if (step <= in.newton.tol * std::max(1.0, z0.lpNorm<Eigen::Infinity>())) {
                converged = true;
                ++it;
                break;
            }
        }
        if (!converged)
            fail("Newton did not converge", S.front());
        for (int i : S) {
            res.iterations[i] = it;
            const double tau = wall_shear(i);
            tau_prev = tau_last;
            x_prev = x_last;
            tau_last = tau;
            x_last = g.x(i);
            if (!(tau > 0.0))
                throw SeparationError(fmt::format("separation detected: wall shear {} at station {} (x = {})", tau, i, g.x(i)), i);
        }
    }
    fill_station0(g, xst, U, V);
    res.u = Field(in.grid, std::move(U), "u0p");
    res.v = Field(in.grid, std::move(V), "v0p");
    return res;
}

LinearMarchResult march_linear(const LinearMarchInput& in) {
    const Grid& g = *in.grid;
    const int nx = g.nx(), N = g.ny();
    check_size(in.wall, nx, "wall");
    check_size(in.far, nx, "far");
    check_size(in.inflow, N, "inflow");
    auto xst = derivative_stencils(g.x(), 1, Scheme::biased);
    auto d1 = derivative_stencils(g.y(), 1), d2 = derivative_stencils(g.y(), 2);
    std::vector<double> U(g.size(), 0.0), W(g.size(), 0.0);
    for (int j = 0; j < N; ++j) U[j] = in.inflow[j];

    Vec F;
    std::vector<Eigen::Triplet<double>> T;
    Eigen::SparseLU<SpMat> lu;
    for (const auto& S : station_blocks(nx)) {
        Block B(S, nx, N);
        auto mom = [&](int s, int i, int j, double dx, Vec& Fv, std::vector<Eigen::Triplet<double>>& Tv) {
            const std::size_t c = static_cast<std::size_t>(i) * N;
            const int r = B.ui(s, j);
            const double ub = in.ubar[c + j], vb = in.vbar[c + j], ubx = in.ubar_x[c + j], uby = in.ubar_y[c + j];
            const Stencil &a = d1[j], &b = d2[j];
            double uy = 0.0, uyy = 0.0;
            for (int m = 0; m < 3; ++m) {
                uy += a.w[m] * U[c + a.first + m];
                uyy += b.w[m] * U[c + b.first + m];
            }
            Fv[r] = ub * dx + ubx * U[c + j] + vb * uy + uby * W[c + j] - uyy - in.rhs[c + j];
            const Stencil& xs = xst[i];
            for (int q = 0; q < xs.n; ++q) {
                int k = B.loc[xs.first + q];
                if (k >= 0) Tv.emplace_back(r, B.ui(k, j), ub * xs.w[q]);
            }
            Tv.emplace_back(r, B.ui(s, j), ubx);
            for (int m = 0; m < 3; ++m) Tv.emplace_back(r, B.ui(s, a.first + m), vb * a.w[m] - b.w[m]);
            Tv.emplace_back(r, B.vi(s, j), uby);
        };
        assemble(B, g, xst, U, W, in.wall, in.far, mom, F, T);
        SpMat J(B.size(), B.size());
        J.setFromTriplets(T.begin(), T.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw MarchError(fmt::format("linear march: singular station matrix at station {}", S.front()), S.front());
        Vec dz = lu.solve(-F);
        // one refinement sweep; the station matrices mix 1/dx and 1/dy^2 scales
        Vec r = J * dz + F;
        dz -= lu.solve(r);
        Vec z = gather(B, U, W) + dz;
        if (!z.allFinite()) throw MarchError(fmt::format("linear march: non-finite solution at station {}", S.front()), S.front());
        scatter(B, z, U, W);
    }
    fill_station0(g, xst, U, W);
    LinearMarchResult r;
    r.u = Field(in.grid, std::move(U), "u");
    r.w = Field(in.grid, std::move(W), "w");
    return r;
}

Field integrate_continuity(const Field& u) {
    const Grid& g = u.grid();
    Field ux = diff(u, Axis::x, 1, Scheme::biased);
    Field w(u.grid_ptr(), "w");
    for (int i = 0; i < g.nx(); ++i) {
        const double* c = ux.column(i);
        double* o = w.column(i);
        o[0] = 0.0;
        for (int j = 1; j < g.ny(); ++j) o[j] = o[j - 1] - 0.5 * (g.y(j) - g.y(j - 1)) * (c[j] + c[j - 1]);
    }
    return w;
}

} // namespace pbl
