#include "pbl/blasius.hpp"
#include "pbl/errors.hpp"
#include "pbl/prandtl_zero.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace pbl;

namespace {

using State = std::array<double, 3>;

/// f''' + f f'' + b (1 - f'^2) = 0, independent of the library's Blasius solver
struct FalknerSkan {
    double b;
    void operator()(const State& s, State& d, double) const {
        d[0] = s[1];
        d[1] = s[2];
        d[2] = -s[0] * s[2] - b * (1 - s[1] * s[1]);
    }
};

struct SimilarityTable {
    double fpp0 = 0.0, h = 1e-3;
    std::vector<double> fp;
    double operator()(double eta) const {
        if (eta >= h * (fp.size() - 1)) return 1.0;
        const int k = static_cast<int>(eta / h);
        const double t = eta / h - k;
        return fp[k] * (1 - t) + fp[k + 1] * t;
    }
};

SimilarityTable falkner_skan(double b) {
    namespace ode = boost::numeric::odeint;
    auto shoot = [&](double a) {
        State s{0, 0, a};
        ode::integrate_const(ode::runge_kutta4<State>(), FalknerSkan{b}, s, 0.0, 8.0, 1e-3);
        return s[1] - 1;
    };
    boost::uintmax_t it = 100;
    auto r = boost::math::tools::toms748_solve(shoot, 0.4 + 0.5 * b, 1.4, boost::math::tools::eps_tolerance<double>(50), it);
    SimilarityTable t;
    t.fpp0 = 0.5 * (r.first + r.second);
    State s{0, 0, t.fpp0};
    ode::runge_kutta4<State> st;
    for (int k = 0; k <= 8000; ++k) {
        t.fp.push_back(s[1]);
        st.do_step(FalknerSkan{b}, s, k * t.h, t.h);
    }
    return t;
}

} // namespace

TEST(Blasius, ClassicalConstants) {
    const auto& b = blasius();
    EXPECT_NEAR(b.wall_curvature(), 0.332057, 2e-6);
    EXPECT_NEAR(b.displacement(), 1.7207876, 1e-5);
    EXPECT_NEAR(b.fp(12.0), 1.0, 1e-8);
    // f''' + f f''/2 = 0 at an interior point
    const double e = 2.0, h = 1e-3;
    const double f3 = (b.fpp(e + h) - b.fpp(e - h)) / (2 * h);
    EXPECT_NEAR(f3 + 0.5 * b.f(e) * b.fpp(e), 0.0, 1e-5);
}

TEST(Blasius, AgreesWithIndependentShooting) {
    // Blasius in the f''' + f f'' = 0 scaling: eta' = eta / sqrt(2)
    auto t = falkner_skan(0.0);
    EXPECT_NEAR(t.fpp0, 0.469600, 2e-6);
    for (double e : {0.5, 1.0, 2.5, 4.0}) EXPECT_NEAR(blasius().fp(e), t(e / std::sqrt(2.0)), 2e-5);
}

class FalknerSkanMarch : public ::testing::TestWithParam<double> {};

TEST_P(FalknerSkanMarch, WallShearAndProfile) {
    const double m = GetParam(), b = 2 * m / (m + 1);
    auto t = falkner_skan(b);
    const int nx = 65, ny = 801;
    auto g = make_grid(uniform_nodes(0, 0.25, nx), uniform_nodes(0, 20, ny));
    auto ue = [&](double x) { return std::pow(x + 1, m); };
    auto eta = [&](double x, double y) { return y * std::sqrt((m + 1) * ue(x) / (2 * (x + 1))); };
    NonlinearMarchInput in;
    in.grid = g;
    for (int i = 0; i < nx; ++i) {
        const double x = g->x(i);
        in.ue.push_back(ue(x));
        in.px.push_back(-ue(x) * m * std::pow(x + 1, m - 1));
    }
    for (int j = 0; j < ny; ++j) in.inflow.push_back(ue(0) * t(eta(0, g->y(j))));
    auto res = march_prandtl(in);
    double err = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            err = std::max(err, std::fabs(res.u(i, j) - ue(g->x(i)) * t(eta(g->x(i), g->y(j)))));
    EXPECT_LT(err, 2e-3);
    const double x = 0.25, dy = g->y(1);
    const double tau = (-3 * res.u(nx - 1, 0) + 4 * res.u(nx - 1, 1) - res.u(nx - 1, 2)) / (2 * dy);
    const double exact = ue(x) * t.fpp0 * std::sqrt((m + 1) * ue(x) / (2 * (x + 1)));
    EXPECT_NEAR(tau / exact, 1.0, 5e-3);
}

INSTANTIATE_TEST_SUITE_P(Wedges, FalknerSkanMarch, ::testing::Values(0.0, 0.1, 0.3));

TEST(PrandtlMarch, BlasiusWallShearUnderShearFlow) {
    auto flow = make_flow(FlowKind::shear, {0.1, 0.0, 1.0});
    double prev = 0.0;
    for (int n : {33, 65}) {
        auto g = make_layer_grid(0.25, 20.0, n, 16 * (n - 1) + 1);
        auto in = make_blasius_inflow(flow, g->y());
        auto sol = solve_prandtl(flow, in, g);
        double worst = 0.0;
        for (int i = 0; i < g->nx(); ++i) {
            const double ref = blasius().wall_curvature() / std::sqrt(1.0 + g->x(i));
            worst = std::max(worst, std::fabs(sol.wall_shear[i] / ref - 1.0));
        }
        EXPECT_LT(worst, 0.01) << "n = " << n;
        if (prev > 0) EXPECT_LT(worst, prev);
        prev = worst;
        auto ol = check_oleinik(sol);
        EXPECT_TRUE(ol.ok()) << ol.failure;
        EXPECT_GT(ol.m0, 0.0);
        for (int i = 0; i < g->nx(); ++i) EXPECT_GE(sol.wall_shear[i], ol.m0 - 1e-15);
    }
}

TEST(PrandtlMarch, MassConservationAndLayerParts) {
    auto flow = make_flow(FlowKind::strain, {0.2, 0.0, 1.0});
    auto g = make_layer_grid(0.25, 20.0, 33, 401);
    auto sol = solve_prandtl(flow, make_blasius_inflow(flow, g->y()), g);
    // u0b = u0p - u_e decays; v0b vanishes at the top
    for (int i = 0; i < g->nx(); ++i) {
        EXPECT_NEAR(sol.u0b(i, g->ny() - 1), 0.0, 1e-6);
        EXPECT_NEAR(sol.v0b(i, g->ny() - 1), 0.0, 1e-12);
        EXPECT_NEAR(sol.u0p(i, 0), 0.0, 1e-14);
        EXPECT_NEAR(sol.v0p(i, 0), 0.0, 1e-12);
    }
}

TEST(PrandtlMarch, AdversePressureGradientSeparates) {
    auto flow = make_flow(FlowKind::strain, {-2.0, 0.0, 1.0});
    auto g = make_layer_grid(0.25, 20.0, 65, 401);
    EXPECT_THROW(solve_prandtl(flow, make_blasius_inflow(flow, g->y()), g), SeparationError);
}

TEST(Inflow, CornerCompatibilityAndValidation) {
    auto flow = make_flow(FlowKind::strain, {0.3, 0.0, 1.0});
    auto y = uniform_nodes(0, 20, 801);
    auto in = make_blasius_inflow(flow, y, true);
    EXPECT_TRUE(in.compat.ok(1e-6)) << in.compat.parabolic_residual;
    auto plain = make_blasius_inflow(flow, y, false);
    EXPECT_GT(std::fabs(compatibility_check(flow, plain).parabolic_residual), 0.1);
    EXPECT_NO_THROW(in.validate(flow));
    InflowProfile bad = in;
    bad.U0P[3] = -1e-3;
    EXPECT_THROW(bad.validate(flow), ConfigError);
}

TEST(Inflow, FileRoundTripAndErrors) {
    auto flow = make_flow(FlowKind::shear, {0.1, 0.0, 1.0});
    auto y = uniform_nodes(0, 20, 401);
    const auto dir = std::filesystem::temp_directory_path() / "pbl_inflow_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "inflow.txt").string();
    {
        std::ofstream os(path);
        os << "# y U\n";
        for (int k = 0; k <= 2000; ++k) os << k * 0.01 << " " << blasius().fp(k * 0.01) << "\n";
    }
    auto in = load_inflow(path, flow, y);
    for (std::size_t j = 0; j < y.size(); j += 37) EXPECT_NEAR(in.U0P[j], blasius().fp(y[j]), 1e-5);
    EXPECT_THROW(load_inflow((dir / "missing.txt").string(), flow, y), ConfigError);
    {
        std::ofstream os(path);
        os << "0 0\n1 0.5\nabc\n";
    }
    EXPECT_THROW(load_inflow(path, flow, y), ConfigError);
}
