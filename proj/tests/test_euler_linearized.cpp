#include "pbl/errors.hpp"
#include "pbl/euler_linearized.hpp"

#include "mms.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pbl;

namespace {

constexpr double kL = 0.25;
const double kPi = mms::kPi;

using Manufactured = mms::Elliptic;

EulerCorrector corrector_on(int n, SideChoice choice) {
    auto flow = make_flow(FlowKind::shear, {0.1, 0.5, 1.0});
    auto g = make_euler_grid(uniform_nodes(0, kL, n), 8.0, 4 * (n - 1) + 1, 2.0);
    Field S = Field::sample(g, [](double X, double Y) { return std::sin(kPi * X / kL) * Y * Y * std::exp(-2 * Y); });
    std::vector<double> vwall;
    for (double X : g->x()) vwall.push_back(0.3 * std::cos(2 * X) + X);
    return solve_stream_corrector(flow, 1, S, vwall, nullptr, choice);
}

} // namespace

TEST(DivergenceForm, ManufacturedSolutionSecondOrder) {
    const double e1 = mms::elliptic_error(17), e2 = mms::elliptic_error(33), e3 = mms::elliptic_error(65);
    EXPECT_GE(std::log2(e2 / e3), 1.9) << e1 << " " << e2 << " " << e3;
    EXPECT_GE(std::log2(e1 / e2), 1.8);
}

TEST(DivergenceForm, EnergyIdentity) {
    auto g = make_grid(uniform_nodes(0, kL, 33), tanh_wall_nodes(0, 8.0, 65, 2.0));
    Field rhs = Field::sample(g, Manufactured::rhs), lift(g);
    auto r = solve_divergence_form(Manufactured::a, rhs, lift);
    // <w, A w> = -||a^(1/2) grad w||^2 for w = 0 on the boundary
    EXPECT_GT(r.energy_grad, 0.0);
    EXPECT_NEAR(r.energy_pair / r.energy_grad, -1.0, 1e-8);
    // the applied operator reproduces the forcing
    auto Aw = apply_divergence_form(Manufactured::a, r.w);
    double e = 0.0;
    for (int i = 1; i < g->nx() - 1; ++i)
        for (int j = 1; j < g->ny() - 1; ++j) e = std::max(e, std::fabs(Aw(i, j) - r.forcing(i, j)));
    EXPECT_LT(e, 1e-8 * sup_norm(r.forcing));
}

TEST(StreamCorrector, BoundaryDataAndCornerCompatibility) {
    auto c = corrector_on(33, SideChoice::corner_compatible);
    const Grid& g = *c.grid;
    for (int i = 0; i < g.nx(); ++i) {
        EXPECT_DOUBLE_EQ(c.psi(i, 0), c.bc.wall[i]);
        EXPECT_NEAR(c.v.f(i, 0), -(0.3 * std::cos(2 * g.x(i)) + g.x(i)), 1e-14);
        EXPECT_NEAR(c.psi(i, g.ny() - 1), 0.0, 1e-14);
    }
    EXPECT_DOUBLE_EQ(c.bc.wall.front(), 0.0);
    EXPECT_NEAR(c.bc.side0.front(), c.bc.wall.front(), 1e-14);
    EXPECT_NEAR(c.bc.sideL.front(), c.bc.wall.back(), 1e-14);
    EXPECT_LT(std::fabs(c.bc.corner_residual0), 1e-8);
    EXPECT_LT(std::fabs(c.bc.corner_residualL), 1e-8);
    // exponential side data leave a corner residual
    auto e = corrector_on(33, SideChoice::exponential);
    EXPECT_GT(std::fabs(e.bc.corner_residual0) + std::fabs(e.bc.corner_residualL), 1e-3);
}

TEST(StreamCorrector, SelfConvergence) {
    auto c1 = corrector_on(17, SideChoice::corner_compatible);
    auto c2 = corrector_on(33, SideChoice::corner_compatible);
    auto c3 = corrector_on(65, SideChoice::corner_compatible);
    auto diff_at_coarse = [](const EulerCorrector& a, const EulerCorrector& b) {
        double e = 0.0;
        for (int i = 0; i < a.grid->nx(); ++i)
            for (int j = 0; j < a.grid->ny(); ++j) e = std::max(e, std::fabs(a.psi(i, j) - b.psi(2 * i, 2 * j)));
        return e;
    };
    const double e12 = diff_at_coarse(c1, c2), e23 = diff_at_coarse(c2, c3);
    EXPECT_GT(std::log2(e12 / e23), 1.6) << e12 << " " << e23;
}

TEST(StreamCorrector, PressureIsTheLineIntegral) {
    auto c = corrector_on(65, SideChoice::corner_compatible);
    auto DX = diff(c.p, Axis::x, 1);
    const Grid& g = *c.grid;
    double e = 0.0, s = 0.0;
    for (int i = 2; i < g.nx() - 2; ++i)
        for (int j = 0; j < g.ny(); ++j) {
            e = std::max(e, std::fabs(DX(i, j) - c.pX(i, j)));
            s = std::max(s, std::fabs(c.pX(i, j)));
        }
    EXPECT_LT(e, 1e-2 * s);
    // decays at the top
    for (int i = 0; i < g.nx(); ++i) EXPECT_LT(std::fabs(c.p(i, g.ny() - 1)), 1e-2 * s);
}

TEST(StreamCorrector, RejectsMismatchedInput) {
    auto flow = make_flow(FlowKind::shear, {0.1, 0.0, 1.0});
    auto g = make_euler_grid(uniform_nodes(0, kL, 9), 8.0, 17, 2.0);
    Field S(g);
    EXPECT_THROW(solve_stream_corrector(flow, 1, S, std::vector<double>(5, 0.0), nullptr, SideChoice::exponential),
                 UsageError);
    EXPECT_THROW(solve_stream_corrector(flow, 2, S, std::vector<double>(9, 0.0), nullptr, SideChoice::exponential),
                 UsageError);
    EXPECT_THROW(make_euler_grid(uniform_nodes(0, kL, 9), 8.0, 4, 2.0), ConfigError);
}
