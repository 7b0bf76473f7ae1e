#include "pbl/errors.hpp"
#include "pbl/euler_base.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pbl;

namespace {

std::vector<EulerFlow> catalog() {
    return {make_flow(FlowKind::shear, {0.1, 0.0, 1.0}), make_flow(FlowKind::shear, {0.1, 0.5, 1.0}),
            make_flow(FlowKind::strain, {0.1, 0.0, 1.0}), make_flow(FlowKind::strain, {-0.5, 0.0, 1.0}),
            make_flow(FlowKind::harmonic, {0.05, 0.0, 2.0})};
}

} // namespace

TEST(EulerFlow, NamesRoundTrip) {
    for (auto k : {FlowKind::shear, FlowKind::strain, FlowKind::harmonic}) EXPECT_EQ(flow_kind_from_string(to_string(k)), k);
    EXPECT_THROW(flow_kind_from_string("couette"), ConfigError);
}

TEST(EulerFlow, RejectsNonPositiveTangentialVelocity) {
    EXPECT_THROW(make_flow(FlowKind::strain, {-5.0, 0.0, 1.0}), DomainError);
    EXPECT_THROW(make_flow(FlowKind::harmonic, {0.1, 0.0, -1.0}), ConfigError);
    EXPECT_THROW(make_flow(FlowKind::shear, {0.1, 0.0, 1.0}, -1.0), ConfigError);
}

TEST(EulerFlow, StreamFunctionAndDerivativesAgreeWithDifferences) {
    const double h = 1e-4;
    for (const auto& f : catalog())
        for (double X : {0.0, 0.1, 0.25})
            for (double Y : {0.0, 0.3, 2.0}) {
                EXPECT_NEAR(f.u(X, Y), f.psi(X, Y, 0, 1), 1e-12);
                EXPECT_NEAR(f.v(X, Y), -f.psi(X, Y, 1, 0), 1e-12);
                EXPECT_NEAR(f.u(X, Y, 1, 0), (f.u(X + h, Y) - f.u(X - h, Y)) / (2 * h), 1e-7);
                EXPECT_NEAR(f.u(X, Y, 0, 1), (f.u(X, Y + h) - f.u(X, Y - h)) / (2 * h), 1e-7);
                EXPECT_NEAR(f.v(X, Y, 0, 2), (f.v(X, Y + h) - 2 * f.v(X, Y) + f.v(X, Y - h)) / (h * h), 1e-5);
                // incompressible, and the pressure gradient balances the convection
                EXPECT_NEAR(f.u(X, Y, 1, 0) + f.v(X, Y, 0, 1), 0.0, 1e-12);
                EXPECT_NEAR(f.u(X, Y) * f.u(X, Y, 1, 0) + f.v(X, Y) * f.u(X, Y, 0, 1) + f.pX(X, Y), 0.0, 1e-12);
                EXPECT_NEAR(f.u(X, Y) * f.v(X, Y, 1, 0) + f.v(X, Y) * f.v(X, Y, 0, 1) + f.pY(X, Y), 0.0, 1e-12);
                EXPECT_NEAR(f.pX(X, Y), (f.p(X + h, Y) - f.p(X - h, Y)) / (2 * h), 1e-7);
            }
}

TEST(EulerFlow, VorticityFunctionRelation) {
    // Delta psi = F_e(psi): the ratio Delta u / u is constant along streamlines
    for (const auto& f : catalog())
        for (double X : {0.05, 0.2})
            for (double Y : {0.1, 1.0}) {
                const double lap_u =
                    f.psi(X, Y, 2, 1) + f.psi(X, Y, 0, 3);
                EXPECT_NEAR(f.feprime(X, Y) * f.u(X, Y), lap_u, 1e-10);
                // along a streamline: u d_X + v d_Y of F' vanishes
                const double h = 1e-5;
                const double dX = (f.feprime(X + h, Y) - f.feprime(X - h, Y)) / (2 * h);
                const double dY = (f.feprime(X, Y + h) - f.feprime(X, Y - h)) / (2 * h);
                EXPECT_NEAR(f.u(X, Y) * dX + f.v(X, Y) * dY, 0.0, 1e-6);
            }
}

TEST(EulerFlow, BoundsAndTranslation) {
    auto f = make_flow(FlowKind::strain, {0.4, 0.0, 1.0});
    EXPECT_NEAR(f.c0(), 1.0, 1e-12);
    EXPECT_NEAR(f.C0(), 1.1, 1e-12);
    auto t = f.translated(0.1);
    EXPECT_NEAR(t.u(0.0, 0.3), f.u(0.1, 0.3), 1e-14);
    EXPECT_NEAR(t.pX(0.05, 0.0), f.pX(0.15, 0.0), 1e-14);
}

TEST(EulerFlow, DiscreteResidualIsSecondOrder) {
    auto f = make_flow(FlowKind::harmonic, {0.1, 0.0, 3.0});
    double prev = 0.0;
    for (int n : {33, 65, 129}) {
        auto g = make_grid(uniform_nodes(0, 0.25, n), uniform_nodes(0, 2, n));
        auto r = euler_residual(f, g);
        const double e = sup_norm(r.momentum_x) + sup_norm(r.momentum_y) + sup_norm(r.divergence);
        if (prev > 0) EXPECT_GT(std::log2(prev / e), 1.8);
        prev = e;
    }
}
