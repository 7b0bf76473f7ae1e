#include "pbl/bl_march.hpp"
#include "pbl/errors.hpp"
#include "pbl/prandtl_linearized.hpp"

#include "mms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pbl;

namespace {

struct SmallLayer {
    EulerFlow flow = make_flow(FlowKind::shear, {0.1, 0.0, 1.0});
    PrandtlSolution p;
    LayerBase base;
    SmallLayer() {
        auto g = make_layer_grid(0.25, 20.0, 33, 401);
        p = solve_prandtl(flow, make_blasius_inflow(flow, g->y()), g);
        base = make_layer_base(p);
    }
};

const SmallLayer& small_layer() {
    static const SmallLayer s;
    return s;
}

} // namespace

TEST(LinearMarch, ManufacturedSolutionConverges) {
    const double e1 = mms::march_error(17), e2 = mms::march_error(33), e3 = mms::march_error(65);
    EXPECT_GE(std::log2(e2 / e3), 0.9) << e1 << " " << e2 << " " << e3;
    EXPECT_GE(std::log2(e1 / e2), 0.9);
}

TEST(Continuity, ExactForLinearInX) {
    auto g = make_grid(tanh_wall_nodes(0, 1, 9, 1.0), uniform_nodes(0, 5, 51));
    auto u = Field::sample(g, [](double x, double y) { return (2 + 3 * x) * y * std::exp(-y); });
    auto w = integrate_continuity(u);
    std::vector<double> f;
    for (double y : g->y()) f.push_back(-3 * y * std::exp(-y));
    auto ref = cumulative_trapezoid(g->y(), f);
    for (int i = 0; i < g->nx(); ++i)
        for (int j = 0; j < g->ny(); ++j) EXPECT_NEAR(w(i, j), ref[j], 1e-12);
}

TEST(Homogenizer, ZeroMeanProfile) {
    EXPECT_DOUBLE_EQ(homogenizer(0.0), 1.0);
    EXPECT_DOUBLE_EQ(homogenizer_tail(0.0), 0.0);
    const double h = 1e-5;
    for (double y : {0.3, 1.0, 4.0}) {
        EXPECT_NEAR((homogenizer_tail(y + h) - homogenizer_tail(y - h)) / (2 * h), -homogenizer(y), 1e-8);
    }
    EXPECT_LT(std::fabs(homogenizer(40.0)), 1e-15);
}

TEST(HatPair, DivergenceFreeAndCutoff) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 200; ++k) {
        HatInputs in;
        in.u = U(rng), in.ux = U(rng), in.uy = U(rng), in.uxx = U(rng), in.uyy = U(rng);
        in.v = U(rng), in.vx = U(rng), in.vxx = U(rng), in.vyy = U(rng);
        in.vy = -in.ux;
        in.v0 = U(rng), in.v0x = U(rng), in.v0xx = U(rng), in.I = U(rng);
        const double eps = 1e-3, y = 40.0 * (U(rng) + 1.0);
        auto h = hat_values(in, y, eps);
        EXPECT_NEAR(h.ux + h.vy, 0.0, 1e-14);
        const double Y = std::sqrt(eps) * y;
        if (Y <= 1.0) {
            EXPECT_DOUBLE_EQ(h.u, in.u);
            EXPECT_DOUBLE_EQ(h.v, in.v - in.v0);
        }
        if (Y >= 2.0) {
            EXPECT_EQ(h.u, 0.0);
            EXPECT_EQ(h.v, 0.0);
        }
    }
}

TEST(LayerCorrector, WallDataDecayAndLinearity) {
    const auto& s = small_layer();
    const Grid& g = *s.p.grid;
    Field rhs = Field::sample(s.p.grid, [](double x, double y) { return std::cos(3 * x) * y * std::exp(-y); });
    std::vector<double> wall;
    for (double x : g.x()) wall.push_back(-0.5 - x);
    auto c = solve_bl_corrector(1, s.p, s.base, rhs, wall);
    for (int i = 0; i < g.nx(); ++i) {
        EXPECT_NEAR(c.u.f(i, 0), wall[i], 1e-12);
        EXPECT_NEAR(c.u.f(i, g.ny() - 1), 0.0, 1e-10);
    }
    // measured with a one-sided second difference at the wall: O(dy) on this grid
    EXPECT_LT(std::fabs(c.corner_residual), 0.05);
    std::vector<double> wall2 = wall;
    for (auto& v : wall2) v *= 2;
    auto c2 = solve_bl_corrector(1, s.p, s.base, 2.0 * rhs, wall2);
    for (std::size_t k = 0; k < c.u.f.values().size(); ++k) EXPECT_NEAR(c2.u.f[k], 2 * c.u.f[k], 1e-9);
    // zero data gives zero
    auto z = solve_bl_corrector(1, s.p, s.base, Field(s.p.grid), std::vector<double>(g.nx(), 0.0));
    EXPECT_EQ(sup_norm(z.u.f), 0.0);
}

TEST(LayerCorrector, PlainInflowBreaksCompatibility) {
    const auto& s = small_layer();
    const Grid& g = *s.p.grid;
    Field rhs = Field::sample(s.p.grid, [](double, double y) { return y * std::exp(-y); });
    std::vector<double> wall(g.nx(), -1.0);
    auto plain = solve_bl_corrector(1, s.p, s.base, rhs, wall, InflowChoice::plain);
    auto comp = solve_bl_corrector(1, s.p, s.base, rhs, wall, InflowChoice::compatible);
    EXPECT_NEAR(plain.corner_residual, 2.0, 0.05);  // u_yy(0) = -2 a0 for a0 e^{-y^2}
    EXPECT_LT(std::fabs(comp.corner_residual), 0.05);
}

TEST(LayerCorrector, RejectsForeignGrid) {
    const auto& s = small_layer();
    auto other = make_layer_grid(0.25, 20.0, 17, 401);
    EXPECT_THROW(solve_bl_corrector(1, s.p, s.base, Field(other), std::vector<double>(17, 0.0)), UsageError);
}
