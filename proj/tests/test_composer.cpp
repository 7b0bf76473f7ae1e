#include "pbl/composer.hpp"
#include "pbl/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pbl;

namespace {

const ExpansionProfiles& shear_profiles() {
    static const ExpansionProfiles p = [] {
        ExpansionOptions o;
        auto flow = make_flow(FlowKind::shear, {0.1, 0.0, 1.0}, o.L, o.Y_max);
        return build_profiles(flow, default_inflow(flow, o), o);
    }();
    return p;
}

/// exact steady Navier-Stokes solution with viscosity eps = 1/Re
struct Kovasznay {
    double eps, lam;
    explicit Kovasznay(double e) : eps(e) {
        const double Re = 1.0 / e, pi = std::acos(-1.0);
        lam = Re / 2 - std::sqrt(Re * Re / 4 + 4 * pi * pi);
    }
    double u(double x, double y) const { return 1 - std::exp(lam * x) * std::cos(2 * M_PI * y); }
    double v(double x, double y) const { return lam / (2 * M_PI) * std::exp(lam * x) * std::sin(2 * M_PI * y); }
    double p(double x, double) const { return 0.5 * (1 - std::exp(2 * lam * x)); }
};

double kovasznay_residual(int n) {
    Kovasznay k(1.0 / 40);
    auto g = make_grid(uniform_nodes(0, 0.5, n), uniform_nodes(0, 1, 2 * n - 1));
    auto a = ApproximateSolution::from_fields(Field::sample(g, [&](double x, double y) { return k.u(x, y); }),
                                              Field::sample(g, [&](double x, double y) { return k.v(x, y); }),
                                              Field::sample(g, [&](double x, double y) { return k.p(x, y); }), k.eps);
    return remainder(a).total();
}

} // namespace

TEST(FromFields, PoiseuilleIsExact) {
    const double eps = 1e-2;
    auto g = make_grid(uniform_nodes(0, 1, 9), uniform_nodes(0, 2, 17));
    auto a = ApproximateSolution::from_fields(Field::sample(g, [](double, double y) { return y * (2 - y); }), Field(g),
                                              Field::sample(g, [&](double x, double) { return -2 * eps * x; }), eps);
    EXPECT_LT(remainder(a).total(), 1e-12);
}

TEST(FromFields, KovasznayResidualConvergesAtSecondOrder) {
    const double r1 = kovasznay_residual(17), r2 = kovasznay_residual(33), r3 = kovasznay_residual(65);
    EXPECT_GT(std::log2(r2 / r3), 1.8) << r1 << " " << r2 << " " << r3;
    EXPECT_THROW(ApproximateSolution::from_fields(Field(make_grid(uniform_nodes(0, 1, 5), uniform_nodes(0, 1, 5))),
                                                  Field(make_grid(uniform_nodes(0, 1, 5), uniform_nodes(0, 1, 5))),
                                                  Field(make_grid(uniform_nodes(0, 1, 5), uniform_nodes(0, 1, 5))), 0.0),
                 DomainError);
}

TEST(Fits, LogLogSlopeIsExactForPowers) {
    std::vector<double> e{1e-2, 1e-3, 1e-4}, v;
    for (double x : e) v.push_back(3.0 * std::pow(x, 1.5));
    auto [s, c] = loglog_fit(e, v);
    EXPECT_NEAR(s, 1.5, 1e-12);
    EXPECT_NEAR(std::exp(c), 3.0, 1e-10);
    GridPolicy p;
    EXPECT_EQ(p.ny_for(p.eps_ref), p.ny_ref);
    EXPECT_NEAR(static_cast<double>(p.ny_for(p.eps_ref / 10)) / p.ny_ref, 2.0, 0.02);
    EXPECT_NEAR(static_cast<double>(p.ny_for(p.eps_ref / 100)) / p.ny_ref, 4.0, 0.04);
}

TEST(Composite, BoundaryValuesAndMatching) {
    const auto& P = shear_profiles();
    const double eps = 1e-3;
    auto g = composer_grid(P, eps, 257);
    auto a = assemble(P, eps, g);
    const Grid& G = *g;
    for (int i = 0; i < G.nx(); ++i) {
        EXPECT_LT(std::fabs(a.U.f(i, 0)), 1e-10);  // no slip
        // away from the layer the composite is the outer expansion: 1 + O(sqrt eps)
        EXPECT_NEAR(a.U.f(i, G.ny() - 1), 1.0, 5.0 * std::sqrt(eps));
    }
    auto facts = profile_facts(a, P);
    EXPECT_TRUE(facts.positive());
    EXPECT_LT(facts.wall_max, 1e-10);
    // the leading composite u0e + u0b stays positive inside and vanish at the wall
    for (int i = 0; i < G.nx(); ++i) EXPECT_NEAR(a.U0(i, 0), 0.0, 1e-10);
}

TEST(Composite, ChainDiagnosticsAreSmall) {
    const auto& P = shear_profiles();
    EXPECT_LT(std::fabs(P.c1.bc.corner_residual0), 1e-6);
    EXPECT_LT(std::fabs(P.c1.bc.corner_residualL), 1e-6);
    EXPECT_LT(P.c1.solve.residual, 1e-8);
    EXPECT_LT(P.c2.solve.residual, 1e-8);
    EXPECT_LT(std::fabs(P.bl1.corner_residual), 1e-4);
    EXPECT_NEAR(P.physical_grid->x(0), 0.0, 1e-14);
    EXPECT_NEAR(P.physical_grid->length(), 0.25, 1e-12);
    // the order-1 outer corrector cancels the layer's outflow at the wall
    for (int i = 0; i < P.physical_grid->nx(); ++i) {
        const int w = P.col0 + i;
        const double v0b_wall = P.prandtl.v0b(w, 0);
        EXPECT_NEAR(P.traces.V1[w], -v0b_wall, 1e-8 * (1 + std::fabs(v0b_wall)));
    }
}

TEST(Composite, TruncationRaisesTheRemainder) {
    const auto& P = shear_profiles();
    GridPolicy pol;
    double prev = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        auto g = composer_grid(P, eps, pol.ny_for(eps));
        const double full = remainder(assemble(P, eps, g)).total();
        const double cut = remainder(assemble(P, eps, g, Truncation::drop_order2)).total();
        // the dropped order-2 terms leave an O(eps) remainder that dominates as eps shrinks
        EXPECT_GT(cut / full, prev) << eps;
        prev = cut / full;
    }
    EXPECT_GT(prev, 3.0);
}

TEST(Composite, UnresolvedGridIsRejected) {
    const auto& P = shear_profiles();
    auto g = make_grid(P.physical_grid->x(), uniform_nodes(0, 8, 33), 8.0);
    EXPECT_THROW(assemble(P, 1e-4, g), ResolutionError);
}

TEST(Sweep, ListValidationAndCsv) {
    const auto& P = shear_profiles();
    EXPECT_THROW(sweep(P, {1e-2}), UsageError);
    EXPECT_THROW(sweep(P, {1e-2, 3e-3, 1e-3, 4e-4}), UsageError);  // spans < 1.5 decades
    EXPECT_THROW(sweep(P, {1e-3, 1e-2, 1e-4, 1e-5}), UsageError);  // not decreasing
    GridPolicy pol;
    pol.ny_ref = 129;
    auto r = sweep(P, {1e-2, 3.16e-3, 1e-3, 3.16e-4}, pol);
    auto csv = sweep_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "eps,ny,R1,R2,R1+R2,slope_so_far");
    EXPECT_EQ(r.rows.size(), 4u);
    EXPECT_GT(r.slope, 1.0);
}
