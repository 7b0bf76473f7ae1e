#include "pbl/errors.hpp"
#include "pbl/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pbl;

namespace {

double max_err(const Field& f, const std::function<double(double, double)>& ex) {
    double e = 0.0;
    for (int i = 0; i < f.grid().nx(); ++i)
        for (int j = 0; j < f.grid().ny(); ++j)
            e = std::max(e, std::fabs(f(i, j) - ex(f.grid().x(i), f.grid().y(j))));
    return e;
}

} // namespace

TEST(Grid, RejectsBadAxes) {
    EXPECT_THROW(make_grid({0, 1, 2}, {0, 1, 2, 3}), ConfigError);
    EXPECT_THROW(make_grid({0.1, 1, 2, 3}, {0, 1, 2, 3}), ConfigError);
    EXPECT_THROW(make_grid({0, 1, 1, 3}, {0, 1, 2, 3}), ConfigError);
}

TEST(Grid, TanhNodesClusterAndSpan) {
    auto w = tanh_wall_nodes(0, 8, 65, 2.5);
    EXPECT_DOUBLE_EQ(w.front(), 0.0);
    EXPECT_NEAR(w.back(), 8.0, 1e-12);
    EXPECT_LT(w[1] - w[0], w[64] - w[63]);
    auto t = tanh_two_sided_nodes(0, 1, 33, 3.0);
    EXPECT_NEAR(t[1] - t[0], t[32] - t[31], 1e-12);
    EXPECT_LT(t[1] - t[0], t[17] - t[16]);
    // half the nodes below the target
    const double beta = tanh_beta_for_half(3.0, 0.2);
    auto h = tanh_wall_nodes(0, 3.0, 129, beta);
    EXPECT_NEAR(h[64], 0.2, 1e-8);
}

TEST(Grid, RefinedHalvesUniformSpacing) {
    GridSpec s;
    s.nx = 17;
    s.ny = 33;
    auto a = build_grid(s), b = build_grid(refined(s));
    EXPECT_EQ(b->nx(), 33);
    EXPECT_NEAR(a->max_dx() / b->max_dx(), 2.0, 1e-12);
    for (int i = 0; i < a->nx(); ++i) EXPECT_NEAR(a->x(i), b->x(2 * i), 1e-14);
}

TEST(Diff, SecondOrderOnStretchedNodes) {
    auto f = [](double x, double y) { return std::sin(3 * x) * std::exp(-y); };
    double prev[4] = {0, 0, 0, 0};
    for (int n : {33, 65, 129}) {
        auto g = make_grid(tanh_two_sided_nodes(0, 1, n, 1.5), tanh_wall_nodes(0, 2, n, 1.5));
        auto F = Field::sample(g, f);
        const double e[4] = {
            max_err(diff(F, Axis::x, 1), [](double x, double y) { return 3 * std::cos(3 * x) * std::exp(-y); }),
            max_err(diff(F, Axis::x, 2), [](double x, double y) { return -9 * std::sin(3 * x) * std::exp(-y); }),
            max_err(diff(F, Axis::y, 1), [](double x, double y) { return -std::sin(3 * x) * std::exp(-y); }),
            max_err(diff(F, Axis::y, 2), [](double x, double y) { return std::sin(3 * x) * std::exp(-y); }),
        };
        for (int k = 0; k < 4; ++k) {
            if (prev[k] > 0) EXPECT_GT(std::log2(prev[k] / e[k]), 1.8) << "component " << k << " n " << n;
            prev[k] = e[k];
        }
    }
}

TEST(Diff, MatrixMatchesOperator) {
    auto g = make_grid(tanh_wall_nodes(0, 1, 12, 1.0), uniform_nodes(0, 2, 9));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    Field f(g);
    for (auto& v : f.values()) v = U(rng);
    for (Axis ax : {Axis::x, Axis::y})
        for (int order : {1, 2}) {
            auto D = derivative_matrix(*g, ax, order);
            Eigen::Map<const Eigen::VectorXd> x(f.values().data(), f.values().size());
            Eigen::VectorXd y = D * x;
            auto ref = diff(f, ax, order);
            for (std::size_t k = 0; k < ref.values().size(); ++k) EXPECT_NEAR(y[k], ref[k], 1e-9);
        }
}

TEST(Diff, BiasedSchemeIsExactForQuadratics) {
    auto x = tanh_wall_nodes(0, 1, 10, 1.0);
    std::vector<double> f;
    for (double t : x) f.push_back(2 * t * t - t + 3);
    auto d = diff1d(x, f, 1, Scheme::biased);
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(d[k], 4 * x[k] - 1, 1e-10);
}

TEST(Quadrature, TrapezoidAndCumulative) {
    auto x = tanh_wall_nodes(0, 2, 41, 1.2);
    std::vector<double> lin;
    for (double t : x) lin.push_back(3 * t + 1);
    EXPECT_NEAR(trapezoid(x, lin), 8.0, 1e-12);
    auto c = cumulative_trapezoid(x, lin);
    auto t = tail_trapezoid(x, lin);
    for (std::size_t k = 0; k < x.size(); ++k) {
        EXPECT_NEAR(c[k], 1.5 * x[k] * x[k] + x[k], 1e-12);
        EXPECT_NEAR(c[k] + t[k], 8.0, 1e-12);
    }
}

TEST(Quadrature, IntegrateRegion) {
    auto g = make_grid(uniform_nodes(0, 1, 21), uniform_nodes(0, 2, 41));
    auto one = Field::sample(g, [](double, double) { return 1.0; });
    EXPECT_NEAR(integrate(one), 2.0, 1e-12);
    EXPECT_NEAR(integrate(one, Region{0.0, 0.5, 0.0, 1.0}), 0.5, 1e-12);
    EXPECT_NEAR(l2_norm(one), std::sqrt(2.0), 1e-12);
}

TEST(Interpolation, ExactForCubicsAndAtNodes) {
    auto x = tanh_wall_nodes(0, 3, 17, 1.0);
    std::vector<double> f;
    auto p = [](double t) { return t * t * t - 2 * t + 0.5; };
    for (double t : x) f.push_back(p(t));
    CubicInterpolator I(x);
    for (double t : {0.0, 0.013, 0.7, 1.91, 3.0}) EXPECT_NEAR(I(f.data(), t), p(t), 1e-10);
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_DOUBLE_EQ(I(f.data(), x[k]), f[k]);
    EXPECT_THROW(I(f.data(), 3.5), DomainError);
    CubicInterpolator Z(x, Extrapolation::zero);
    EXPECT_EQ(Z(f.data(), 3.5), 0.0);
}

TEST(FieldOps, ArithmeticAndFiniteness) {
    auto g = make_grid(uniform_nodes(0, 1, 5), uniform_nodes(0, 1, 5));
    auto a = Field::sample(g, [](double x, double y) { return x + y; });
    auto b = Field::sample(g, [](double x, double y) { return x * y; });
    auto c = 2.0 * a - b + a * b;
    EXPECT_NEAR(c(2, 3), 2 * 1.25 - 0.375 + 1.25 * 0.375, 1e-14);
    auto h = make_grid(uniform_nodes(0, 1, 6), uniform_nodes(0, 1, 5));
    EXPECT_THROW(a + Field(h), UsageError);
    c(1, 1) = NAN;
    EXPECT_THROW(c.check_finite(), DomainError);
}

TEST(Cutoff, ShapeAndDerivatives) {
    for (double s : {0.0, 0.5, 1.0}) EXPECT_DOUBLE_EQ(cutoff(s)[0], 1.0);
    for (double s : {2.0, 2.5, 10.0}) EXPECT_DOUBLE_EQ(cutoff(s)[0], 0.0);
    double prev = 1.0;
    for (double s = 1.0; s <= 2.0; s += 0.01) {
        const double v = cutoff(s)[0];
        EXPECT_LE(v, prev + 1e-15);
        prev = v;
        const double h = 1e-5;
        EXPECT_NEAR(cutoff(s)[1], (cutoff(s + h)[0] - cutoff(s - h)[0]) / (2 * h), 1e-5);
    }
    EXPECT_DOUBLE_EQ(eta_delta(0.1, 0.2), 0.0);
    EXPECT_DOUBLE_EQ(eta_delta(0.5, 0.2), 1.0);
}

TEST(WeightedNorms, ValidationAndZNormScaling) {
    auto g = make_grid(uniform_nodes(0, 0.25, 9), uniform_nodes(0, 2, 17));
    auto Us = Field::sample(g, [](double, double y) { return y; });
    WeightedNormConfig c{1e-3, &Us, WeightKind::eta_delta, 0.1};
    EXPECT_THROW(c.validate(0.25), DomainError);  // delta below sqrt(L)
    c.delta = 0.5;
    EXPECT_NO_THROW(c.validate(0.25));
    Field neg = Us;
    neg(3, 4) = -0.1;
    WeightedNormConfig c2{1e-3, &neg};
    EXPECT_THROW(quotient_norms(Us, c2), DomainError);

    auto U = Field::sample(g, [](double x, double y) { return std::sin(x) * y; });
    auto z1 = z_norm(U, Field(g), 1e-2);
    auto z2 = z_norm(2.0 * U, Field(g), 1e-2);
    EXPECT_NEAR(z2.total, 2 * z1.total, 1e-12);
    EXPECT_EQ(z_norm(Field(g), Field(g), 1e-2).total, 0.0);
}

TEST(Hardy, ProbeIsFiniteAndScales) {
    auto Y = tanh_wall_nodes(0, 8, 401, 2.0);
    std::vector<double> H, Us;
    for (double y : Y) {
        H.push_back(y * std::exp(-y));
        Us.push_back(std::tanh(y / 0.03) + 0.1 * y);
    }
    auto r = hardy_probe(Y, H, Us, 0.5, 1e-3);
    EXPECT_TRUE(std::isfinite(r.constant()));
    EXPECT_GT(r.constant(), 0.0);
    std::vector<double> H2;
    for (double h : H) H2.push_back(3 * h);
    EXPECT_NEAR(hardy_probe(Y, H2, Us, 0.5, 1e-3).constant(), r.constant(), 1e-12 * r.constant());
    EXPECT_THROW(hardy_probe(Y, H, Us, 1.5, 1e-3), DomainError);
}
