#include <cmath>
#include <numbers>
#include <thread>

#include <gtest/gtest.h>

#include "genfrac/quadrature.hpp"

using genfrac::Complex;

namespace {

double beta_fn(double x, double y) { return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y)); }

} // namespace

TEST(GaussJacobi, LegendreOrderTwo) {
    const auto& rule = genfrac::gauss_jacobi_rule(2, 0.0);
    ASSERT_EQ(rule.nodes.size(), 2u);
    EXPECT_NEAR(rule.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(rule.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(rule.weights[0], 1.0, 1e-15);
    EXPECT_NEAR(rule.weights[1], 1.0, 1e-15);
}

TEST(GaussJacobi, WeightSumIsZerothMoment) {
    for (int n : {1, 5, 16, 64}) {
        double sum = 0.0;
        for (double w : genfrac::gauss_jacobi_rule(n, -0.5).weights)
            sum += w;
        EXPECT_NEAR(sum, 2.0 * std::numbers::sqrt2, 1e-13) << n;
    }
}

TEST(GaussJacobi, InvalidExponent) {
    try {
        genfrac::gauss_jacobi_rule(8, -1.5);
        FAIL();
    } catch (const genfrac::Error& err) {
        EXPECT_EQ(err.kind(), genfrac::ErrorKind::invalid_exponent);
    }
}

// Moments of (1 + xi)^j against (1 - xi)^a equal 2^{j+a+1} B(j+1, a+1).
TEST(GaussJacobi, PolynomialExactness) {
    for (double a : {-0.9, -0.5, -0.3, 0.0, 0.7, 1.7, 3.2})
        for (int n : {4, 16, 32, 64}) {
            const auto& rule = genfrac::gauss_jacobi_rule(n, a);
            for (int i = 0; i < n; ++i) {
                EXPECT_GT(rule.weights[i], 0.0);
                if (i > 0) {
                    EXPECT_GT(rule.nodes[i], rule.nodes[i - 1]);
                }
            }
            for (int j = 0; j <= 2 * n - 1; ++j) {
                double got = 0.0;
                for (int i = 0; i < n; ++i)
                    got += rule.weights[i] * std::pow(1.0 + rule.nodes[i], j);
                const double want = std::pow(2.0, j + a + 1.0) * beta_fn(j + 1.0, a + 1.0);
                EXPECT_NEAR(got, want, 1e-12 * want) << "a=" << a << " n=" << n << " j=" << j;
            }
        }
}

TEST(GaussJacobi, ConcurrentCacheAccess) {
    std::vector<std::thread> threads;
    std::vector<double> sums(8);
    for (int t = 0; t < 8; ++t)
        threads.emplace_back([t, &sums] {
            double s = 0.0;
            for (double w : genfrac::gauss_jacobi_rule(40, -0.25).weights)
                s += w;
            sums[t] = s;
        });
    for (auto& th : threads)
        th.join();
    for (double s : sums)
        EXPECT_EQ(s, sums[0]);
}

TEST(IntegrateSingular, Examples) {
    const auto id = genfrac::make_identity_chart(0.0, 3.0);
    auto one = [](double) { return Complex(1.0); };
    EXPECT_NEAR(std::abs(genfrac::integrate_singular(one, id, 1.0, 3.0) - 3.0), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(genfrac::integrate_singular(one, id, 0.5, 1.0) - 2.0), 0.0, 1e-13);
    const auto lg = genfrac::make_phi_preset("log", {}, 1.0, std::numbers::e);
    auto g = [](double) { return Complex(1.0 / std::tgamma(0.5)); };
    EXPECT_NEAR(std::abs(genfrac::integrate_singular(g, lg, 0.5, std::numbers::e) - 2.0 / std::sqrt(std::numbers::pi)),
                0.0, 1e-13);
}

TEST(IntegrateSingular, ComplexOrderAndEndpointSingularity) {
    // Integral of (x - t)^{alpha-1} t^{p} on [0, x] = x^{alpha+p} B(alpha, p+1).
    const auto id = genfrac::make_identity_chart(0.0, 2.0);
    const Complex alpha{0.4, 0.8};
    const double p = -0.6;
    const double x = 1.7;
    const Complex got = genfrac::integrate_singular([&](double t) { return Complex(std::pow(t, p)); }, id, alpha, x);
    const Complex want = std::pow(Complex(x), alpha + p) * genfrac::gamma(alpha) * genfrac::gamma(p + 1.0) /
                         genfrac::gamma(alpha + p + 1.0);
    EXPECT_NEAR(std::abs(got - want), 0.0, 1e-11 * std::abs(want));
}

TEST(IntegrateSingular, AgreesWithAdaptiveOracle) {
    const auto ex = genfrac::make_phi_preset("exp", {{"lambda", 0.8}}, 0.0, 2.0);
    for (double alpha : {0.3, 0.5, 1.2, 2.7}) {
        const double x = 1.6;
        auto g = [](double t) { return Complex(std::cos(t), t); };
        const Complex got = genfrac::integrate_singular(g, ex, alpha, x);
        // Distance variable d = x - t; phi(x) - phi(x - d) = e^{lambda x} (1 - e^{-lambda d}).
        const Complex want = genfrac::adaptive_integrate(
            [&](double d) {
                const double t = x - d;
                const double gap = -std::exp(0.8 * x) * std::expm1(-0.8 * d);
                return ex.dphi(t) * std::pow(gap, alpha - 1.0) * g(t);
            },
            0.0, x);
        EXPECT_NEAR(std::abs(got - want), 0.0, 1e-8 * std::abs(want)) << alpha;
    }
}

TEST(IntegrateSingular, DisagreementRaisesQuadratureFailure) {
    const auto id = genfrac::make_identity_chart(0.0, 1.0);
    auto wild = [](double t) { return Complex(std::sin(4000.0 * t)); };
    try {
        genfrac::integrate_singular(wild, id, 0.5, 1.0, 4);
        FAIL();
    } catch (const genfrac::Error& err) {
        EXPECT_EQ(err.kind(), genfrac::ErrorKind::quadrature_failure);
    }
}

TEST(AdaptiveIntegrate, Examples) {
    EXPECT_NEAR(genfrac::adaptive_integrate([](double) { return 1.0; }, 0.0, 1.0).real(), 1.0, 1e-14);
    EXPECT_NEAR(genfrac::adaptive_integrate([](double t) { return 1.0 / std::sqrt(t); }, 0.0, 1.0).real(), 2.0, 1e-11);
    EXPECT_NEAR(genfrac::adaptive_integrate([](double t) { return std::exp(t); }, 0.0, 1.0).real(),
                std::numbers::e - 1.0, 1e-13);
}

TEST(AdaptiveIntegrate, DepthLimit) {
    try {
        genfrac::adaptive_integrate([](double t) { return 1.0 / std::abs(t - 0.3); }, 0.0, 1.0, 1e-12, 12);
        FAIL();
    } catch (const genfrac::Error& err) {
        EXPECT_EQ(err.kind(), genfrac::ErrorKind::no_convergence);
    }
}
