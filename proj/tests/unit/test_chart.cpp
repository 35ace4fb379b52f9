#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "genfrac/chart.hpp"
#include "genfrac/test_function.hpp"

using genfrac::Complex;
using genfrac::ErrorKind;
using genfrac::TestFunction;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const genfrac::Error& err) {
        return err.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::precondition;
}

} // namespace

TEST(Chart, PresetExamples) {
    const auto id = genfrac::make_phi_preset("identity", {}, 0.0, 1.0);
    EXPECT_EQ(id.phi(0.3), 0.3);
    EXPECT_EQ(id.dphi(0.3), 1.0);
    const auto lg = genfrac::make_phi_preset("log", {}, 1.0, std::numbers::e);
    EXPECT_NEAR(lg.length(), 1.0, 1e-15);
    const auto pw = genfrac::make_phi_preset("power", {{"sigma", 2.0}}, 0.0, 1.0);
    EXPECT_NEAR(pw.inv(0.25), 0.5, 1e-15);
}

TEST(Chart, EveryPresetPassesValidation) {
    genfrac::validate_chart(genfrac::make_phi_preset("identity", {}, 0.0, 1.0));
    genfrac::validate_chart(genfrac::make_phi_preset("affine", {{"scale", 2.5}, {"shift", -1.0}}, -1.0, 3.0));
    genfrac::validate_chart(genfrac::make_phi_preset("log", {}, 1.0, 2.0));
    genfrac::validate_chart(genfrac::make_phi_preset("log1p", {}, 0.0, INFINITY));
    genfrac::validate_chart(genfrac::make_phi_preset("power", {{"sigma", 2.0}}, 0.0, 1.0));
    genfrac::validate_chart(genfrac::make_phi_preset("power", {{"sigma", 0.5}}, 0.0, 4.0));
    genfrac::validate_chart(genfrac::make_phi_preset("exp", {{"lambda", 0.7}}, 0.0, 3.0));
}

TEST(Chart, Errors) {
    EXPECT_EQ(kind_of([] { genfrac::make_phi_preset("spline", {}, 0.0, 1.0); }), ErrorKind::unknown_preset);
    EXPECT_EQ(kind_of([] { genfrac::make_phi_preset("power", {{"sigma", 0.0}}, 0.0, 1.0); }), ErrorKind::invalid_params);
    EXPECT_EQ(kind_of([] { genfrac::make_phi_preset("log", {}, 0.0, 1.0); }), ErrorKind::invalid_params);
    EXPECT_EQ(kind_of([] { genfrac::make_phi_preset("identity", {}, 1.0, 1.0); }), ErrorKind::domain_mismatch);
    auto decreasing = genfrac::make_identity_chart(0.0, 1.0);
    decreasing.phi = [](double x) { return -x; };
    decreasing.inv = [](double y) { return -y; };
    EXPECT_EQ(kind_of([&] { genfrac::validate_chart(decreasing); }), ErrorKind::invalid_params);
}

TEST(TestFunction, PowerSumEvaluation) {
    const auto lg = genfrac::make_phi_preset("log", {}, 1.0, 3.0);
    const auto u = TestFunction::phi_monomial(lg, 1.5, 2.0);
    const double x = 2.5;
    EXPECT_NEAR(std::abs(u(x) - 2.0 * std::pow(std::log(x), 1.5)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u.at_offset(lg, 0.25) - 2.0 * std::pow(0.25, 1.5)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u.phi_derivative(lg, 1, x) - 3.0 * std::sqrt(std::log(x))), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(u.derivative(lg, 1, x) - 3.0 * std::sqrt(std::log(x)) / x), 0.0, 1e-14);
    EXPECT_TRUE(u.is_power_sum_on(lg));
    EXPECT_FALSE(u.is_power_sum_on(genfrac::make_identity_chart(1.0, 3.0)));
    EXPECT_TRUE(TestFunction::constant(4.0).is_power_sum_on(genfrac::make_identity_chart(0.0, 1.0)));
    EXPECT_EQ(kind_of([&] { TestFunction::phi_monomial(lg, -1.0); }), ErrorKind::invalid_exponent);
}

TEST(TestFunction, IntegerPowersHaveVanishingHighDerivatives) {
    const auto id = genfrac::make_identity_chart(0.0, 1.0);
    const auto u = TestFunction::phi_power_sum(id, {{1.0, 2.0}, {3.0, 0.0}});
    EXPECT_EQ(u.phi_derivative(id, 3, 0.4), Complex{});
    EXPECT_NEAR(std::abs(u.phi_derivative(id, 2, 0.4) - 2.0), 0.0, 1e-15);
}

TEST(TestFunction, FiniteDifferencesMatchChainRule) {
    // Power chart sigma = 2: d/dy u(sqrt(y)) = u'(x) / (2x).
    const auto pw = genfrac::make_phi_preset("power", {{"sigma", 2.0}}, 0.0, 1.0);
    const auto u = TestFunction::analytic([](double x) { return Complex(std::sin(3.0 * x), x * x); });
    for (double x : {0.05, 0.3, 0.7, 0.99}) {
        const Complex want = Complex(3.0 * std::cos(3.0 * x), 2.0 * x) / (2.0 * x);
        EXPECT_NEAR(std::abs(u.phi_derivative(pw, 1, x) - want), 0.0, 1e-8 * std::max(1.0, std::abs(want))) << x;
    }
    const auto id = genfrac::make_identity_chart(0.0, 1.0);
    EXPECT_NEAR(std::abs(u.derivative(id, 2, 0.5) - Complex(-9.0 * std::sin(1.5), 2.0)), 0.0, 1e-6);
}

TEST(TestFunction, SampledSplineAndMissingDerivatives) {
    std::vector<double> xs;
    std::vector<Complex> ys;
    for (int i = 0; i <= 200; ++i) {
        xs.push_back(i / 200.0);
        ys.emplace_back(std::exp(xs.back()), 0.0);
    }
    const auto u = TestFunction::sampled(xs, ys);
    EXPECT_NEAR(u(0.3337).real(), std::exp(0.3337), 1e-7);
    const auto id = genfrac::make_identity_chart(0.0, 1.0);
    EXPECT_EQ(kind_of([&] { u.phi_derivative(id, 1, 0.5); }), ErrorKind::missing_derivatives);
    EXPECT_EQ(kind_of([&] { u(1.5); }), ErrorKind::domain_mismatch);
}
