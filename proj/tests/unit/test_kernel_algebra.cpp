#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "genfrac/kernel_algebra.hpp"

using genfrac::Complex;
using genfrac::ErrorKind;

namespace {

const double sqrt_pi = std::sqrt(std::numbers::pi);

template <class F>
ErrorKind error_kind_of(F&& fn) {
    try {
        fn();
    } catch (const genfrac::Error& err) {
        return err.kind();
    }
    ADD_FAILURE() << "no genfrac::Error thrown";
    return ErrorKind::precondition;
}

// Brute-force partial sum in long double.
long double exp_partial_sum(int terms) {
    long double sum = 0.0L;
    long double term = 1.0L;
    for (int n = 0; n < terms; ++n) {
        sum += term;
        term /= static_cast<long double>(n + 1);
    }
    return sum;
}

std::vector<genfrac::AnalyticKernel> presets_with_leading_term() {
    return {genfrac::make_rl_kernel(), genfrac::make_exp_kernel(), genfrac::make_tempered_kernel(1.0),
            genfrac::make_prabhakar_kernel(0.5), genfrac::make_list_kernel({2.0, -1.0, 0.25})};
}

} // namespace

TEST(EvalKernel, RlIsOneOverGammaAlpha) {
    const auto rl = genfrac::make_rl_kernel();
    EXPECT_DOUBLE_EQ(genfrac::eval_kernel(rl, 1.0, 1.0, 0.7).real(), 1.0);
    EXPECT_NEAR(genfrac::eval_kernel(rl, 0.5, 1.0, 3.0).real(), 1.0 / sqrt_pi, 1e-15);
}

TEST(EvalKernel, ExpPreset) {
    const auto k = genfrac::make_exp_kernel();
    EXPECT_NEAR(genfrac::eval_kernel(k, 1.0, 1.0, 1.0).real(), static_cast<double>(exp_partial_sum(30)), 1e-15);
    EXPECT_EQ(genfrac::eval_kernel(k, 1.0, 1.0, 0.0), Complex{1.0});
    const auto sv = genfrac::eval_kernel_series(k, 1.0, 1.0, 1.0);
    EXPECT_LT(sv.terms, 30u);
    EXPECT_LT(sv.tail_estimate, 1e-13);
}

TEST(EvalKernel, Errors) {
    const auto bounded = genfrac::make_list_kernel({1.0, 1.0}, 2.0);
    EXPECT_EQ(error_kind_of([&] { genfrac::eval_kernel(bounded, 1.0, 1.0, 2.0); }), ErrorKind::out_of_disc);
    // Geometric series near its radius needs more than a handful of terms.
    const genfrac::AnalyticKernel geometric("geometric", [](std::size_t, Complex, Complex) { return Complex{1.0}; }, 1.0);
    EXPECT_EQ(error_kind_of([&] { genfrac::eval_kernel(geometric, 1.0, 1.0, 0.99, genfrac::TruncationPolicy::tail(1e-14, 40)); }),
              ErrorKind::no_convergence);
    EXPECT_NEAR(genfrac::eval_kernel(geometric, 1.0, 1.0, 0.5).real(), 2.0, 1e-13);
}

TEST(EvalKernel, FixedTruncation) {
    const auto k = genfrac::make_exp_kernel();
    const auto sv = genfrac::eval_kernel_series(k, 1.0, 1.0, 1.0, genfrac::TruncationPolicy::fixed(5));
    EXPECT_EQ(sv.terms, 5u);
    EXPECT_NEAR(sv.value.real(), 1.0 + 1.0 + 0.5 + 1.0 / 6 + 1.0 / 24, 1e-15);
}

TEST(GammaSeries, Examples) {
    const auto rl = genfrac::gamma_series(genfrac::make_rl_kernel(), {0.37, 0.2}, 1.0, 5);
    EXPECT_NEAR(std::abs(rl.coeff(0) - 1.0), 0.0, 1e-15);
    for (std::size_t n = 1; n <= 5; ++n)
        EXPECT_EQ(rl.coeff(n), Complex{});
    const auto ex = genfrac::gamma_series(genfrac::make_exp_kernel(), 1.0, 1.0, 20);
    for (std::size_t n = 0; n <= 20; ++n)
        EXPECT_NEAR(ex.coeff(n).real(), 1.0, 1e-13) << n;
    const auto half = genfrac::gamma_series(genfrac::make_exp_kernel(), 0.5, 1.0, 0);
    EXPECT_NEAR(half.coeff(0).real(), 1.7724538509055160, 1e-14);
}

TEST(GammaSeries, RecomputationInvariant) {
    for (const auto& kernel : presets_with_leading_term())
        for (Complex alpha : {Complex{0.3}, Complex{1.2}, Complex{0.5, 0.4}})
            for (Complex beta : {Complex{0.5}, Complex{1.0}}) {
                const auto gs = genfrac::gamma_series(kernel, alpha, beta, 15);
                for (std::size_t n = 0; n <= 15; ++n) {
                    const Complex want = kernel.coefficient(n, alpha, beta) * genfrac::gamma(beta * double(n) + alpha);
                    EXPECT_LE(std::abs(gs.coeff(n) - want), 1e-13 * std::max(1.0, std::abs(want)))
                        << kernel.name() << " n=" << n;
                }
            }
}

TEST(GammaSeries, PoleAndOrderErrors) {
    const auto k = genfrac::make_exp_kernel();
    EXPECT_EQ(error_kind_of([&] { genfrac::gamma_series(k, 0.0, 1.0, 3); }), ErrorKind::order_not_positive);
    EXPECT_EQ(error_kind_of([&] { genfrac::gamma_series(k, {0.5, 1.0}, {-1.0, 0.0}, 3); }), ErrorKind::invalid_params);
}

TEST(CauchyProduct, Examples) {
    const std::vector<Complex> one{1.0, 0.0, 0.0};
    EXPECT_EQ(genfrac::cauchy_product(one, one, 2), one);
    const std::vector<Complex> a{1.0, 1.0};
    const std::vector<Complex> b{1.0, -1.0};
    EXPECT_EQ(genfrac::cauchy_product(a, b, 2), (std::vector<Complex>{1.0, 0.0, -1.0}));
    const std::vector<Complex> geometric(12, 1.0);
    const auto delta = genfrac::cauchy_product(geometric, b, 11);
    EXPECT_EQ(delta[0], Complex{1.0});
    for (std::size_t k = 1; k < delta.size(); ++k)
        EXPECT_EQ(delta[k], Complex{});
}

TEST(ReciprocalKernel, RlCollapses) {
    const auto bar = genfrac::reciprocal_kernel(genfrac::make_rl_kernel(), 0.5, 1.0, 1);
    EXPECT_NEAR(bar.coefficient(0, 0.5, 1.0).real(), 1.0 / sqrt_pi, 1e-15);
    for (std::size_t n = 1; n < 10; ++n)
        EXPECT_EQ(bar.coefficient(n, 0.5, 1.0), Complex{});
    EXPECT_TRUE(std::isinf(bar.radius()));
}

TEST(ReciprocalKernel, ExpMatchesBinomialSeries) {
    // For the exp kernel at alpha = 1/2, beta = 1 the Gamma-weighted series is
    // sqrt(pi) (1 - z)^(-1/2), so the reciprocal one is (1 - z)^(1/2) / sqrt(pi).
    const double weighted[] = {0.564189583547756286948079451561, -0.28209479177387814347403972578,
                               -0.0705236979434695358685099314451, -0.0352618489717347679342549657225,
                               -0.0220386556073342299589093535766, -0.0154270589251339609712365475036,
                               -0.0115702941938504707284274106277, -0.00909094543802536985805010835034,
                               -0.00738639316839561300966571303465, -0.00615532764032967750805476086221,
                               -0.00523202849428022588184654673288};
    const double bare[] = {0.318309886183790671537767526745, -0.318309886183790671537767526745,
                           -0.0530516476972984452562945877908, -0.0106103295394596890512589175582,
                           -0.0018947017034749444734390924211};
    const auto bar = genfrac::reciprocal_kernel(genfrac::make_exp_kernel(), 0.5, 1.0, 1, 10);
    for (std::size_t n = 0; n <= 10; ++n)
        EXPECT_NEAR(bar.gamma_weighted(n, 0.5, 1.0).real(), weighted[n], 1e-14) << n;
    for (std::size_t n = 0; n < 5; ++n)
        EXPECT_NEAR(bar.coefficient(n, 0.5, 1.0).real(), bare[n], 1e-14 * std::abs(bare[n]) + 1e-17) << n;
}

TEST(ReciprocalKernel, CauchyProductIsDelta) {
    for (const auto& kernel : presets_with_leading_term())
        for (double alpha : {0.3, 0.5, 1.2, 2.7})
            for (double beta : {0.5, 1.0}) {
                const int m = genfrac::derivative_order(alpha);
                const auto bar = genfrac::reciprocal_kernel(kernel, alpha, beta, m, 20);
                const auto a = genfrac::gamma_series(kernel, alpha, beta, 20);
                std::vector<Complex> b(21);
                for (std::size_t n = 0; n <= 20; ++n) {
                    b[n] = bar.coefficient(n, 0, 0) * genfrac::gamma(beta * double(n) + double(m) - alpha);
                }
                const auto prod = genfrac::cauchy_product(a.coefficients(), b, 20);
                EXPECT_NEAR(std::abs(prod[0] - 1.0), 0.0, 1e-12) << kernel.name();
                for (std::size_t k = 1; k <= 20; ++k)
                    EXPECT_LE(std::abs(prod[k]), 1e-12) << kernel.name() << " alpha=" << alpha << " k=" << k;
            }
}

TEST(ReciprocalKernel, Errors) {
    const auto zero_lead = genfrac::make_list_kernel({0.0, 1.0});
    EXPECT_EQ(error_kind_of([&] { genfrac::reciprocal_kernel(zero_lead, 0.5, 1.0, 1); }), ErrorKind::zero_leading_coefficient);
    EXPECT_EQ(error_kind_of([&] { genfrac::reciprocal_kernel(genfrac::make_rl_kernel(), 0.5, 1.0, 2); }), ErrorKind::precondition);
}

TEST(ModifiedKernels, BExamples) {
    const auto rl = genfrac::make_rl_kernel();
    const auto b = genfrac::modified_kernel_B(rl, 0.4, 1.0, 1);
    EXPECT_NEAR(b.coefficient(0, 0, 0).real(), genfrac::rgamma(1.4).real(), 1e-15);
    EXPECT_NEAR(b.coefficient(0, 0, 0).real(), rl.coefficient(0, 1.4, 1.0).real(), 1e-15);
    EXPECT_EQ(b.coefficient(3, 0, 0), Complex{});
    EXPECT_TRUE(genfrac::modified_kernel_B(rl, 0.4, 1.0, 0) == rl);
    const auto be = genfrac::modified_kernel_B(genfrac::make_exp_kernel(), 1.0, 1.0, 1);
    double fact = 1.0;
    for (std::size_t n = 0; n < 12; ++n) {
        fact *= double(n + 1);
        EXPECT_NEAR(be.coefficient(n, 0, 0).real(), 1.0 / fact, 1e-15 / fact) << n;
    }
}

TEST(ModifiedKernels, CExamples) {
    const auto rl = genfrac::make_rl_kernel();
    EXPECT_TRUE(genfrac::modified_kernel_C(rl, 0.4, 1.0, 0) == rl);
    const auto ce = genfrac::modified_kernel_C(genfrac::make_exp_kernel(), 1.0, 1.0, 1);
    double fact = 1.0;
    for (std::size_t n = 0; n < 12; ++n) {
        if (n > 0)
            fact *= double(n);
        EXPECT_NEAR(ce.coefficient(n, 0, 0).real(), double(n + 1) / fact, 1e-14 * double(n + 1) / fact) << n;
    }
    // C of the RL kernel at order alpha is driven by a_0(alpha + 1) = 1/Gamma(alpha + 1).
    const auto cr = genfrac::modified_kernel_C(rl, 0.4, 1.0, 1);
    EXPECT_NEAR(cr.coefficient(0, 0, 0).real(), genfrac::rgamma(1.4).real() * 0.4, 1e-15);
}

TEST(ModifiedKernels, RoundTripRecoversCoefficients) {
    for (const auto& kernel : presets_with_leading_term())
        for (double alpha : {0.3, 1.2})
            for (double beta : {0.5, 1.0})
                for (int m : {1, 2, 3}) {
                    const auto b = genfrac::modified_kernel_B(kernel, alpha, beta, m);
                    const auto back = genfrac::modified_kernel_C(b, alpha, beta, m);
                    for (std::size_t n = 0; n < 15; ++n) {
                        const Complex want = kernel.coefficient(n, alpha, beta);
                        EXPECT_LE(std::abs(back.coefficient(n, 0, 0) - want), 1e-13 * std::abs(want))
                            << kernel.name() << " m=" << m << " n=" << n;
                    }
                }
}

TEST(SemigroupCheck, RlPasses) {
    const auto rl = genfrac::make_rl_kernel();
    for (auto [alpha, gamma] : {std::pair{0.3, 0.4}, std::pair{0.5, 0.7}, std::pair{1.5, 2.25}})
        for (double beta : {0.5, 1.0, 2.0}) {
            const auto rep = genfrac::check_semigroup_one_param(rl, alpha, gamma, beta, 20);
            EXPECT_TRUE(rep.passed);
            EXPECT_EQ(rep.residuals.size(), 21u);
            EXPECT_LE(rep.max_residual(), 1e-12);
        }
    const auto zero = genfrac::check_semigroup_one_param(rl, 0.3, 0.4, 1.0, 0);
    ASSERT_EQ(zero.residuals.size(), 1u);
    EXPECT_EQ(zero.residuals[0], Complex{});
    EXPECT_TRUE(zero.passed);
}

TEST(SemigroupCheck, ExpFails) {
    const auto rep = genfrac::check_semigroup_one_param(genfrac::make_exp_kernel(), 0.5, 0.5, 1.0, 5);
    EXPECT_FALSE(rep.passed);
    // 1 - pi for every k: the Gamma-weighted exp series at alpha = 1/2 is sqrt(pi)(1-z)^(-1/2).
    for (std::size_t k = 0; k <= 3; ++k)
        EXPECT_NEAR(rep.residuals[k].real(), -2.14159265358979323846264338328, 1e-12) << k;
}

TEST(CompositionCheck, RlPassesExpRecordsResiduals) {
    const auto rl = genfrac::check_composition_DI(genfrac::make_rl_kernel(), 0.7, 0.3, 1.0, 10);
    EXPECT_TRUE(rl.passed);
    EXPECT_LE(rl.max_residual(), 1e-12);
    const auto ex = genfrac::check_composition_DI(genfrac::make_exp_kernel(), 0.7, 0.3, 1.0, 10);
    EXPECT_FALSE(ex.passed);
    const double want[] = {-1.853830242296834781891023551, 0.741532096918733912756409420401,
                           0.22245962907562017382692282612, 0.118645135506997426041025507264};
    for (std::size_t k = 0; k < 4; ++k)
        EXPECT_NEAR(ex.residuals[k].real(), want[k], 1e-12) << k;
    ASSERT_TRUE(ex.reciprocal_radius.has_value());
    EXPECT_GT(*ex.reciprocal_radius, 0.0);
    EXPECT_EQ(error_kind_of([&] { genfrac::check_composition_DI(genfrac::make_rl_kernel(), 0.3, 0.7, 1.0, 4); }),
              ErrorKind::precondition);
}

TEST(TwoParameterCrossTerms, NonTrivialKernelsHaveNonzeroCrossTerms) {
    for (const auto& kernel : {genfrac::make_exp_kernel(), genfrac::make_tempered_kernel(1.0), genfrac::make_prabhakar_kernel(0.5)}) {
        const auto rep = genfrac::two_parameter_cross_terms(kernel, 0.5, 1.0, 0.7, 0.5, 6);
        EXPECT_GT(rep.max_cross_term, 1e-6) << kernel.name();
        EXPECT_NE(rep.n, rep.m);
    }
    // A single-term kernel has no cross terms at all.
    const auto rl = genfrac::two_parameter_cross_terms(genfrac::make_rl_kernel(), 0.5, 1.0, 0.7, 0.5, 6);
    EXPECT_EQ(rl.max_cross_term, 0.0);
}

TEST(KernelPresets, LookupAndConcurrentCache) {
    EXPECT_EQ(genfrac::make_kernel_preset("tempered", {{"lambda", 2.0}}).name(), "tempered");
    EXPECT_EQ(error_kind_of([] { genfrac::make_kernel_preset("nope"); }), ErrorKind::unknown_preset);
    const auto k = genfrac::make_prabhakar_kernel(0.5);
    EXPECT_NEAR(k.gamma_weighted(2, 0.3, 1.0).real(), 0.5 * 1.5 / 2.0, 1e-15);
    std::vector<std::thread> workers;
    std::vector<Complex> out(8);
    for (int t = 0; t < 8; ++t)
        workers.emplace_back([&, t] { out[t] = k.coefficients(0.3 + 0.1 * (t % 2), 1.0, 60)[59]; });
    for (auto& w : workers)
        w.join();
    for (int t = 2; t < 8; ++t)
        EXPECT_EQ(out[t], out[t % 2]);
}
