#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lmmtaylor/chaos.hpp"
#include "lmmtaylor/engine.hpp"

using namespace lmmtaylor;

namespace {

ChaosFunctional demo(Polynomial f2 = {}) {
    return ChaosFunctional::constant_kernel(1.0, 64, 1.0, Polynomial({-1.0, 0.0, 1.0}), std::move(f2));
}

}  // namespace

TEST(Polynomial, Arithmetic) {
    const Polynomial p({1.0, 2.0, 3.0});
    EXPECT_EQ(p.degree(), 2);
    EXPECT_DOUBLE_EQ(p(2.0), 17.0);
    EXPECT_EQ(p.derivative(), Polynomial({2.0, 6.0}));
    EXPECT_EQ(p.times_x(), Polynomial({0.0, 1.0, 2.0, 3.0}));
    EXPECT_EQ(p - p, Polynomial());
    EXPECT_EQ(Polynomial({1.0, 1.0}) * Polynomial({-1.0, 1.0}), Polynomial({-1.0, 0.0, 1.0}));
    EXPECT_EQ(p * 2.0, p + p);
}

TEST(Chaos, VarianceOfConstantKernel) {
    EXPECT_DOUBLE_EQ(demo().variance(), 1.0);
    EXPECT_DOUBLE_EQ(ChaosFunctional::constant_kernel(2.0, 32, 0.5, Polynomial({0.0})).variance(), 0.5);
}

TEST(Chaos, DegenerateKernelRejected) {
    EXPECT_ANY_THROW(ChaosFunctional::constant_kernel(1.0, 8, 0.0, Polynomial({1.0})).validate());
}

TEST(WeightRecursion, OrderZeroIsOne) { EXPECT_EQ(weight_recursion(0, demo()), Polynomial({1.0})); }

TEST(WeightRecursion, FirstOrderHermite) {
    // a = 1, F^1 = x^2 - 1: pi_1 = (x^2 - 1) x - 2x.
    EXPECT_EQ(weight_recursion(1, demo()), Polynomial({0.0, -3.0, 0.0, 1.0}));
}

TEST(WeightRecursion, SecondOrderPolynomial) {
    // pi_2 = delta(pi_1 F^1) + d/d eps pi_1 with F^2 = 0; delta(g) = x g - g' for a = 1.
    const Polynomial x({0.0, 1.0});
    const Polynomial f1({-1.0, 0.0, 1.0});
    const Polynomial pi1 = f1 * x - f1.derivative();
    const Polynomial g = pi1 * f1;
    const Polynomial short_form = g * x - g.derivative();
    const Polynomial short_computed = weight_recursion(2, demo(), SecondOrderForm::Short);
    EXPECT_EQ(short_computed, short_form);
    const Polynomial full = weight_recursion(2, demo());
    EXPECT_EQ(full.degree(), 6);
    // Both forms are unbiased weights.
    EXPECT_NEAR(gaussian_expectation([&](double v) { return full(v); }, 1.0), 0.0, 1e-10);
    EXPECT_NEAR(gaussian_expectation([&](double v) { return short_computed(v); }, 1.0), 0.0, 1e-10);
}

TEST(WeightRecursion, OrderThreeThrows) { EXPECT_ANY_THROW(weight_recursion(3, demo())); }

TEST(WeightRecursion, PathwiseMatchesPolynomial) {
    const ChaosFunctional fn = demo();
    const Polynomial pi1 = weight_recursion(1, fn);
    const PathGenerator gen(fn.grid, Matrix::identity(1), SeedPolicy{3});
    for (std::uint64_t p = 0; p < 20; ++p) {
        const PathBundle b = gen.generate(p);
        const double x = fn.sample(b);
        EXPECT_NEAR(x, b.terminal(0), 1e-12);
        EXPECT_NEAR(pi1_pathwise(fn, b), pi1(x), 1e-10);
    }
}

TEST(GaussianPrice, ConstantPayoffPricesOne) {
    const ScalarPayoff one{ScalarPayoff::Kind::Constant, 1.0};
    for (double e : {0.0, 0.3, 1.0})
        for (int order : {0, 1, 2}) EXPECT_NEAR(gaussian_weak_price(demo(), one, e, order), 1.0, 1e-10);
}

TEST(GaussianPrice, IdentityDuality) {
    const ScalarPayoff id{ScalarPayoff::Kind::Identity, 0.0};
    const ChaosFunctional fn = demo();
    for (double e : {0.1, 0.5}) EXPECT_NEAR(gaussian_weak_price(fn, id, e, 1), gaussian_exact_price(fn, id, e), 1e-10);
    const McEstimate mc = gaussian_weighted_mc(fn, [](double x) { return x; }, weight_recursion(1, fn), 200000, 7);
    EXPECT_NEAR(mc.mean, 0.0, 3 * mc.stderr_);  // E[F^1] = 0
}

TEST(GaussianPrice, DigitalOracle) {
    const ChaosFunctional fn = demo();
    const Polynomial pi1 = weight_recursion(1, fn);
    const double target = -1.0 / std::sqrt(2.0 * std::numbers::pi);
    EXPECT_NEAR(gaussian_expectation([&](double x) { return (x > 0 ? 1.0 : 0.0) * pi1(x); }, 1.0, {0.0}), target, 1e-9);
    const McEstimate mc =
        gaussian_weighted_mc(fn, [](double x) { return x > 0 ? 1.0 : 0.0; }, pi1, 200000, 11);
    EXPECT_NEAR(mc.mean, target, 3 * mc.stderr_);
}

TEST(GaussianPrice, ExactPriceOfDigital) {
    // P(x + eps (x^2 - 1) > 0) for x ~ N(0, 1), by direct root finding.
    const double e = 0.25;
    const double disc = std::sqrt(1.0 + 4.0 * e * e);
    const double r1 = (-1.0 - disc) / (2.0 * e), r2 = (-1.0 + disc) / (2.0 * e);
    auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    const double expected = cdf(r1) + (1.0 - cdf(r2));
    EXPECT_NEAR(gaussian_exact_price(demo(), ScalarPayoff{ScalarPayoff::Kind::Digital, 0.0}, e), expected, 1e-9);
}

TEST(GaussianPrice, WeakOrderSlope) {
    const ConvergenceReport r =
        weak_convergence(demo(), ScalarPayoff{ScalarPayoff::Kind::Cosine, 0.5}, {0.5, 0.25, 0.125});
    EXPECT_FALSE(r.exact);
    EXPECT_GE(r.slope, 1.7);
    EXPECT_LE(r.slope, 2.3);
}

TEST(ScalarPayoff, Values) {
    EXPECT_EQ((ScalarPayoff{ScalarPayoff::Kind::Digital, 1.0})(1.5), 1.0);
    EXPECT_EQ((ScalarPayoff{ScalarPayoff::Kind::Digital, 1.0})(0.5), 0.0);
    EXPECT_EQ((ScalarPayoff{ScalarPayoff::Kind::Call, 1.0})(1.5), 0.5);
    EXPECT_DOUBLE_EQ((ScalarPayoff{ScalarPayoff::Kind::Cosine, 0.5})(2.0), std::cos(1.0));
    EXPECT_EQ((ScalarPayoff{ScalarPayoff::Kind::Call, 1.0}).breakpoints(), std::vector<double>{1.0});
}
