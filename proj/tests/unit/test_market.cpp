#include <gtest/gtest.h>

#include <cmath>

#include "lmmtaylor/error.hpp"
#include "lmmtaylor/market.hpp"

using namespace lmmtaylor;

namespace {

TenorStructure caplet_tenor() { return {1.53151, 0.50137, 3}; }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace

TEST(Tenor, DatesAndFixings) {
    const TenorStructure t = caplet_tenor();
    const auto d = t.dates();
    ASSERT_EQ(d.size(), 5u);
    EXPECT_EQ(d[0], 0.0);
    EXPECT_DOUBLE_EQ(d[1], 1.53151);
    for (std::size_t k = 2; k < d.size(); ++k) EXPECT_NEAR(d[k] - d[k - 1], 0.50137, 1e-12);
    EXPECT_DOUBLE_EQ(t.fixing(0), 1.53151);
    EXPECT_DOUBLE_EQ(t.payment(2), 1.53151 + 3 * 0.50137);
}

TEST(Tenor, RejectsBadInput) {
    EXPECT_THROW((TenorStructure{1.0, 0.0, 2}).validate(), ConfigError);
    EXPECT_THROW((TenorStructure{1.0, 0.5, 0}).validate(), ConfigError);
}

TEST(Volatility, ZeroAndConstant) {
    const TenorStructure t{0.25, 0.25, 3};
    EXPECT_EQ(eval_vol(ZeroVol{}, t, 1, 0.1), 0.0);
    const ConstantVol c{{0.18, 0.15, 0.12}};
    EXPECT_EQ(eval_vol(c, t, 0, 0.0), 0.18);
    EXPECT_EQ(eval_vol(c, t, 0, 0.2), 0.18);
}

TEST(Volatility, AbcdAtFixingIsDPlusE) {
    const AbcdVol v{-0.113035, 0.22911, 0.113035, 0.684784};
    const TenorStructure t = caplet_tenor();
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(eval_vol(v, t, i, t.fixing(i)), 0.797819, 1e-12);
}

TEST(Volatility, AbcdIsPure) {
    const AbcdVol v{-0.113035, 0.22911, 0.113035, 0.684784};
    const TenorStructure t = caplet_tenor();
    EXPECT_EQ(eval_vol(v, t, 2, 0.7), eval_vol(v, t, 2, 0.7));
}

TEST(Volatility, RejectsTimesPastFixing) {
    const TenorStructure t = caplet_tenor();
    EXPECT_ANY_THROW(eval_vol(ConstantVol{{0.1, 0.1, 0.1}}, t, 0, 2.0));
    EXPECT_ANY_THROW(eval_vol(ConstantVol{{0.1, 0.1, 0.1}}, t, 3, 0.0));
}

TEST(Volatility, ProductIntegralMatchesClosedForm) {
    const TenorStructure t{0.25, 0.25, 3};
    const ConstantVol c{{0.18, 0.15, 0.12}};
    EXPECT_NEAR(vol_product_integral(c, t, 0, 1, 0.0, 0.25, 8), 0.18 * 0.15 * 0.25, 1e-15);
    // Simpson on a smooth vol against a fine reference.
    const AbcdVol v{-0.113035, 0.22911, 0.113035, 0.684784};
    const TenorStructure tc = caplet_tenor();
    const double coarse = vol_product_integral(v, tc, 1, 2, 0.0, 1.5, 64);
    const double fine = vol_product_integral(v, tc, 1, 2, 0.0, 1.5, 4096);
    EXPECT_NEAR(coarse, fine, 1e-10);
}

TEST(Correlation, ExpDecayEntries) {
    const Matrix rho = resolve_correlation(ExpDecayCorrelation{0.49, 0.13}, 3);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rho(i, i), 1.0);
    EXPECT_NEAR(rho(0, 1), 0.49 + 0.51 * std::exp(-0.13), 1e-15);
    EXPECT_NEAR(rho(0, 1), 0.937786, 1e-4);
    EXPECT_NEAR(rho(0, 2), 0.49 + 0.51 * std::exp(-0.26), 1e-15);
    EXPECT_EQ(rho(0, 1), rho(1, 0));
}

TEST(Correlation, ExplicitReturnedUnchanged) {
    Matrix m = Matrix::identity(2);
    m(0, 1) = m(1, 0) = 0.75;
    EXPECT_EQ(resolve_correlation(ExplicitCorrelation{m}, 2), m);
}

TEST(Correlation, SvLayout) {
    const Matrix rho = resolve_correlation(SvCorrelation{0.63, -0.75, -0.6}, 3);
    EXPECT_EQ(rho(0, 1), 0.63);
    EXPECT_EQ(rho(0, 2), -0.75);
    EXPECT_EQ(rho(1, 2), -0.6);
    EXPECT_EQ(rho(2, 1), -0.6);
}

TEST(Factorize, IdentityAndTwoByTwo) {
    EXPECT_EQ(factorize(Matrix::identity(3)), Matrix::identity(3));
    Matrix m = Matrix::identity(2);
    m(0, 1) = m(1, 0) = 0.75;
    const Matrix l = factorize(m);
    EXPECT_NEAR(l(0, 0), 1.0, 1e-15);
    EXPECT_EQ(l(0, 1), 0.0);
    EXPECT_NEAR(l(1, 0), 0.75, 1e-15);
    EXPECT_NEAR(l(1, 1), 0.661438, 1e-6);
    EXPECT_LT(max_abs_diff(multiply_transpose(l), m), 1e-12);
}

TEST(Factorize, RankDeficientAccepted) {
    Matrix m(2, 1.0);
    const Matrix l = factorize(m);
    EXPECT_LT(max_abs_diff(multiply_transpose(l), m), 1e-12);
}

TEST(Factorize, IndefiniteNamesMinor) {
    Matrix m = Matrix::identity(3);
    m(0, 1) = m(1, 0) = 0.9;
    m(0, 2) = m(2, 0) = -0.9;
    m(1, 2) = m(2, 1) = 0.9;
    try {
        factorize(m);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
    }
}

TEST(Factorize, ExpDecayUpToFiftyRates) {
    for (double floor : {0.0, 0.49, 0.9})
        for (double rate : {0.01, 0.13, 1.0})
            for (std::size_t n : {1u, 2u, 10u, 50u}) {
                const Matrix rho = resolve_correlation(ExpDecayCorrelation{floor, rate}, n);
                const Matrix l = factorize(rho);
                EXPECT_LT(max_abs_diff(multiply_transpose(l), rho), 1e-10) << floor << ' ' << rate << ' ' << n;
            }
}

TEST(Factorize, SvCorrelationRoundTrip) {
    const Matrix rho = resolve_correlation(SvCorrelation{0.63, -0.75, -0.6}, 3);
    EXPECT_LT(max_abs_diff(multiply_transpose(factorize(rho)), rho), 1e-10);
}

TEST(Discount, FixedAndForwardProduct) {
    const std::vector<double> c{0.054, 0.0539};
    const TenorStructure t{1.5, 1.5, 2};
    EXPECT_EQ(terminal_bond({DiscountConvention::Kind::Fixed, 0.9}, t, std::nullopt, c), 0.9);
    const double p = terminal_bond({DiscountConvention::Kind::ForwardProduct, 1.0}, t, 0.0528875, c);
    EXPECT_NEAR(p, 1.0 / ((1 + 1.5 * 0.0528875) * (1 + 1.5 * 0.054) * (1 + 1.5 * 0.0539)), 1e-15);
}
