#include <gtest/gtest.h>

#include <cmath>

#include "lmmtaylor/engine.hpp"
#include "lmmtaylor/error.hpp"
#include "lmmtaylor/tables.hpp"
#include "lmmtaylor/taylor.hpp"

using namespace lmmtaylor;

namespace {

struct Moments {
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    void add(double x) {
        sum += x;
        sum2 += x * x;
        ++n;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double var() const { return sum2 / static_cast<double>(n) - mean() * mean(); }
    double se() const { return std::sqrt(var() / static_cast<double>(n)); }
};

double component(const WeightSample& w, const std::string& name) {
    for (const auto& [k, v] : w.components)
        if (k == name) return v;
    ADD_FAILURE() << "missing component " << name;
    return 0.0;
}

TimeGrid grid_for(const ModelSpec& m) { return TimeGrid::for_horizon(m.tenor.fixing(0), 256, 64); }

}  // namespace

TEST(StrongCorrection, ZeroVolGivesZero) {
    ModelSpec m = table_definition(1).model;
    m.vol = ZeroVol{};
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const StrongCorrection y = strong_correction(mg, PathGenerator(g, mg.correlation(), SeedPolicy{1}).generate(0));
    for (std::size_t k = 0; k <= g.steps; ++k)
        for (int i = 0; i < 3; ++i) EXPECT_EQ(y.value(k, i), 0.0);
}

TEST(StrongCorrection, MomentsOnTableOne) {
    const ModelSpec m = table_definition(1).model;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{2});
    const std::size_t k = g.steps / 2;
    const double t = g.node(k);
    Moments terminal, second;
    StrongCorrection first;
    for (int p = 0; p < 20000; ++p) {
        const StrongCorrection y = strong_correction(mg, gen.generate(static_cast<std::uint64_t>(p)));
        if (p == 0) {
            first = y;
            for (int i = 0; i < 3; ++i) EXPECT_EQ(y.value(0, i), 0.0);
        } else {
            EXPECT_EQ(y.drift, first.drift);
        }
        terminal.add(y.value(k, 2));
        second.add(y.value(k, 1));
    }
    // Y^N is c_N int sigma_N dW: mean zero, variance c_N^2 int sigma_N^2.
    const double c3 = 3.8631;
    const double var = c3 * c3 * vol_product_integral(m.vol, m.tenor, 2, 2, 0.0, t, 512);
    EXPECT_NEAR(terminal.mean(), 0.0, 3 * terminal.se());
    EXPECT_NEAR(terminal.var(), var, 3 * var * std::sqrt(2.0 / 20000));
    // Y^2 has drift -c_2 f_3 rho_23 int sigma_2 sigma_3, f_3 = alpha c_3 / (1 + alpha c_3).
    const double a = m.tenor.accrual, rho23 = 0.49 + 0.51 * std::exp(-0.13);
    const double drift = -3.7574 * a * c3 / (1 + a * c3) * rho23 * vol_product_integral(m.vol, m.tenor, 1, 2, 0.0, t, 512);
    EXPECT_NEAR(second.mean(), drift, 3 * second.se());
    EXPECT_NEAR(first.drift[k * 3 + 1], drift, 1e-6 * std::fabs(drift));
}

TEST(StrongTaylor, Operator) {
    const std::vector<double> d{2.0, 3.0};
    EXPECT_EQ(strong_taylor(1.5, d, 0.7, 0), 1.5);
    EXPECT_EQ(strong_taylor(1.5, d, 0.0, 1), 1.5);
    EXPECT_DOUBLE_EQ(strong_taylor(1.5, d, 0.5, 1), 2.5);
    EXPECT_DOUBLE_EQ(strong_taylor(1.5, d, 0.5, 2), 2.5 + 0.25 * 3.0 / 2.0);
    EXPECT_ANY_THROW(strong_taylor(1.5, d, 0.5, 3));
}

TEST(FiniteDifference, LinearPricerIsExact) {
    for (double h : {1e-3, 0.05, 1.0}) EXPECT_NEAR(finite_difference_check([](double e) { return 3.0 - 2.5 * e; }, 0.2, h), -2.5, 1e-12);
}

TEST(MalliavinCov, DeterminantAndInverse) {
    const double l1 = 0.054, l2 = 0.0539, s1 = 0.18, s2 = 0.15, rho = 0.75, t = 0.25;
    const CovMatrix2 c = malliavin_cov_2d(l1, l2, s1, s2, rho, t);
    const double direct = c.gamma[0][0] * c.gamma[1][1] - c.gamma[0][1] * c.gamma[1][0];
    EXPECT_NEAR(c.det, direct, 1e-12 * std::fabs(direct));
    EXPECT_NEAR(c.det, l1 * l1 * l2 * l2 * s1 * s1 * s2 * s2 * t * t * (1 - rho * rho), 1e-12 * c.det);
    EXPECT_EQ(c.gamma[0][1], c.gamma[1][0]);
    for (double r : {-0.99, -0.5, 0.0, 0.75, 0.99}) {
        const CovMatrix2 m = malliavin_cov_2d(l1, l2, s1, s2, r, t);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double v = m.gamma[i][0] * m.inverse[0][j] + m.gamma[i][1] * m.inverse[1][j];
                EXPECT_NEAR(v, i == j ? 1.0 : 0.0, 1e-10);
            }
    }
}

TEST(MalliavinCov, UncorrelatedIsDiagonal) {
    const CovMatrix2 c = malliavin_cov_2d(2.0, 3.0, 0.1, 0.2, 0.0, 0.5);
    EXPECT_EQ(c.gamma[0][1], 0.0);
    EXPECT_DOUBLE_EQ(c.gamma[0][0], 4.0 * 0.01 * 0.5);
    EXPECT_DOUBLE_EQ(c.gamma[1][1], 9.0 * 0.04 * 0.5);
    EXPECT_DOUBLE_EQ(c.inverse[0][0], 1.0 / c.gamma[0][0]);
    EXPECT_DOUBLE_EQ(c.inverse[1][1], 1.0 / c.gamma[1][1]);
}

TEST(MalliavinCov, SingularThrows) {
    EXPECT_THROW(malliavin_cov_2d(1.0, 1.0, 0.1, 0.1, 1.0, 1.0), NumericError);
    EXPECT_THROW(malliavin_cov_2d(1.0, 1.0, 0.1, 0.1, 0.5, 0.0), std::invalid_argument);
}

TEST(FrozenWeights, LiteralFirstPartVanishesWithoutCorrelation) {
    ModelSpec m = table_definition(2).model;
    ExplicitCorrelation c{Matrix::identity(2)};
    m.corr = c;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{3});
    for (std::uint64_t p = 0; p < 10; ++p) {
        const WeightSample w = frozen_swaption_weights(mg, gen.generate(p), WeightForm::Literal);
        EXPECT_EQ(component(w, "zeta1"), 0.0);
    }
}

TEST(FrozenWeights, SingularCorrelationThrows) {
    ModelSpec m = table_definition(2).model;
    Matrix r(2, 1.0);
    m.corr = ExplicitCorrelation{r};
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    EXPECT_THROW(FrozenWeights(mg, {0, 1}), NumericError);
}

TEST(FrozenWeights, MeanZero) {
    const ModelSpec m = table_definition(2).model;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{4});
    const FrozenWeights derived(mg, {0, 1}), literal(mg, {0, 1}, WeightForm::Literal);
    Moments d, l;
    for (int p = 0; p < 50000; ++p) {
        const PathBundle b = gen.generate(static_cast<std::uint64_t>(p));
        d.add(derived(b).zeta);
        l.add(literal(b).zeta);
    }
    EXPECT_NEAR(d.mean(), 0.0, 3 * d.se());
    EXPECT_NEAR(l.mean(), 0.0, 3 * l.se());
}

TEST(SvWeights, MeanZero) {
    const ModelSpec m = table_definition(3).model;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{5});
    const PathGenerator indep(g, Matrix::identity(2), SeedPolicy{5}, 1);
    const SvWeights derived(mg), literal(mg, WeightForm::Literal);
    Moments dz, dp, lz;
    for (int p = 0; p < 20000; ++p) {
        const PathBundle b = gen.generate(static_cast<std::uint64_t>(p));
        const PathBundle z = indep.generate(static_cast<std::uint64_t>(p));
        const WeightSample w = derived(b, nullptr);
        dz.add(w.zeta);
        dp.add(w.pi);
        const WeightSample wl = literal(b, &z);
        EXPECT_TRUE(std::isfinite(wl.zeta) && std::isfinite(wl.pi));
        lz.add(wl.zeta);
    }
    EXPECT_NEAR(dz.mean(), 0.0, 3 * dz.se());
    EXPECT_NEAR(dp.mean(), 0.0, 3 * dp.se());
    EXPECT_NEAR(lz.mean(), 0.0, 3 * lz.se());
    EXPECT_THROW(literal(gen.generate(0), nullptr), std::invalid_argument);
}

TEST(SvWeights, RequiresTwoRatesOnTwoDrivers) {
    const ModelSpec m = table_definition(2).model;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    EXPECT_THROW(SvWeights{mg}, std::invalid_argument);
}

TEST(Duality, ZetaOnTheFirstRate) {
    // f = alpha (L^1 - 0)_+ is linear in L^1, so E[f zeta] is d/d eps1 E[f]. High vols and a long
    // horizon make the drift derivative large enough to resolve.
    ModelSpec base;
    base.units = RateUnits::Percent;
    base.tenor = {2.0, 1.0, 3};
    base.initial_rates = {5.0, 5.0, 5.0};
    base.vol = ConstantVol{{0.5, 0.5, 0.5}};
    base.corr = ExpDecayCorrelation{0.8, 0.1};
    base.eps1 = 0.0;
    ModelSpec up = base, down = base;
    up.eps1 = 0.05;
    down.eps1 = -0.05;
    EngineSettings s;
    s.paths = 200000;
    s.workers = 1;
    const RunResult r = run_cells(base, {Caplet{0, 0.0}},
                                  {{Quantity::Benchmark, 0, 0}, {Quantity::Benchmark, 0, 1}, {Quantity::PayoffZeta, 0}},
                                  s, {up, down});
    const double fd = (r.cells[0].mean - r.cells[1].mean) / 0.1;
    EXPECT_NEAR(r.cells[2].mean, fd, 0.05 * std::fabs(fd)) << "stderr " << r.cells[2].stderr_;
}
