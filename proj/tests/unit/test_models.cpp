#include <gtest/gtest.h>

#include <cmath>

#include "lmmtaylor/error.hpp"
#include "lmmtaylor/models.hpp"
#include "lmmtaylor/payoffs.hpp"
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
    double se() const { return std::sqrt((sum2 / static_cast<double>(n) - mean() * mean()) / static_cast<double>(n)); }
};

TimeGrid grid_for(const ModelSpec& m) { return TimeGrid::for_horizon(m.tenor.fixing(0), 256, 64); }

ModelSpec table_model(int id) { return table_definition(id).model; }

}  // namespace

TEST(ModelSpec, Validation) {
    ModelSpec m = table_model(2);
    EXPECT_NO_THROW(m.validate());
    ModelSpec bad = m;
    bad.initial_rates[1] = -1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = m;
    bad.initial_rates.pop_back();
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = m;
    bad.eps1 = std::nan("");
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ModelSpec, FellerIsAWarning) {
    ModelSpec m = table_model(3);
    EXPECT_TRUE(m.warnings().empty());
    m.eps2 = 2.0;
    EXPECT_NO_THROW(m.validate());
    EXPECT_FALSE(m.warnings().empty());
}

TEST(Benchmark, ZeroVolFreezesRates) {
    ModelSpec m = table_model(1);
    m.vol = ZeroVol{};
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathBundle b = PathGenerator(g, mg.correlation(), SeedPolicy{1}).generate(0);
    for (const RateState& s : {simulate_benchmark(mg, b), frozen_closed_form(mg, b), simulate_strong_proxy(mg, b, 1)})
        for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(s.rates[static_cast<std::size_t>(i)], m.initial_rates[static_cast<std::size_t>(i)]);
}

TEST(XProcess, EpsZeroStaysAtStart) {
    ModelSpec m = table_model(1);
    m.eps1 = 0.0;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathBundle b = PathGenerator(g, mg.correlation(), SeedPolicy{1}).generate(3);
    Trajectory tr;
    const RateState x = simulate_x_process(mg, b, &tr);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x.rates[static_cast<std::size_t>(i)], m.initial_rates[static_cast<std::size_t>(i)]);
    for (const auto& row : tr) EXPECT_DOUBLE_EQ(row[1], m.initial_rates[1]);
}

TEST(XProcess, EpsOneIsTheBenchmark) {
    const ModelSpec m = table_model(1);
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{1});
    for (std::uint64_t p = 0; p < 20; ++p) {
        const PathBundle b = gen.generate(p);
        const RateState x = simulate_x_process(mg, b), l = simulate_benchmark(mg, b);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(x.rates[static_cast<std::size_t>(i)], l.rates[static_cast<std::size_t>(i)], 1e-12);
    }
}

TEST(XProcess, StrongRemainderIsQuadratic) {
    // Per-path |X^eps - (c + eps Y)| on the second rate of table 1.
    ModelSpec m = table_model(1);
    const TimeGrid g = grid_for(m);
    const std::vector<double> eps{0.5, 0.25, 0.125};
    std::vector<double> err(eps.size(), 0.0);
    const PathGenerator gen(g, ModelGrid(m, g).correlation(), SeedPolicy{2});
    std::vector<ModelGrid> grids;
    for (double e : eps) {
        m.eps1 = e;
        grids.emplace_back(m, g);
    }
    const int paths = 2000;
    for (int p = 0; p < paths; ++p) {
        const PathBundle b = gen.generate(static_cast<std::uint64_t>(p));
        const StrongCorrection y = strong_correction(grids[0], b);
        for (std::size_t e = 0; e < eps.size(); ++e) {
            const double x = simulate_x_process(grids[e], b).rates[1];
            err[e] += std::fabs(x - (m.initial_rates[1] + eps[e] * y.value(g.steps, 1))) / paths;
        }
    }
    for (std::size_t e = 1; e < eps.size(); ++e) {
        const double slope = std::log(err[e - 1] / err[e]) / std::log(2.0);
        EXPECT_GT(slope, 1.7);
        EXPECT_LT(slope, 2.3);
    }
}

TEST(Frozen, ClosedFormMatchesExplicitSwaptionFormula) {
    const ModelSpec m = table_model(2);
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathBundle b = PathGenerator(g, mg.correlation(), SeedPolicy{4}).generate(0);
    const RateState s = frozen_closed_form(mg, b);
    // Rate 2 and rate 3 share driver W^2; alpha L works in percent units.
    const double a = 0.25, c3 = 5.40125, s2 = 0.15, s3 = 0.12, t1 = 0.25;
    const double expected = 5.40 * std::exp(s2 * b.terminal(1) - (a * c3 * s3 / (1 + a * c3) + s2 / 2) * s2 * t1);
    EXPECT_NEAR(s.rates[1], expected, 1e-12 * expected);
    EXPECT_EQ(s.rates[2], 5.40125 * std::exp(s3 * b.terminal(1) - 0.5 * s3 * s3 * t1));
}

TEST(Frozen, TerminalRateIsMartingale) {
    const ModelSpec m = table_model(1);
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{5});
    Moments frozen, bench;
    for (int p = 0; p < 20000; ++p) {
        const PathBundle b = gen.generate(static_cast<std::uint64_t>(p));
        frozen.add(frozen_closed_form(mg, b).rates[2]);
        bench.add(simulate_benchmark(mg, b).rates[2]);
    }
    EXPECT_NEAR(frozen.mean(), 3.8631, 3 * frozen.se());
    EXPECT_NEAR(bench.mean(), 3.8631, 3 * bench.se());
}

TEST(StrongProxy, OrderZeroAgreesWithFrozen) {
    ModelSpec m = table_model(2);
    m.eps1 = 1.0;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{6});
    for (std::uint64_t p = 0; p < 50; ++p) {
        const PathBundle b = gen.generate(p);
        const RateState proxy = simulate_strong_proxy(mg, b, 0), frozen = frozen_closed_form(mg, b);
        for (int i = 0; i < 3; ++i)
            EXPECT_NEAR(proxy.rates[static_cast<std::size_t>(i)] / frozen.rates[static_cast<std::size_t>(i)], 1.0, 1e-3);
    }
}

TEST(StrongProxy, TargetsOnlyEvolveRequestedRates) {
    const ModelSpec m = table_model(1);
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathBundle b = PathGenerator(g, mg.correlation(), SeedPolicy{6}).generate(1);
    const std::vector<int> target{0};
    const RateState one = simulate_strong_proxy(mg, b, 1, target), all = simulate_strong_proxy(mg, b, 1);
    EXPECT_EQ(one.rates[0], all.rates[0]);
    EXPECT_TRUE(std::isnan(one.rates[1]));
    EXPECT_THROW(simulate_strong_proxy(mg, b, 2), std::invalid_argument);
}

TEST(StrongProxy, DriftErrorBound) {
    // |log L-hat - log L| <= int sum_j alpha |X^j - (c_j + Y^j)_+| ds, since sigma_i sigma_j rho_ij <= 1 here.
    const ModelSpec m = table_model(1);
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{7});
    const double alpha = m.tenor.accrual, dt = g.dt();
    for (std::uint64_t p = 0; p < 100; ++p) {
        const PathBundle b = gen.generate(p);
        Trajectory x;
        const RateState l = simulate_x_process(mg, b, &x);
        const RateState proxy = simulate_strong_proxy(mg, b, 1);
        const StrongCorrection y = strong_correction(mg, b);
        double bound = 0.0;
        for (std::size_t k = 0; k < g.steps; ++k)
            for (int j = 1; j < 3; ++j)
                bound += alpha * std::fabs(x[k][static_cast<std::size_t>(j)] -
                                           std::max(m.initial_rates[static_cast<std::size_t>(j)] + y.value(k, j), 0.0)) *
                         dt;
        EXPECT_LE(std::fabs(std::log(proxy.rates[0]) - std::log(l.rates[0])), bound + 1e-12);
    }
}

TEST(Cir, DeterministicWithoutVolOfVol) {
    const CirSpec cir{2.3767, 0.2143, 1.0};
    const TimeGrid g(1.5, 384);
    const PathBundle b = PathGenerator(g, Matrix::identity(1), SeedPolicy{1}).generate(0);
    const auto v = simulate_cir(cir, 0.0, b, 0);
    const TimeGrid fine(1.5, 3072);
    const auto vf = simulate_cir(cir, 0.0, PathGenerator(fine, Matrix::identity(1), SeedPolicy{1}).generate(0), 0);
    for (std::size_t k = 0; k <= g.steps; k += 32) {
        const double exact = cir.base_variance(g.node(k));
        EXPECT_NEAR(v[k], exact, 1e-2);
        // Euler error shrinks linearly with the step.
        EXPECT_LE(std::fabs(vf[k * 8] - exact), std::fabs(v[k] - exact) / 7.0 + 1e-15);
    }
    const auto flat = simulate_cir(CirSpec{2.0, 0.3, 0.3}, 0.0, b, 0);
    for (double x : flat) EXPECT_DOUBLE_EQ(x, 0.3);
}

TEST(Cir, BaseVarianceIntegral) {
    const CirSpec cir{2.3767, 0.2143, 1.0};
    EXPECT_NEAR(cir.base_variance_integral(1.5),
                0.2143 * 1.5 - (1.0 - 0.2143) / 2.3767 * (std::exp(-2.3767 * 1.5) - 1.0), 1e-15);
    EXPECT_DOUBLE_EQ((CirSpec{2.0, 0.3, 0.3}.base_variance_integral(1.5)), 0.3 * 1.5);
    EXPECT_TRUE(cir.feller_holds(0.25));
    EXPECT_FALSE(cir.feller_holds(1.1));
}

TEST(Cir, MeanMatchesExact) {
    const CirSpec cir{2.3767, 0.2143, 1.0};
    const TimeGrid g(1.5, 384);
    const PathGenerator gen(g, Matrix::identity(1), SeedPolicy{3});
    Moments m;
    for (int p = 0; p < 20000; ++p) {
        const auto v = simulate_cir(cir, 0.25, gen.generate(static_cast<std::uint64_t>(p)), 0);
        for (double x : v) ASSERT_GE(x, 0.0);
        m.add(v.back());
    }
    EXPECT_NEAR(m.mean(), cir.base_variance(1.5), 3 * m.se() + 2e-3);
}

TEST(SvBase, TerminalRateIsMartingaleAndMatchesBenchmarkAtZero) {
    ModelSpec m = table_model(3);
    m.eps1 = 0.0;
    m.eps2 = 0.0;
    const TimeGrid g = grid_for(m);
    const ModelGrid mg(m, g);
    const PathGenerator gen(g, mg.correlation(), SeedPolicy{8});
    Moments l2;
    for (int p = 0; p < 20000; ++p) {
        const PathBundle b = gen.generate(static_cast<std::uint64_t>(p));
        const RateState base = sv_base_model(mg, b);
        l2.add(base.rates[1]);
        if (p < 20) {
            const RateState bench = simulate_benchmark(mg, b);
            EXPECT_NEAR(bench.rates[0] / base.rates[0], 1.0, 2e-3);
            EXPECT_NEAR(bench.rates[1] / base.rates[1], 1.0, 2e-3);
        }
    }
    EXPECT_NEAR(l2.mean(), 5.39, 3 * l2.se());
}

TEST(Benchmark, SchemeBiasShrinks) {
    // Coarse grids reuse summed fine increments, so biases are compared on common noise.
    ModelSpec m = table_model(1);
    const double t = m.tenor.fixing(0);
    const std::size_t fine_steps = 1024;
    const TimeGrid fine(t, fine_steps);
    const Matrix rho = ModelGrid(m, fine).correlation();
    const PathGenerator gen(fine, rho, SeedPolicy{9});
    const std::vector<std::size_t> steps{64, 128, 256, 512, 1024};
    std::vector<ModelGrid> grids;
    for (std::size_t s : steps) grids.emplace_back(m, TimeGrid(t, s));
    std::vector<double> price(steps.size(), 0.0);
    const Caplet cap{0, 3.0};
    const int paths = 20000;
    for (int p = 0; p < paths; ++p) {
        const PathBundle b = gen.generate(static_cast<std::uint64_t>(p));
        for (std::size_t s = 0; s < steps.size(); ++s) {
            PathBundle c;
            c.resize(TimeGrid(t, steps[s]), b.drivers);
            const std::size_t r = fine_steps / steps[s];
            for (std::size_t k = 0; k < steps[s]; ++k)
                for (std::size_t d = 0; d < b.drivers; ++d) {
                    double sum = 0.0;
                    for (std::size_t q = 0; q < r; ++q) sum += b.increment(k * r + q, d);
                    c.increments[k * b.drivers + d] = sum;
                }
            c.accumulate();
            price[s] += caplet_payoff(simulate_benchmark(grids[s], c), cap, m.tenor.accrual) / paths;
        }
    }
    for (std::size_t s = 0; s + 2 < steps.size(); ++s) {
        const double d0 = std::fabs(price[s] - price.back()), d1 = std::fabs(price[s + 1] - price.back());
        EXPECT_LT(d1, d0);
        const double step0 = std::fabs(price[s + 1] - price[s]), step1 = std::fabs(price[s + 2] - price[s + 1]);
        EXPECT_GE(step0 / step1, 1.7) << steps[s];
    }
}
