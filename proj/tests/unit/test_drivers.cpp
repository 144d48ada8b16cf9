#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lmmtaylor/drivers.hpp"

using namespace lmmtaylor;

namespace {

Matrix corr2(double r) {
    Matrix m = Matrix::identity(2);
    m(0, 1) = m(1, 0) = r;
    return m;
}

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

}  // namespace

TEST(TimeGrid, Nodes) {
    const TimeGrid g(1.5, 7);
    const auto n = g.nodes();
    ASSERT_EQ(n.size(), 8u);
    EXPECT_EQ(n.front(), 0.0);
    EXPECT_EQ(n.back(), 1.5);
    for (std::size_t k = 1; k < n.size(); ++k) EXPECT_GT(n[k], n[k - 1]);
}

TEST(TimeGrid, ForHorizon) {
    EXPECT_EQ(TimeGrid::for_horizon(1.53151, 256, 64).steps, 393u);
    EXPECT_EQ(TimeGrid::for_horizon(0.25, 256, 64).steps, 64u);
}

TEST(Generator, BitwiseReproducible) {
    const TimeGrid g(1.0, 16);
    const PathGenerator a(g, corr2(0.75), SeedPolicy{7});
    const PathGenerator b(g, corr2(0.75), SeedPolicy{7});
    const PathBundle x = a.generate(12345);
    const PathBundle y = b.generate(12345);
    EXPECT_EQ(x.increments, y.increments);
    EXPECT_EQ(x.cumulative, y.cumulative);
    EXPECT_NE(x.increments, a.generate(12346).increments);
    EXPECT_NE(x.increments, PathGenerator(g, corr2(0.75), SeedPolicy{8}).generate(12345).increments);
}

TEST(Generator, OrderIndependent) {
    const TimeGrid g(1.0, 4);
    const PathGenerator gen(g, Matrix::identity(1), SeedPolicy{3});
    const auto forward = generate_paths(g, Matrix::identity(1), SeedPolicy{3}, 5, false);
    for (int i = 4; i >= 0; --i) EXPECT_EQ(gen.generate(static_cast<std::uint64_t>(i)).increments, forward[i].increments);
}

TEST(Generator, TagsGiveIndependentStreams) {
    const TimeGrid g(1.0, 4);
    const PathGenerator a(g, Matrix::identity(2), SeedPolicy{3}, 0);
    const PathGenerator b(g, Matrix::identity(2), SeedPolicy{3}, 1);
    EXPECT_NE(a.generate(0).increments, b.generate(0).increments);
}

TEST(Generator, CumulativeIsPrefixSum) {
    const TimeGrid g(1.0, 32);
    const PathBundle p = PathGenerator(g, corr2(0.3), SeedPolicy{1}).generate(0);
    for (std::size_t m = 0; m < 2; ++m) {
        EXPECT_EQ(p.value(0, m), 0.0);
        double s = 0.0;
        for (std::size_t k = 0; k < g.steps; ++k) {
            s += p.increment(k, m);
            EXPECT_EQ(p.value(k + 1, m), s);
        }
    }
}

TEST(Generator, TerminalCorrelation) {
    const TimeGrid g(1.0, 4);
    const PathGenerator gen(g, corr2(0.75), SeedPolicy{42});
    double sxy = 0, sxx = 0, syy = 0, sx = 0, sy = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const PathBundle p = gen.generate(static_cast<std::uint64_t>(i));
        const double x = p.terminal(0), y = p.terminal(1);
        sx += x;
        sy += y;
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    const double mx = sx / n, my = sy / n;
    const double r = (sxy / n - mx * my) / std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
    EXPECT_GE(r, 0.74);
    EXPECT_LE(r, 0.76);
}

TEST(Generator, AntitheticPairsCancel) {
    const TimeGrid g(1.0, 8);
    const auto paths = generate_paths(g, corr2(0.5), SeedPolicy{9}, 4, true);
    ASSERT_EQ(paths.size(), 8u);
    for (std::size_t i = 0; i < paths.size(); i += 2) {
        EXPECT_FALSE(paths[i].antithetic);
        EXPECT_TRUE(paths[i + 1].antithetic);
        EXPECT_EQ(paths[i].path_index, paths[i + 1].path_index);
        for (std::size_t m = 0; m < 2; ++m) EXPECT_EQ(paths[i].terminal(m) + paths[i + 1].terminal(m), 0.0);
    }
}

TEST(Integrals, TrapezoidSingleStep) {
    PathBundle b;
    b.resize(TimeGrid(0.5, 1), 1);
    b.increments[0] = 1.3;
    b.accumulate();
    EXPECT_DOUBLE_EQ(time_integral_W(b, 0), 1.3 * 0.5 / 2.0);
    b.increments[0] = 0.0;
    b.accumulate();
    EXPECT_EQ(time_integral_W(b, 0), 0.0);
}

TEST(Integrals, TimeIntegralVariance) {
    const TimeGrid g(1.0, 64);
    const PathGenerator gen(g, Matrix::identity(1), SeedPolicy{5});
    Moments m;
    for (int i = 0; i < 100000; ++i) m.add(time_integral_W(gen.generate(static_cast<std::uint64_t>(i)), 0));
    EXPECT_NEAR(m.var(), 1.0 / 3.0, 0.01);
    EXPECT_NEAR(m.mean(), 0.0, 3.0 * m.se());
}

TEST(Integrals, IteratedIntegralMoments) {
    const TimeGrid g(1.0, 64);
    const PathGenerator gen(g, Matrix::identity(1), SeedPolicy{6});
    const std::vector<double> one(g.steps + 1, 1.0), zero(g.steps + 1, 0.0);
    Moments m;
    for (int i = 0; i < 100000; ++i) {
        const PathBundle p = gen.generate(static_cast<std::uint64_t>(i));
        const double v = iterated_integral(p, one, one, 0, 0);
        if (i < 10) {
            EXPECT_EQ(iterated_integral(p, one, zero, 0, 0), 0.0);
            double qv = 0.0;
            for (std::size_t k = 0; k < g.steps; ++k) qv += p.increment(k, 0) * p.increment(k, 0);
            EXPECT_NEAR(v, 0.5 * (p.terminal(0) * p.terminal(0) - qv), 1e-12);
        }
        m.add(v);
    }
    EXPECT_NEAR(m.mean(), 0.0, 3.0 * m.se());
    // Discrete Ito isometry gives (1 - 1/steps) / 2.
    EXPECT_NEAR(m.var(), 0.5, 0.02);
}

TEST(Integrals, StochasticIntegralIsItoSum) {
    const TimeGrid g(1.0, 4);
    const PathBundle p = PathGenerator(g, Matrix::identity(1), SeedPolicy{2}).generate(0);
    const std::vector<double> f{1.0, 2.0, 3.0, 4.0, 5.0};
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += f[k] * p.increment(k, 0);
    EXPECT_DOUBLE_EQ(stochastic_integral(p, f, 0), s);
}

TEST(Integrals, GridMismatchThrows) {
    const PathBundle p = PathGenerator(TimeGrid(1.0, 4), Matrix::identity(1), SeedPolicy{2}).generate(0);
    const std::vector<double> f(3, 1.0);
    EXPECT_ANY_THROW(iterated_integral(p, f, f, 0, 0));
}

TEST(Dump, PathCsv) {
    const PathBundle p = PathGenerator(TimeGrid(1.0, 2), Matrix::identity(2), SeedPolicy{2}).generate(0);
    std::ostringstream os;
    write_path_csv(os, p);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,W1,W2");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 3);
}
