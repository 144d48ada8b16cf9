#include "lmmtaylor/drivers.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <stdexcept>

#include "lmmtaylor/error.hpp"

namespace lmmtaylor {

TimeGrid::TimeGrid(double end, std::size_t n) : t_end(end), steps(n) {
    if (n < 1) throw ConfigError("engine.steps_per_year", "grid needs at least one step");
    if (!(end > 0.0)) throw std::invalid_argument("grid end must be positive");
}

TimeGrid TimeGrid::for_horizon(double t_end, double steps_per_year, std::size_t min_steps) {
    if (!(steps_per_year > 0.0)) throw ConfigError("engine.steps_per_year", "must be positive");
    // Guard against 256 * 1.5 landing a hair above an integer.
    const double raw = steps_per_year * t_end;
    auto steps = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    if (steps < min_steps) steps = min_steps;
    if (steps < 1) steps = 1;
    return TimeGrid(t_end, steps);
}

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> out(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) out[k] = node(k);
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_grid(const PathBundle& b, std::span<const double> f) {
    if (f.size() != b.grid.steps + 1)
        throw std::invalid_argument("sampled function does not match the path grid");
}

}  // namespace

std::uint64_t SeedPolicy::stream_seed(std::uint64_t path_index, std::uint64_t tag) const {
    return splitmix64(splitmix64(splitmix64(master_seed) ^ path_index) ^ (tag * 0xd1b54a32d192ed03ULL));
}

void PathBundle::resize(const TimeGrid& g, std::size_t n_drivers) {
    grid = g;
    drivers = n_drivers;
    increments.assign(g.steps * n_drivers, 0.0);
    cumulative.assign((g.steps + 1) * n_drivers, 0.0);
}

void PathBundle::accumulate() {
    for (std::size_t m = 0; m < drivers; ++m) cumulative[m] = 0.0;
    for (std::size_t k = 0; k < grid.steps; ++k)
        for (std::size_t m = 0; m < drivers; ++m)
            cumulative[(k + 1) * drivers + m] = cumulative[k * drivers + m] + increments[k * drivers + m];
}

void PathBundle::negate() {
    for (double& x : increments) x = -x;
    for (double& x : cumulative) x = -x;
    antithetic = !antithetic;
}

PathGenerator::PathGenerator(TimeGrid grid, Matrix correlation, SeedPolicy policy, std::uint64_t tag)
    : grid_(grid),
      correlation_(std::move(correlation)),
      factor_(factorize(correlation_)),
      policy_(policy),
      tag_(tag) {}

void PathGenerator::generate(std::uint64_t path_index, PathBundle& out) const {
    const std::size_t d = factor_.n;
    if (out.drivers != d || out.grid != grid_) out.resize(grid_, d);
    out.seed = policy_.master_seed;
    out.path_index = path_index;
    out.antithetic = false;

    std::mt19937_64 engine(policy_.stream_seed(path_index, tag_));
    std::normal_distribution<double> normal;
    const double sq = std::sqrt(grid_.dt());
    double z[64];
    std::vector<double> zbig;
    double* zp = z;
    if (d > 64) {
        zbig.resize(d);
        zp = zbig.data();
    }
    for (std::size_t k = 0; k < grid_.steps; ++k) {
        for (std::size_t m = 0; m < d; ++m) zp[m] = normal(engine) * sq;
        double* row = &out.increments[k * d];
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t m = 0; m <= i; ++m) s += factor_(i, m) * zp[m];
            row[i] = s;
        }
    }
    out.accumulate();
}

PathBundle PathGenerator::generate(std::uint64_t path_index) const {
    PathBundle b;
    generate(path_index, b);
    return b;
}

std::vector<PathBundle> generate_paths(const TimeGrid& grid, const Matrix& correlation,
                                       const SeedPolicy& policy, std::size_t count, bool antithetic) {
    if (count < 1) throw std::invalid_argument("path count must be positive");
    PathGenerator gen(grid, correlation, policy);
    std::vector<PathBundle> out;
    out.reserve(antithetic ? 2 * count : count);
    for (std::size_t p = 0; p < count; ++p) {
        out.push_back(gen.generate(p));
        if (antithetic) {
            out.push_back(out.back());
            out.back().negate();
        }
    }
    return out;
}

double time_integral_W(const PathBundle& bundle, std::size_t driver) {
    if (driver >= bundle.drivers) throw std::out_of_range("driver index out of range");
    double s = 0.0;
    for (std::size_t k = 0; k < bundle.grid.steps; ++k)
        s += bundle.value(k, driver) + bundle.value(k + 1, driver);
    return 0.5 * s * bundle.grid.dt();
}

double stochastic_integral(const PathBundle& bundle, std::span<const double> f, std::size_t driver) {
    if (driver >= bundle.drivers) throw std::out_of_range("driver index out of range");
    check_grid(bundle, f);
    double s = 0.0;
    for (std::size_t k = 0; k < bundle.grid.steps; ++k) s += f[k] * bundle.increment(k, driver);
    return s;
}

double iterated_integral(const PathBundle& bundle, std::span<const double> f,
                         std::span<const double> g, std::size_t outer_driver,
                         std::size_t inner_driver) {
    return iterated_integral(bundle, outer_driver, f, bundle, inner_driver, g);
}

double iterated_integral(const PathBundle& outer, std::size_t outer_driver,
                         std::span<const double> f, const PathBundle& inner,
                         std::size_t inner_driver, std::span<const double> g) {
    if (outer.grid != inner.grid) throw std::invalid_argument("bundles live on different grids");
    if (outer_driver >= outer.drivers || inner_driver >= inner.drivers)
        throw std::out_of_range("driver index out of range");
    check_grid(outer, f);
    check_grid(outer, g);
    double running = 0.0, s = 0.0;
    for (std::size_t k = 0; k < outer.grid.steps; ++k) {
        s += f[k] * running * outer.increment(k, outer_driver);
        running += g[k] * inner.increment(k, inner_driver);
    }
    return s;
}

void write_path_csv(std::ostream& os, const PathBundle& bundle) {
    os << "t";
    for (std::size_t m = 0; m < bundle.drivers; ++m) os << ",W" << (m + 1);
    os << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k <= bundle.grid.steps; ++k) {
        os << bundle.grid.node(k);
        for (std::size_t m = 0; m < bundle.drivers; ++m) os << ',' << bundle.value(k, m);
        os << '\n';
    }
}

}  // namespace lmmtaylor
