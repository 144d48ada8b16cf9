#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lmmtaylor/market.hpp"

namespace lmmtaylor {

/// Uniform grid t_k = k * t_end / steps.
struct TimeGrid {
    double t_end = 0.0;
    std::size_t steps = 0;

    TimeGrid() = default;
    TimeGrid(double end, std::size_t n);

    /// ceil(steps_per_year * t_end) steps, but never fewer than min_steps.
    static TimeGrid for_horizon(double t_end, double steps_per_year, std::size_t min_steps);

    double dt() const { return t_end / static_cast<double>(steps); }
    double node(std::size_t k) const {
        return k == steps ? t_end : t_end * static_cast<double>(k) / static_cast<double>(steps);
    }
    std::vector<double> nodes() const;

    bool operator==(const TimeGrid&) const = default;
};

inline constexpr std::uint64_t kDefaultStreamTag = 0;

/// Derives an independent generator seed per (path, tag) from a master seed.
struct SeedPolicy {
    std::uint64_t master_seed = 0;

    std::uint64_t stream_seed(std::uint64_t path_index, std::uint64_t tag = kDefaultStreamTag) const;
};

/// Correlated Brownian increments on a grid. Storage is step-major:
/// increment(k, m) is dW^m over [t_k, t_{k+1}].
struct PathBundle {
    TimeGrid grid;
    std::size_t drivers = 0;
    std::vector<double> increments;  // steps * drivers
    std::vector<double> cumulative;  // (steps + 1) * drivers
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    bool antithetic = false;  // true for the negated half of a pair

    double increment(std::size_t k, std::size_t m) const { return increments[k * drivers + m]; }
    double value(std::size_t k, std::size_t m) const { return cumulative[k * drivers + m]; }
    double terminal(std::size_t m) const { return value(grid.steps, m); }

    void resize(const TimeGrid& g, std::size_t n_drivers);
    /// Rebuilds cumulative from increments.
    void accumulate();
    /// Turns this bundle into its antithetic partner.
    void negate();
};

/// Counter-based generator: bundle `path_index` depends only on
/// (master seed, path_index, tag), never on the order of generation.
class PathGenerator {
public:
    PathGenerator(TimeGrid grid, Matrix correlation, SeedPolicy policy,
                  std::uint64_t tag = kDefaultStreamTag);

    const TimeGrid& grid() const { return grid_; }
    std::size_t drivers() const { return factor_.n; }
    const Matrix& correlation() const { return correlation_; }

    /// Fills `out` with the bundle for `path_index` (the "+" half of a pair).
    void generate(std::uint64_t path_index, PathBundle& out) const;
    PathBundle generate(std::uint64_t path_index) const;

private:
    TimeGrid grid_;
    Matrix correlation_;
    Matrix factor_;
    SeedPolicy policy_;
    std::uint64_t tag_;
};

/// Materializes `count` bundles, or `count` antithetic pairs laid out
/// (+0, -0, +1, -1, ...) when `antithetic` is set.
std::vector<PathBundle> generate_paths(const TimeGrid& grid, const Matrix& correlation,
                                       const SeedPolicy& policy, std::size_t count, bool antithetic);

/// Trapezoidal integral of W^driver over the whole grid.
double time_integral_W(const PathBundle& bundle, std::size_t driver);

/// Ito sum of f(t_k) dW^driver_k.
double stochastic_integral(const PathBundle& bundle, std::span<const double> f, std::size_t driver);

/// Ito (left-point) discretization of
/// int_0^T f(t) (int_0^t g(s) dW_inner(s)) dW_outer(t); f and g sampled at grid nodes.
double iterated_integral(const PathBundle& bundle, std::span<const double> f,
                         std::span<const double> g, std::size_t outer_driver,
                         std::size_t inner_driver);

/// Same inner integral, but against an outer driver from another bundle on the same grid.
double iterated_integral(const PathBundle& outer, std::size_t outer_driver,
                         std::span<const double> f, const PathBundle& inner,
                         std::size_t inner_driver, std::span<const double> g);

/// Debug dump: header `t,W1,...,Wm`, one row per grid node.
void write_path_csv(std::ostream& os, const PathBundle& bundle);

}  // namespace lmmtaylor
