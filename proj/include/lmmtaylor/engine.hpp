#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmmtaylor/chaos.hpp"
#include "lmmtaylor/models.hpp"
#include "lmmtaylor/payoffs.hpp"
#include "lmmtaylor/taylor.hpp"

namespace lmmtaylor {

enum class Method { Benchmark, Frozen, StrongTaylor, WeakTaylor };

struct MethodSpec {
    Method method = Method::Benchmark;
    int order = 1;  // strong proxy order (0 or 1); weak order is always 1
    bool operator==(const MethodSpec&) const = default;
};

/// CSV label: benchmark, frozen (base_model under stochastic volatility),
/// strong_taylor, strong_taylor_0, weak_taylor.
std::string method_label(const MethodSpec& method, bool stochastic_vol);
std::optional<MethodSpec> parse_method(const std::string& label);

/// Environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "LMMTAYLOR_WORKERS";

struct EngineSettings {
    std::size_t paths = 1'000'000;  // simulated paths; antithetic pairs count as two
    double steps_per_year = 256.0;
    std::size_t min_steps = 64;
    std::uint64_t seed = 42;
    bool antithetic = true;
    unsigned workers = 0;  // 0: environment variable, then hardware concurrency
    WeightForm weights = WeightForm::Derived;
    std::size_t batch_pairs = 256;  // fixed partition, independent of workers

    bool operator==(const EngineSettings&) const = default;
};

unsigned resolve_workers(unsigned requested);

/// Per-path quantities the runner can average. Payoff-based quantities are raw
/// (not scaled to bps); rate quantities read `Cell::index` as a rate.
enum class Quantity {
    Benchmark,            // f(L) from the log-Euler benchmark of `variant`
    Frozen,               // f(L^0), frozen drift or (0,0) model
    Strong,               // f(L-hat), strong proxy of order Cell::order
    Weak,                 // f(L^0) (1 + eps1 zeta + eps2 pi)
    BenchmarkMinusFrozen,
    Zeta,
    Pi,
    PayoffZeta,
    PayoffPi,
    BenchmarkRate,
    FrozenRate,
    StrongRate,
};

struct Cell {
    Quantity quantity = Quantity::Benchmark;
    int index = 0;    // payoff index, or rate index for *Rate quantities
    int variant = -1; // Benchmark only: -1 for the main model, else index into variants
    int order = 1;    // Strong and StrongRate only
};

struct CellEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct RunResult {
    std::vector<CellEstimate> cells;
    std::size_t paths = 0;
    std::size_t steps = 0;
    double elapsed = 0.0;
};

/// Evaluates every cell on the same paths. Variants must share the main
/// model's drivers and correlation; typically they differ in eps1/eps2.
RunResult run_cells(const ModelSpec& model, const std::vector<PayoffSpec>& payoffs,
                    const std::vector<Cell>& cells, const EngineSettings& settings,
                    const std::vector<ModelSpec>& variants = {});

struct PriceEstimate {
    MethodSpec method;
    std::string label;
    double strike = 0.0;
    double mean_bps = 0.0;
    double stderr_bps = 0.0;
    std::size_t paths = 0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    double elapsed = 0.0;
    double discount = 1.0;  // terminal bond applied (1 for caplets)
};

PriceEstimate price(const ModelSpec& model, const PayoffSpec& payoff, const MethodSpec& method,
                    const EngineSettings& settings);

/// All methods x all payoffs in one pass; method-major order.
std::vector<PriceEstimate> price_all(const ModelSpec& model, const std::vector<PayoffSpec>& payoffs,
                                     const std::vector<MethodSpec>& methods, const EngineSettings& settings);

struct ConvergenceReport {
    std::vector<double> eps;
    std::vector<double> errors;
    double slope = 0.0;
    double residual = 0.0;
    bool exact = false;  // every error at rounding level; slope undefined
};

/// Least-squares slope of log(error) against log(eps).
ConvergenceReport fit_convergence(std::vector<double> eps, std::vector<double> errors);

/// Mean over paths of sum_i |X^{(i, eps)}_T - (c_i + eps Y^i_T)| for each eps.
ConvergenceReport strong_convergence(const ModelSpec& model, double horizon, const std::vector<double>& eps_list,
                                     const EngineSettings& settings);

/// |E f(F_eps) - W^1(eps)| by quadrature for the Gaussian demo.
ConvergenceReport weak_convergence(const ChaosFunctional& functional, const ScalarPayoff& f,
                                   const std::vector<double>& eps_list);

/// |benchmark(eps) - frozen - eps E[f zeta]| on common paths (deterministic volatility).
ConvergenceReport weak_convergence(const ModelSpec& model, const PayoffSpec& payoff,
                                   const std::vector<double>& eps_list, const EngineSettings& settings);

struct PerfReport {
    int rates = 0;
    std::size_t paths = 0;
    double benchmark_seconds_per_path = 0.0;
    double proxy_seconds_per_path = 0.0;
    double speedup = 0.0;
};

/// Simulation time per path of the benchmark and of the order-1 strong proxy
/// for a caplet on the first rate. Paths are generated once up front so only
/// the schemes are timed.
PerfReport perf_compare(const ModelSpec& model, std::size_t paths, const EngineSettings& settings);

/// Speedup the order-1 proxy must reach over the benchmark at N = 20.
inline constexpr double kProxySpeedupThreshold = 1.5;

}  // namespace lmmtaylor
