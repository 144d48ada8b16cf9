#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmmtaylor/drivers.hpp"
#include "lmmtaylor/market.hpp"

namespace lmmtaylor {

/// Units in which rates and strikes are written and simulated. The dynamics
/// are not scale invariant (alpha L / (1 + alpha L)), so this is a modelling
/// choice, not a display option.
enum class RateUnits { Decimal, Percent };

inline double rate_scale(RateUnits u) { return u == RateUnits::Percent ? 100.0 : 1.0; }

struct CirSpec {
    double kappa = 0.0;
    double theta = 0.0;
    double v0 = 0.0;

    /// 2 kappa theta >= eps2^2.
    bool feller_holds(double eps2) const { return 2.0 * kappa * theta >= eps2 * eps2; }
    /// Deterministic variance at eps2 = 0: e^{-kappa t}(v0 - theta) + theta.
    double base_variance(double t) const;
    /// int_0^t of base_variance.
    double base_variance_integral(double t) const;

    bool operator==(const CirSpec&) const = default;
};

struct ModelSpec {
    TenorStructure tenor;
    std::vector<double> initial_rates;  // c_1..c_N
    std::optional<double> spot_rate;    // c_0, only needed for forward_product discounting
    VolatilitySpec vol = ZeroVol{};
    CorrelationSpec corr = ExpDecayCorrelation{};
    std::vector<int> rate_driver;  // Brownian driver of each rate; empty means rate k -> driver k
    double eps1 = 1.0;
    double eps2 = 0.0;
    std::optional<CirSpec> cir;
    DiscountConvention discount;
    RateUnits units = RateUnits::Decimal;

    int num_rates() const { return tenor.num_rates; }
    int driver_of(int rate) const;
    /// Number of Brownian drivers of the rates.
    std::size_t rate_drivers() const;
    /// Rate drivers plus the variance driver B (last) when a CIR spec is present.
    std::size_t total_drivers() const { return rate_drivers() + (cir ? 1 : 0); }
    std::size_t variance_driver() const { return rate_drivers(); }
    bool stochastic_vol() const { return cir.has_value(); }

    /// Throws ConfigError on inconsistent parameters.
    void validate() const;
    /// Non-fatal diagnostics (Feller violation).
    std::vector<std::string> warnings() const;

    bool operator==(const ModelSpec&) const = default;
};

/// Terminal rate values. Rates that fixed before the horizon, or were not
/// requested from a proxy simulation, hold NaN.
struct RateState {
    double horizon = 0.0;
    std::vector<double> rates;
};

/// Rate values at every grid node, when requested.
using Trajectory = std::vector<std::vector<double>>;

/// Per-grid data shared by every path: vols at nodes, per-step vol integrals,
/// frozen-drift integrals and the driver correlations. Built once per run.
class ModelGrid {
public:
    ModelGrid(const ModelSpec& spec, const TimeGrid& grid);

    const ModelSpec& spec() const { return spec_; }
    const TimeGrid& grid() const { return grid_; }
    const Matrix& correlation() const { return correlation_; }
    int first_alive() const { return first_alive_; }

    double sigma(std::size_t k, int rate) const { return sigma_[k * n_ + rate]; }
    /// int sigma_i^2 over step k.
    double variance(std::size_t k, int rate) const { return variance_[k * n_ + rate]; }
    /// int sigma_i sum_{j>i} f_j sigma_j rho_ij over step k, f_j = alpha c_j / (1 + alpha c_j).
    double frozen_drift(std::size_t k, int rate) const { return frozen_drift_[k * n_ + rate]; }
    /// Correlation between the drivers of two rates.
    double rate_corr(int i, int j) const { return rate_corr_[static_cast<std::size_t>(i) * n_ + j]; }
    /// Correlation between a rate's driver and the variance driver.
    double variance_corr(int i) const;
    /// sqrt of the base variance averaged over step k; squares integrate v0 exactly.
    double base_vol(std::size_t k) const { return base_vol_[k]; }
    /// int_0^T of the base variance.
    double base_variance_integral() const { return base_integral_; }

private:
    ModelSpec spec_;
    TimeGrid grid_;
    Matrix correlation_;
    std::size_t n_;
    int first_alive_;
    std::vector<double> sigma_, variance_, frozen_drift_, rate_corr_, base_vol_;
    double base_integral_ = 0.0;
};

/// Log-Euler under the terminal measure. When eps1 != 1 the drift is fed by
/// the eps1-scaled X-process instead of the live rates.
RateState simulate_benchmark(const ModelGrid& model, const PathBundle& bundle,
                             Trajectory* trajectory = nullptr);

/// The eps1-scaled auxiliary process X^{(i, eps1)}; at eps1 = 0 it stays at c_i.
RateState simulate_x_process(const ModelGrid& model, const PathBundle& bundle,
                             Trajectory* trajectory = nullptr);

/// Exact log-normal sampling of the frozen-drift model.
RateState frozen_closed_form(const ModelGrid& model, const PathBundle& bundle);

/// Log-Euler with drift fed by (c_j + eps1 Y^j)_+ (order 1) or c_j (order 0).
/// Only `targets` are evolved (all live rates when empty); cost per step is
/// linear in N for a single target.
RateState simulate_strong_proxy(const ModelGrid& model, const PathBundle& bundle, int order,
                                std::span<const int> targets = {},
                                Trajectory* trajectory = nullptr);

/// Full-truncation Euler for dv = kappa(theta - v)dt + eps2 sqrt(v) dB.
/// Returns max(v, 0) at every node.
std::vector<double> simulate_cir(const CirSpec& cir, double eps2, const PathBundle& bundle,
                                 std::size_t driver);

/// Exact sampling of the (eps1, eps2) = (0, 0) stochastic-volatility model.
RateState sv_base_model(const ModelGrid& model, const PathBundle& bundle);

}  // namespace lmmtaylor
