#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmmtaylor/drivers.hpp"
#include "lmmtaylor/models.hpp"

namespace lmmtaylor {

/// First-order strong correction Y^i on the grid, split into its
/// deterministic drift and its martingale part c_i int sigma_i dW^i.
struct StrongCorrection {
    TimeGrid grid;
    int rates = 0;
    std::vector<double> drift;       // (steps + 1) * rates, identical on every path
    std::vector<double> martingale;  // (steps + 1) * rates

    double value(std::size_t k, int rate) const {
        const std::size_t idx = k * static_cast<std::size_t>(rates) + static_cast<std::size_t>(rate);
        return drift[idx] + martingale[idx];
    }
};

StrongCorrection strong_correction(const ModelGrid& model, const PathBundle& bundle);

/// sum_{i=0}^{order} eps^i / i! * d_i, with derivatives[i - 1] the i-th derivative.
double strong_taylor(double value_at_0, std::span<const double> derivatives, double eps, int order);

/// Central difference (p(eps0 + h) - p(eps0 - h)) / (2h).
double finite_difference_check(const std::function<double(double)>& pricer, double eps0, double h);

/// Malliavin covariance of two log-normal rates driven by correlated Brownian
/// motions: gamma = scale * diag(s) R diag(s), s_i = sigma_i L_i.
struct CovMatrix2 {
    std::array<std::array<double, 2>, 2> gamma{};
    std::array<std::array<double, 2>, 2> inverse{};
    double det = 0.0;
};

/// Throws NumericError when rho12^2 >= 1 - 1e-12.
CovMatrix2 malliavin_cov_2d(double l1, double l2, double sigma1, double sigma2, double rho12, double scale);

/// Derived: weights obtained by carrying out the Skorohod integral for the
/// model as simulated (the default). Literal: the closed-form displays of the
/// two worked swaption examples, transcribed term by term.
enum class WeightForm { Derived, Literal };

/// Per-path Malliavin weights plus named building blocks for diagnostics.
struct WeightSample {
    double zeta = 0.0;
    double pi = 0.0;
    std::vector<std::pair<std::string, double>> components;
};

/// eps1-weight zeta for a frozen-drift, constant-volatility model and the
/// priced rates `priced` (distinct drivers, observed at the grid end).
class FrozenWeights {
public:
    FrozenWeights(const ModelGrid& model, std::vector<int> priced, WeightForm form = WeightForm::Derived);

    WeightSample operator()(const PathBundle& bundle, bool diagnostics = false) const;

private:
    const ModelGrid* model_;
    std::vector<int> priced_;
    WeightForm form_;
    double horizon_;
    std::vector<std::vector<double>> a_;  // q_m = sum_d a_[m][d] G_d + b_[m]
    std::vector<double> b_;
    std::vector<double> rinv_;  // inverse correlation of the priced drivers
    double trace_ = 0.0;
    // literal two-rate constants
    double beta2_ = 0.0, beta3_ = 0.0, rho_ = 0.0, shift_ = 0.0;
};

/// zeta (eps1) and pi (eps2) weights of the two-rate stochastic-volatility
/// swaption. The literal form also needs a bundle of two independent drivers.
class SvWeights {
public:
    SvWeights(const ModelGrid& model, WeightForm form = WeightForm::Derived);

    bool needs_independent_drivers() const { return form_ == WeightForm::Literal; }
    WeightSample operator()(const PathBundle& bundle, const PathBundle* independent,
                            bool diagnostics = false) const;

private:
    const ModelGrid* model_;
    WeightForm form_;
    double c_ = 0.0, kappa_ = 0.0, horizon_ = 0.0;
    double sigma1_ = 0.0, sigma2_ = 0.0, rho12_ = 0.0, rho1_ = 0.0, rho2_ = 0.0;
    double beta2_ = 0.0;   // alpha c2 sigma2^2 / (1 + alpha c2)^2, times c2 in the literal form
    double f2_ = 0.0;      // alpha c2 / (1 + alpha c2)
    double m_ = 0.0;       // discrete e^{-kappa T} G(T) - c
    double cov_x1y_ = 0.0, cov_x2y_ = 0.0;
    std::vector<double> root_v_;   // sqrt(v0) at nodes
    std::vector<double> x_weight_; // RMS sqrt(v0) per step, matches the base-model sampling
    std::vector<double> y_kernel_; // sqrt(v0) * int_t^T v0
    std::vector<double> f_, g_, b_kernel_, h_kernel_;
};

WeightSample frozen_swaption_weights(const ModelGrid& model, const PathBundle& bundle,
                                     WeightForm form = WeightForm::Derived);

WeightSample sv_swaption_weights(const ModelGrid& model, const PathBundle& bundle,
                                 const PathBundle* independent, WeightForm form = WeightForm::Derived);

}  // namespace lmmtaylor
