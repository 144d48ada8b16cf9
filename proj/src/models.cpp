#include "lmmtaylor/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmmtaylor/error.hpp"

namespace lmmtaylor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kPanelsPerStep = 4;

double drift_factor(double alpha, double x) { return alpha * x / (1.0 + alpha * x); }

void record(Trajectory* out, std::size_t k, std::span<const double> lnx, int first) {
    if (!out) return;
    if (out->size() <= k) out->resize(k + 1);
    auto& row = (*out)[k];
    row.assign(lnx.size(), kNaN);
    for (std::size_t i = static_cast<std::size_t>(first); i < lnx.size(); ++i) row[i] = std::exp(lnx[i]);
}

void check_bundle(const ModelGrid& model, const PathBundle& bundle) {
    if (bundle.grid != model.grid()) throw std::invalid_argument("path bundle grid does not match the model grid");
    if (bundle.drivers < model.spec().total_drivers())
        throw std::invalid_argument("path bundle has too few drivers for the model");
}

RateState to_state(const ModelGrid& model, std::span<const double> lnx) {
    RateState s;
    s.horizon = model.grid().t_end;
    s.rates.assign(lnx.size(), kNaN);
    for (std::size_t i = static_cast<std::size_t>(model.first_alive()); i < lnx.size(); ++i)
        s.rates[i] = std::exp(lnx[i]);
    return s;
}

// Variance path used by the diffusion: CIR for stochastic vol, 1 otherwise.
std::vector<double> variance_path(const ModelGrid& model, const PathBundle& bundle) {
    const ModelSpec& spec = model.spec();
    if (!spec.cir) return {};
    return simulate_cir(*spec.cir, spec.eps2, bundle, spec.variance_driver());
}

// Log-Euler for the rates with drift fed by `feed`; `feed` is evolved as the
// eps-scaled X-process when `x_eps` is set, otherwise it is the rates themselves.
void run_log_euler(const ModelGrid& model, const PathBundle& bundle, std::vector<double>& ln_rates,
                   std::vector<double>* ln_feed, double x_eps, Trajectory* trajectory,
                   bool trajectory_of_feed) {
    const ModelSpec& spec = model.spec();
    const int n = spec.num_rates();
    const int first = model.first_alive();
    const double alpha = spec.tenor.accrual;
    const double dt = model.grid().dt();
    const std::vector<double> var = variance_path(model, bundle);

    std::vector<double> g(static_cast<std::size_t>(n), 0.0);
    std::vector<int> drv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) drv[static_cast<std::size_t>(i)] = spec.driver_of(i);

    auto feed_values = [&](std::vector<double>& out, const std::vector<double>& lnv) {
        for (int j = first; j < n; ++j) out[static_cast<std::size_t>(j)] = drift_factor(alpha, std::exp(lnv[static_cast<std::size_t>(j)]));
    };

    if (trajectory) record(trajectory, 0, trajectory_of_feed ? *ln_feed : ln_rates, first);
    for (std::size_t k = 0; k < model.grid().steps; ++k) {
        const double v = var.empty() ? 1.0 : var[k];
        const double sv = std::sqrt(v);
        feed_values(g, ln_feed ? *ln_feed : ln_rates);
        for (int i = first; i < n; ++i) {
            const double si = model.sigma(k, i);
            double mu = 0.0;
            for (int j = i + 1; j < n; ++j) mu += g[static_cast<std::size_t>(j)] * model.sigma(k, j) * model.rate_corr(i, j);
            const double dw = bundle.increment(k, static_cast<std::size_t>(drv[static_cast<std::size_t>(i)]));
            ln_rates[static_cast<std::size_t>(i)] += (-si * mu * v - 0.5 * si * si * v) * dt + si * sv * dw;
            if (ln_feed) {
                const double es = x_eps * si;
                (*ln_feed)[static_cast<std::size_t>(i)] += (-es * mu * v - 0.5 * es * es * v) * dt + es * sv * dw;
            }
        }
        if (trajectory) record(trajectory, k + 1, trajectory_of_feed ? *ln_feed : ln_rates, first);
    }
}

std::vector<double> log_initial(const ModelSpec& spec) {
    std::vector<double> out(spec.initial_rates.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(spec.initial_rates[i]);
    return out;
}

}  // namespace

double CirSpec::base_variance(double t) const {
    return std::exp(-kappa * t) * (v0 - theta) + theta;
}

double CirSpec::base_variance_integral(double t) const {
    return theta * t - (v0 - theta) * (std::exp(-kappa * t) - 1.0) / kappa;
}

int ModelSpec::driver_of(int rate) const {
    if (rate_driver.empty()) return rate;
    return rate_driver[static_cast<std::size_t>(rate)];
}

std::size_t ModelSpec::rate_drivers() const {
    if (rate_driver.empty()) return static_cast<std::size_t>(tenor.num_rates);
    return static_cast<std::size_t>(*std::max_element(rate_driver.begin(), rate_driver.end()) + 1);
}

void ModelSpec::validate() const {
    tenor.validate();
    if (static_cast<int>(initial_rates.size()) != tenor.num_rates)
        throw ConfigError("model.initial_rates", "expected one value per rate");
    for (double c : initial_rates)
        if (!(c > 0.0)) throw ConfigError("model.initial_rates", "rates must be positive");
    if (const auto* c = std::get_if<ConstantVol>(&vol)) {
        if (static_cast<int>(c->sigma.size()) != tenor.num_rates)
            throw ConfigError("model.volatility.sigma", "expected one value per rate");
        for (double s : c->sigma)
            if (!(s >= 0.0)) throw ConfigError("model.volatility.sigma", "must be non-negative");
    }
    if (!rate_driver.empty()) {
        if (static_cast<int>(rate_driver.size()) != tenor.num_rates)
            throw ConfigError("model.drivers", "expected one driver per rate");
        std::vector<bool> used(rate_driver.size(), false);
        for (int d : rate_driver) {
            if (d < 0 || d >= tenor.num_rates) throw ConfigError("model.drivers", "driver index out of range");
            used[static_cast<std::size_t>(d)] = true;
        }
        for (std::size_t d = 0; d < rate_drivers(); ++d)
            if (!used[d]) throw ConfigError("model.drivers", "driver indices must be contiguous from 1");
    }
    // Negative values are allowed here so finite differences can evaluate eps = -h;
    // the configuration layer rejects them for user input.
    if (!std::isfinite(eps1)) throw ConfigError("model.eps1", "must be finite");
    if (!std::isfinite(eps2)) throw ConfigError("model.eps2", "must be finite");
    if (cir) {
        if (!(cir->kappa > 0.0)) throw ConfigError("model.cir.kappa", "must be positive");
        if (!(cir->theta > 0.0)) throw ConfigError("model.cir.theta", "must be positive");
        if (!(cir->v0 > 0.0)) throw ConfigError("model.cir.v0", "must be positive");
    } else if (eps2 != 0.0) {
        throw ConfigError("model.eps2", "requires a cir section");
    }
    if (spot_rate && !(*spot_rate > 0.0)) throw ConfigError("model.spot_rate", "must be positive");
    if (discount.kind == DiscountConvention::Kind::Fixed && !(discount.terminal_bond > 0.0))
        throw ConfigError("model.discount.terminal_bond", "must be positive");
    if (discount.kind == DiscountConvention::Kind::ForwardProduct && !spot_rate)
        throw ConfigError("model.spot_rate", "required by forward_product discounting");
}

std::vector<std::string> ModelSpec::warnings() const {
    std::vector<std::string> out;
    if (cir && !cir->feller_holds(eps2))
        out.push_back("Feller condition 2 kappa theta >= eps2^2 fails; variance can reach zero");
    return out;
}

ModelGrid::ModelGrid(const ModelSpec& spec, const TimeGrid& grid)
    : spec_(spec), grid_(grid), n_(static_cast<std::size_t>(spec.num_rates())) {
    spec_.validate();
    const int n = spec_.num_rates();
    first_alive_ = n;
    for (int k = 0; k < n; ++k)
        if (spec_.tenor.fixing(k) >= grid_.t_end - 1e-12) {
            first_alive_ = k;
            break;
        }
    if (first_alive_ == n) throw std::domain_error("horizon lies beyond every rate's fixing date");

    correlation_ = resolve_correlation(spec_.corr, spec_.total_drivers());
    rate_corr_.assign(n_ * n_, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            rate_corr_[static_cast<std::size_t>(i) * n_ + j] =
                correlation_(static_cast<std::size_t>(spec_.driver_of(i)), static_cast<std::size_t>(spec_.driver_of(j)));

    const double alpha = spec_.tenor.accrual;
    std::vector<double> f(n_);
    for (std::size_t j = 0; j < n_; ++j) f[j] = drift_factor(alpha, spec_.initial_rates[j]);

    const std::size_t steps = grid_.steps;
    sigma_.assign(steps * n_, 0.0);
    variance_.assign(steps * n_, 0.0);
    frozen_drift_.assign(steps * n_, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t0 = grid_.node(k), t1 = grid_.node(k + 1);
        for (int i = first_alive_; i < n; ++i) {
            sigma_[k * n_ + i] = eval_vol(spec_.vol, spec_.tenor, i, t0);
            variance_[k * n_ + i] = vol_product_integral(spec_.vol, spec_.tenor, i, i, t0, t1, kPanelsPerStep);
            double drift = 0.0;
            for (int j = i + 1; j < n; ++j)
                drift += f[static_cast<std::size_t>(j)] * rate_corr(i, j) *
                         vol_product_integral(spec_.vol, spec_.tenor, i, j, t0, t1, kPanelsPerStep);
            frozen_drift_[k * n_ + i] = drift;
        }
    }
    if (spec_.cir) {
        base_vol_.resize(steps);
        for (std::size_t k = 0; k < steps; ++k) {
            const double w = spec_.cir->base_variance_integral(grid_.node(k + 1)) -
                             spec_.cir->base_variance_integral(grid_.node(k));
            base_vol_[k] = std::sqrt(w / grid_.dt());
        }
        base_integral_ = spec_.cir->base_variance_integral(grid_.t_end);
    }
}

double ModelGrid::variance_corr(int i) const {
    if (!spec_.cir) return 0.0;
    return correlation_(static_cast<std::size_t>(spec_.driver_of(i)), spec_.variance_driver());
}

RateState simulate_benchmark(const ModelGrid& model, const PathBundle& bundle, Trajectory* trajectory) {
    check_bundle(model, bundle);
    const ModelSpec& spec = model.spec();
    std::vector<double> ln = log_initial(spec);
    if (spec.eps1 == 1.0) {
        run_log_euler(model, bundle, ln, nullptr, 1.0, trajectory, false);
    } else {
        std::vector<double> lx = ln;
        run_log_euler(model, bundle, ln, &lx, spec.eps1, trajectory, false);
    }
    return to_state(model, ln);
}

RateState simulate_x_process(const ModelGrid& model, const PathBundle& bundle, Trajectory* trajectory) {
    check_bundle(model, bundle);
    const ModelSpec& spec = model.spec();
    std::vector<double> ln = log_initial(spec);
    std::vector<double> lx = ln;
    run_log_euler(model, bundle, ln, &lx, spec.eps1, trajectory, true);
    return to_state(model, lx);
}

RateState frozen_closed_form(const ModelGrid& model, const PathBundle& bundle) {
    check_bundle(model, bundle);
    const ModelSpec& spec = model.spec();
    if (spec.stochastic_vol()) return sv_base_model(model, bundle);
    const int n = spec.num_rates();
    std::vector<double> ln = log_initial(spec);
    const double dt = model.grid().dt();
    for (int i = model.first_alive(); i < n; ++i) {
        const auto d = static_cast<std::size_t>(spec.driver_of(i));
        double noise = 0.0, drift = 0.0;
        for (std::size_t k = 0; k < model.grid().steps; ++k) {
            // RMS vol over the step keeps the log-variance exact for time-dependent vols.
            const double var = model.variance(k, i);
            noise += std::sqrt(var / dt) * bundle.increment(k, d);
            drift += model.frozen_drift(k, i) + 0.5 * var;
        }
        ln[static_cast<std::size_t>(i)] += noise - drift;
    }
    return to_state(model, ln);
}

RateState simulate_strong_proxy(const ModelGrid& model, const PathBundle& bundle, int order,
                                std::span<const int> targets, Trajectory* trajectory) {
    check_bundle(model, bundle);
    if (order != 0 && order != 1) throw std::invalid_argument("strong proxy order must be 0 or 1");
    const ModelSpec& spec = model.spec();
    if (spec.stochastic_vol()) throw std::invalid_argument("strong proxy is defined for deterministic volatility only");
    const int n = spec.num_rates();
    const int first = model.first_alive();
    const double alpha = spec.tenor.accrual;
    const double dt = model.grid().dt();
    const double eps = spec.eps1;

    std::vector<char> active(static_cast<std::size_t>(n), targets.empty() ? 1 : 0);
    int lowest = n;
    for (int t : targets) {
        if (t < first || t >= n) throw std::out_of_range("strong proxy target is not a live rate");
        active[static_cast<std::size_t>(t)] = 1;
    }
    for (int i = first; i < n; ++i)
        if (active[static_cast<std::size_t>(i)]) {
            lowest = i;
            break;
        }

    std::vector<double> ln = log_initial(spec);
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    std::vector<double> g(static_cast<std::size_t>(n));
    std::vector<int> drv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        drv[static_cast<std::size_t>(i)] = spec.driver_of(i);
        g[static_cast<std::size_t>(i)] = drift_factor(alpha, spec.initial_rates[static_cast<std::size_t>(i)]);
    }

    auto snapshot = [&](std::size_t k) {
        if (!trajectory) return;
        std::vector<double> masked(ln.size());
        for (int i = 0; i < n; ++i)
            masked[static_cast<std::size_t>(i)] = active[static_cast<std::size_t>(i)] ? ln[static_cast<std::size_t>(i)] : kNaN;
        record(trajectory, k, masked, first);
    };
    snapshot(0);
    for (std::size_t k = 0; k < model.grid().steps; ++k) {
        if (order == 1)
            for (int j = lowest + 1; j < n; ++j) {
                const double x = std::max(spec.initial_rates[static_cast<std::size_t>(j)] + eps * y[static_cast<std::size_t>(j)], 0.0);
                g[static_cast<std::size_t>(j)] = drift_factor(alpha, x);
            }
        for (int i = lowest; i < n; ++i) {
            if (!active[static_cast<std::size_t>(i)]) continue;
            const double si = model.sigma(k, i);
            double mu = 0.0;
            for (int j = i + 1; j < n; ++j) mu += g[static_cast<std::size_t>(j)] * model.sigma(k, j) * model.rate_corr(i, j);
            const double dw = bundle.increment(k, static_cast<std::size_t>(drv[static_cast<std::size_t>(i)]));
            ln[static_cast<std::size_t>(i)] += (-si * mu - 0.5 * si * si) * dt + si * dw;
        }
        if (order == 1)
            for (int j = lowest + 1; j < n; ++j) {
                const double c = spec.initial_rates[static_cast<std::size_t>(j)];
                y[static_cast<std::size_t>(j)] += c * (-model.frozen_drift(k, j) +
                    model.sigma(k, j) * bundle.increment(k, static_cast<std::size_t>(drv[static_cast<std::size_t>(j)])));
            }
        snapshot(k + 1);
    }
    RateState s = to_state(model, ln);
    for (int i = 0; i < n; ++i)
        if (!active[static_cast<std::size_t>(i)]) s.rates[static_cast<std::size_t>(i)] = kNaN;
    return s;
}

std::vector<double> simulate_cir(const CirSpec& cir, double eps2, const PathBundle& bundle, std::size_t driver) {
    if (driver >= bundle.drivers) throw std::out_of_range("variance driver index out of range");
    const std::size_t steps = bundle.grid.steps;
    const double dt = bundle.grid.dt();
    std::vector<double> out(steps + 1);
    double v = cir.v0;
    out[0] = std::max(v, 0.0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double vp = std::max(v, 0.0);
        v += cir.kappa * (cir.theta - vp) * dt + eps2 * std::sqrt(vp) * bundle.increment(k, driver);
        out[k + 1] = std::max(v, 0.0);
    }
    return out;
}

RateState sv_base_model(const ModelGrid& model, const PathBundle& bundle) {
    check_bundle(model, bundle);
    const ModelSpec& spec = model.spec();
    if (!spec.cir) throw std::invalid_argument("the base stochastic-volatility model needs a cir section");
    if (!std::holds_alternative<ConstantVol>(spec.vol) && !std::holds_alternative<ZeroVol>(spec.vol))
        throw std::invalid_argument("the base stochastic-volatility model needs constant volatilities");
    const int n = spec.num_rates();
    const double alpha = spec.tenor.accrual;
    const double c = model.base_variance_integral();
    std::vector<double> ln = log_initial(spec);
    for (int i = model.first_alive(); i < n; ++i) {
        const double si = model.sigma(0, i);
        const auto d = static_cast<std::size_t>(spec.driver_of(i));
        double x = 0.0;
        for (std::size_t k = 0; k < model.grid().steps; ++k) x += model.base_vol(k) * bundle.increment(k, d);
        double a = 0.0;
        for (int j = i + 1; j < n; ++j)
            a += drift_factor(alpha, spec.initial_rates[static_cast<std::size_t>(j)]) * model.sigma(0, j) * model.rate_corr(i, j);
        ln[static_cast<std::size_t>(i)] += si * x - (a + 0.5 * si) * si * c;
    }
    return to_state(model, ln);
}

}  // namespace lmmtaylor
