#include "lmmtaylor/payoffs.hpp"

#include <algorithm>
#include <cmath>

#include "lmmtaylor/error.hpp"

namespace lmmtaylor {

double caplet_payoff(const RateState& state, const Caplet& spec, double alpha) {
    return alpha * std::max(state.rates[static_cast<std::size_t>(spec.rate)] - spec.strike, 0.0);
}

double swaption_payoff(const RateState& state, const PayerSwaption& spec, double alpha) {
    const double ka = spec.strike * alpha;
    double product = 1.0;
    double sum = 0.0;
    for (int k = spec.last; k >= spec.entry; --k) {
        product *= 1.0 + alpha * state.rates[static_cast<std::size_t>(k)];
        sum += (k == spec.entry ? -1.0 : ka) * product;
    }
    return std::max(-sum - (1.0 + ka), 0.0);
}

double swaption_payoff_expanded(double l1, double l2, double strike, double alpha) {
    const double a2 = alpha * alpha;
    return std::max(alpha * l1 + alpha * l2 + a2 * l1 * l2 - strike * a2 * l2 - 2.0 * strike * alpha, 0.0);
}

double payoff_value(const RateState& state, const PayoffSpec& spec, double alpha) {
    if (const auto* c = std::get_if<Caplet>(&spec)) return caplet_payoff(state, *c, alpha);
    return swaption_payoff(state, std::get<PayerSwaption>(spec), alpha);
}

double strike_of(const PayoffSpec& spec) {
    return std::visit([](const auto& p) { return p.strike; }, spec);
}

PayoffSpec with_strike(PayoffSpec spec, double strike) {
    std::visit([strike](auto& p) { p.strike = strike; }, spec);
    return spec;
}

std::vector<int> payoff_rates(const PayoffSpec& spec) {
    if (const auto* c = std::get_if<Caplet>(&spec)) return {c->rate};
    const auto& s = std::get<PayerSwaption>(spec);
    std::vector<int> out;
    for (int k = s.entry; k <= s.last; ++k) out.push_back(k);
    return out;
}

double payoff_horizon(const PayoffSpec& spec, const TenorStructure& tenor) {
    if (const auto* c = std::get_if<Caplet>(&spec)) return tenor.fixing(c->rate);
    return tenor.fixing(std::get<PayerSwaption>(spec).entry);
}

void validate_payoff(const PayoffSpec& spec, const TenorStructure& tenor) {
    if (!(strike_of(spec) >= 0.0)) throw ConfigError("payoff.strike", "must be non-negative");
    if (const auto* c = std::get_if<Caplet>(&spec)) {
        if (c->rate < 0 || c->rate >= tenor.num_rates) throw ConfigError("payoff.rate", "rate index out of range");
        return;
    }
    const auto& s = std::get<PayerSwaption>(spec);
    if (s.last < 0 || s.last >= tenor.num_rates) throw ConfigError("payoff.last_rate", "rate index out of range");
    if (s.entry < 0 || s.entry > s.last)
        throw ConfigError("payoff.entry", "entry index must not exceed the last rate");
}

double bps_factor(const PayoffSpec& spec, const ModelSpec& model) {
    double factor = 1e4 / rate_scale(model.units);
    if (std::holds_alternative<PayerSwaption>(spec))
        factor *= terminal_bond(model.discount, model.tenor, model.spot_rate, model.initial_rates);
    return factor;
}

}  // namespace lmmtaylor
