#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lmmtaylor/models.hpp"

namespace lmmtaylor {

/// alpha (L^rate(T) - K)_+, no discounting.
struct Caplet {
    int rate = 0;
    double strike = 0.0;
    bool operator==(const Caplet&) const = default;
};

/// Payer swaption entered at the fixing of `entry`, paying on rates
/// entry..last under the terminal measure of `last + 1`.
struct PayerSwaption {
    int entry = 0;
    int last = 0;
    double strike = 0.0;
    bool operator==(const PayerSwaption&) const = default;
};

using PayoffSpec = std::variant<Caplet, PayerSwaption>;

double caplet_payoff(const RateState& state, const Caplet& spec, double alpha);

/// (-sum_{k=i}^{n} a_k prod_{j=k}^{n} (1 + alpha L^j) - (1 + K alpha))_+ with
/// a_i = -1 and a_k = K alpha otherwise.
double swaption_payoff(const RateState& state, const PayerSwaption& spec, double alpha);

/// Two-rate swaption written out: (aL1 + aL2 + a^2 L1 L2 - K a^2 L2 - 2 K a)_+.
double swaption_payoff_expanded(double l1, double l2, double strike, double alpha);

double payoff_value(const RateState& state, const PayoffSpec& spec, double alpha);

double strike_of(const PayoffSpec& spec);
PayoffSpec with_strike(PayoffSpec spec, double strike);

/// Rates the payoff reads, in increasing order.
std::vector<int> payoff_rates(const PayoffSpec& spec);
/// Date at which the payoff is evaluated.
double payoff_horizon(const PayoffSpec& spec, const TenorStructure& tenor);

void validate_payoff(const PayoffSpec& spec, const TenorStructure& tenor);

/// Factor turning a raw expectation into reported basis points:
/// 10^4 / units scale, times the terminal bond for swaptions.
double bps_factor(const PayoffSpec& spec, const ModelSpec& model);

}  // namespace lmmtaylor
