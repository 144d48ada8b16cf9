#include "lmmtaylor/market.hpp"

#include <cmath>
#include <string>

#include "lmmtaylor/error.hpp"

namespace lmmtaylor {

Matrix Matrix::identity(std::size_t size) {
    Matrix m(size);
    for (std::size_t i = 0; i < size; ++i) m(i, i) = 1.0;
    return m;
}

Matrix multiply_transpose(const Matrix& lower) {
    Matrix out(lower.n);
    for (std::size_t i = 0; i < lower.n; ++i)
        for (std::size_t j = 0; j < lower.n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < lower.n; ++k) s += lower(i, k) * lower(j, k);
            out(i, j) = s;
        }
    return out;
}

std::vector<double> TenorStructure::dates() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(num_rates) + 2);
    out.push_back(0.0);
    for (int k = 0; k <= num_rates; ++k) out.push_back(fixing(k));
    return out;
}

void TenorStructure::validate() const {
    if (num_rates < 1) throw ConfigError("model.tenor.rates", "need at least one rate");
    if (!(accrual > 0.0)) throw ConfigError("model.tenor.accrual", "must be positive");
    if (!(first_fixing > 0.0)) throw ConfigError("model.tenor.first_fixing", "must be positive");
}

namespace {

double abcd(const AbcdVol& v, double tau) {
    return (v.a * tau + v.d) * std::exp(-v.b * tau) + v.e;
}

void check_rate(const TenorStructure& tenor, int rate) {
    if (rate < 0 || rate >= tenor.num_rates)
        throw std::out_of_range("rate index " + std::to_string(rate) + " out of range");
}

}  // namespace

double eval_vol(const VolatilitySpec& spec, const TenorStructure& tenor, int rate, double t) {
    check_rate(tenor, rate);
    const double maturity = tenor.fixing(rate);
    if (t > maturity + 1e-12)
        throw std::domain_error("volatility of rate " + std::to_string(rate) +
                                " evaluated after its fixing date");
    if (std::holds_alternative<ZeroVol>(spec)) return 0.0;
    if (const auto* c = std::get_if<ConstantVol>(&spec)) {
        if (static_cast<int>(c->sigma.size()) != tenor.num_rates)
            throw ConfigError("model.volatility.sigma", "expected one value per rate");
        return c->sigma[static_cast<std::size_t>(rate)];
    }
    return abcd(std::get<AbcdVol>(spec), maturity - t);
}

double vol_product_integral(const VolatilitySpec& spec, const TenorStructure& tenor,
                            int rate_i, int rate_j, double t0, double t1, int panels) {
    if (std::holds_alternative<ZeroVol>(spec)) return 0.0;
    if (std::holds_alternative<ConstantVol>(spec))
        return eval_vol(spec, tenor, rate_i, t0) * eval_vol(spec, tenor, rate_j, t0) * (t1 - t0);
    int n = panels < 2 ? 2 : panels + (panels % 2);
    const double h = (t1 - t0) / n;
    auto f = [&](double t) {
        return eval_vol(spec, tenor, rate_i, t) * eval_vol(spec, tenor, rate_j, t);
    };
    double s = f(t0) + f(t1);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(t0 + k * h);
    return s * h / 3.0;
}

Matrix resolve_correlation(const CorrelationSpec& spec, std::size_t n_drivers) {
    if (n_drivers < 1) throw ConfigError("model.correlation", "need at least one driver");
    if (const auto* e = std::get_if<ExpDecayCorrelation>(&spec)) {
        Matrix m(n_drivers);
        for (std::size_t i = 0; i < n_drivers; ++i)
            for (std::size_t j = 0; j < n_drivers; ++j) {
                const double dist = std::fabs(static_cast<double>(i) - static_cast<double>(j));
                m(i, j) = i == j ? 1.0 : e->floor + (1.0 - e->floor) * std::exp(-e->rate * dist);
            }
        return m;
    }
    if (const auto* x = std::get_if<ExplicitCorrelation>(&spec)) {
        const Matrix& m = x->matrix;
        if (m.n != n_drivers)
            throw ConfigError("model.correlation.matrix",
                              "expected " + std::to_string(n_drivers) + "x" +
                                  std::to_string(n_drivers) + " matrix");
        for (std::size_t i = 0; i < m.n; ++i) {
            if (m(i, i) != 1.0) throw ConfigError("model.correlation.matrix", "diagonal must be 1");
            for (std::size_t j = 0; j < m.n; ++j) {
                if (m(i, j) != m(j, i))
                    throw ConfigError("model.correlation.matrix", "matrix must be symmetric");
                if (m(i, j) < -1.0 || m(i, j) > 1.0)
                    throw ConfigError("model.correlation.matrix", "entries must lie in [-1, 1]");
            }
        }
        return m;
    }
    const auto& sv = std::get<SvCorrelation>(spec);
    if (n_drivers != 3)
        throw ConfigError("model.correlation",
                          "stochastic volatility correlation needs exactly two rate drivers");
    for (double r : {sv.rho12, sv.rho1, sv.rho2})
        if (r < -1.0 || r > 1.0) throw ConfigError("model.correlation", "entries must lie in [-1, 1]");
    Matrix m = Matrix::identity(3);
    m(0, 1) = m(1, 0) = sv.rho12;
    m(0, 2) = m(2, 0) = sv.rho1;
    m(1, 2) = m(2, 1) = sv.rho2;
    return m;
}

Matrix factorize(const Matrix& rho, double tol) {
    const std::size_t n = rho.n;
    Matrix lower(n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = rho(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
        if (pivot < -tol)
            throw NumericError("correlation matrix is not positive semidefinite: leading minor of order " +
                               std::to_string(j + 1) + " is negative");
        const bool degenerate = pivot <= tol;
        lower(j, j) = degenerate ? 0.0 : std::sqrt(pivot);
        for (std::size_t i = j + 1; i < n; ++i) {
            double r = rho(i, j);
            for (std::size_t k = 0; k < j; ++k) r -= lower(i, k) * lower(j, k);
            if (degenerate) {
                // A zero pivot with a non-zero residual means a negative 2x2 minor.
                if (std::fabs(r) > std::sqrt(tol))
                    throw NumericError(
                        "correlation matrix is not positive semidefinite: leading minor of order " +
                        std::to_string(i + 1) + " is negative");
                lower(i, j) = 0.0;
            } else {
                lower(i, j) = r / lower(j, j);
            }
        }
    }
    return lower;
}

double terminal_bond(const DiscountConvention& convention, const TenorStructure& tenor,
                     std::optional<double> spot_rate, std::span<const double> initial_rates) {
    if (convention.kind == DiscountConvention::Kind::Fixed) {
        if (!(convention.terminal_bond > 0.0))
            throw ConfigError("model.discount.terminal_bond", "must be positive");
        return convention.terminal_bond;
    }
    if (!spot_rate) throw ConfigError("model.spot_rate", "required by forward_product discounting");
    double bond = 1.0 / (1.0 + tenor.first_fixing * *spot_rate);
    for (double c : initial_rates) bond /= 1.0 + tenor.accrual * c;
    return bond;
}

}  // namespace lmmtaylor
