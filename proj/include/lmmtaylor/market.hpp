#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace lmmtaylor {

/// Dense row-major square matrix. Small sizes only (drivers, rates).
struct Matrix {
    std::size_t n = 0;
    std::vector<double> data;

    Matrix() = default;
    explicit Matrix(std::size_t size, double fill = 0.0) : n(size), data(size * size, fill) {}

    static Matrix identity(std::size_t size);

    double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }

    bool operator==(const Matrix&) const = default;
};

Matrix multiply_transpose(const Matrix& lower);  // returns L * L^T

/// Tenor dates T_0 = 0 < T_1 < ... < T_{N+1}, with T_{k+1} - T_k = accrual for k >= 1.
/// Rates are indexed from 0: rate k fixes at T_{k+1} and pays at T_{k+2}.
struct TenorStructure {
    double first_fixing = 0.0;  // T_1
    double accrual = 0.0;       // alpha
    int num_rates = 0;          // N

    double fixing(int rate) const { return first_fixing + rate * accrual; }
    double payment(int rate) const { return fixing(rate) + accrual; }
    /// All dates T_0..T_{N+1}.
    std::vector<double> dates() const;
    void validate() const;

    bool operator==(const TenorStructure&) const = default;
};

struct ZeroVol {
    bool operator==(const ZeroVol&) const = default;
};

struct ConstantVol {
    std::vector<double> sigma;  // one per rate
    bool operator==(const ConstantVol&) const = default;
};

/// sigma_i(t) = (a (T_i - t) + d) exp(-b (T_i - t)) + e, shared by every rate.
struct AbcdVol {
    double a = 0.0, b = 0.0, d = 0.0, e = 0.0;
    bool operator==(const AbcdVol&) const = default;
};

using VolatilitySpec = std::variant<ZeroVol, ConstantVol, AbcdVol>;

double eval_vol(const VolatilitySpec& spec, const TenorStructure& tenor, int rate, double t);

/// Integral of sigma_i(s) sigma_j(s) over [t0, t1]. Closed form for constant
/// vols, composite Simpson with `panels` subintervals (rounded up to even) otherwise.
double vol_product_integral(const VolatilitySpec& spec, const TenorStructure& tenor,
                            int rate_i, int rate_j, double t0, double t1, int panels);

/// rho_ij = floor + (1 - floor) exp(-rate |i - j|)
struct ExpDecayCorrelation {
    double floor = 0.0, rate = 0.0;
    bool operator==(const ExpDecayCorrelation&) const = default;
};

struct ExplicitCorrelation {
    Matrix matrix;
    bool operator==(const ExplicitCorrelation&) const = default;
};

/// Two rate drivers W^1, W^2 and a variance driver B:
/// dW^1 dW^2 = rho12 dt, dW^i dB = rho_i dt.
struct SvCorrelation {
    double rho12 = 0.0, rho1 = 0.0, rho2 = 0.0;
    bool operator==(const SvCorrelation&) const = default;
};

using CorrelationSpec = std::variant<ExpDecayCorrelation, ExplicitCorrelation, SvCorrelation>;

/// Resolves to an n_drivers x n_drivers correlation matrix. SvCorrelation
/// requires n_drivers == 3 with ordering (W^1, W^2, B).
Matrix resolve_correlation(const CorrelationSpec& spec, std::size_t n_drivers);

/// Pivots at or below this are treated as zero (rank-deficient but accepted).
inline constexpr double kFactorTolerance = 1e-12;

/// Lower-triangular L with L L^T = rho. Semidefinite matrices are accepted;
/// an indefinite one throws NumericError naming the failing leading minor.
Matrix factorize(const Matrix& rho, double tol = kFactorTolerance);

/// P(0, T_{N+1}) used to scale swaption prices.
struct DiscountConvention {
    enum class Kind { Fixed, ForwardProduct };
    Kind kind = Kind::Fixed;
    double terminal_bond = 1.0;  // used by Fixed

    bool operator==(const DiscountConvention&) const = default;
};

/// Fixed returns terminal_bond. ForwardProduct returns
/// prod_{k=0..N} 1 / (1 + (T_{k+1} - T_k) c_k) with c_0 the spot rate, in the
/// same units as the rates.
double terminal_bond(const DiscountConvention& convention, const TenorStructure& tenor,
                     std::optional<double> spot_rate, std::span<const double> initial_rates);

}  // namespace lmmtaylor
