#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lmmtaylor/drivers.hpp"

namespace lmmtaylor {

/// Real polynomial, coefficient k multiplies x^k.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    const std::vector<double>& coefficients() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    double operator()(double x) const;
    Polynomial derivative() const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;
    /// x * p(x)
    Polynomial times_x() const;

    bool operator==(const Polynomial&) const = default;

private:
    void trim();
    std::vector<double> c_;
};

/// F_eps = F^0 + eps F^1 + eps^2 / 2 F^2 on a one-dimensional Gaussian space,
/// with F^0 = int h dW and F^1, F^2 polynomials in F^0.
struct ChaosFunctional {
    TimeGrid grid;
    std::vector<double> kernel;  // h at the left node of each step
    Polynomial f1, f2;

    /// Constant kernel h on [0, horizon].
    static ChaosFunctional constant_kernel(double horizon, std::size_t steps, double h, Polynomial f1,
                                           Polynomial f2 = {});

    /// s^2 = int h^2 ds, discretized like the Ito sum of F^0.
    double variance() const;
    double sample(const PathBundle& bundle) const;
    void validate() const;
};

/// Second-order weight: the complete recursion (default), or the shorter
/// expression delta(a pi_1 F^1) + delta(a F^2) paired with an eps^2 coefficient.
enum class SecondOrderForm { Full, Short };

/// Weight pi_n (n <= 2) as a polynomial in F^0. Orders >= 3 throw.
Polynomial weight_recursion(int order, const ChaosFunctional& functional,
                            SecondOrderForm form = SecondOrderForm::Full);

/// pi_1 evaluated from the path as F^1 int a dW - int (D_s F^1) a_s ds.
double pi1_pathwise(const ChaosFunctional& functional, const PathBundle& bundle);

/// Scalar test functions for the Gaussian demo.
struct ScalarPayoff {
    enum class Kind { Digital, Call, Identity, Cosine, Constant };
    Kind kind = Kind::Identity;
    double level = 0.0;  // threshold, strike, frequency, or constant value

    double operator()(double x) const;
    /// Points where the function is not smooth.
    std::vector<double> breakpoints() const;
    bool operator==(const ScalarPayoff&) const = default;
};

/// E[g(X)], X ~ N(0, variance), by adaptive Gauss-Kronrod on +-12 sd split at `breakpoints`.
double gaussian_expectation(const std::function<double(double)>& g, double variance,
                            const std::vector<double>& breakpoints = {});

/// E f(F^0) + eps E f pi_1 (+ eps^2/2 E f pi_2 for the full form, eps^2 E f pi_2 for the short one).
double gaussian_weak_price(const ChaosFunctional& functional, const ScalarPayoff& f, double eps, int order,
                           SecondOrderForm form = SecondOrderForm::Full);

/// E f(F_eps) by quadrature.
double gaussian_exact_price(const ChaosFunctional& functional, const ScalarPayoff& f, double eps);

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
};

/// Monte Carlo of E[f(F^0) g(F^0)] for a polynomial weight g, with antithetic pairs.
McEstimate gaussian_weighted_mc(const ChaosFunctional& functional, const std::function<double(double)>& f,
                                const Polynomial& weight, std::size_t paths, std::uint64_t seed);

}  // namespace lmmtaylor
