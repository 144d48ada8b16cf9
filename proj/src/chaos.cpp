#include "lmmtaylor/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "lmmtaylor/error.hpp"

namespace lmmtaylor {

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double Polynomial::operator()(double x) const {
    double s = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * x + *it;
    return s;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() < 2) return {};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
    for (std::size_t k = 0; k < o.c_.size(); ++k) r[k] += o.c_[k];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (c_.empty() || o.c_.empty()) return {};
    std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double s) const {
    std::vector<double> r = c_;
    for (double& x : r) x *= s;
    return Polynomial(std::move(r));
}

Polynomial Polynomial::times_x() const {
    if (c_.empty()) return {};
    std::vector<double> r(c_.size() + 1, 0.0);
    std::copy(c_.begin(), c_.end(), r.begin() + 1);
    return Polynomial(std::move(r));
}

ChaosFunctional ChaosFunctional::constant_kernel(double horizon, std::size_t steps, double h, Polynomial f1,
                                                 Polynomial f2) {
    ChaosFunctional out;
    out.grid = TimeGrid(horizon, steps);
    out.kernel.assign(steps, h);
    out.f1 = std::move(f1);
    out.f2 = std::move(f2);
    return out;
}

double ChaosFunctional::variance() const {
    double s = 0.0;
    for (double h : kernel) s += h * h;
    return s * grid.dt();
}

double ChaosFunctional::sample(const PathBundle& bundle) const {
    double x = 0.0;
    for (std::size_t k = 0; k < grid.steps; ++k) x += kernel[k] * bundle.increment(k, 0);
    return x;
}

void ChaosFunctional::validate() const {
    if (kernel.size() != grid.steps) throw ConfigError("model.kernel", "kernel must be sampled once per step");
    if (!(variance() > 0.0)) throw ConfigError("model.kernel", "degenerate kernel: int h^2 ds = 0");
}

namespace {

// delta(h q(F^0)) = F^0 q - s^2 q'
Polynomial skorohod_h(const Polynomial& q, double s2) { return q.times_x() - q.derivative() * s2; }

// delta(a q(F^0)) with a = h / s^2
Polynomial skorohod_a(const Polynomial& q, double s2) { return skorohod_h(q, s2) * (1.0 / s2); }

}  // namespace

Polynomial weight_recursion(int order, const ChaosFunctional& functional, SecondOrderForm form) {
    if (order < 0) throw std::invalid_argument("weight order must be non-negative");
    if (order >= 3) throw std::invalid_argument("weights of order 3 and above are not supported");
    functional.validate();
    if (order == 0) return Polynomial({1.0});
    const double s2 = functional.variance();
    const Polynomial& p1 = functional.f1;
    const Polynomial pi1 = skorohod_a(p1, s2);
    if (order == 1) return pi1;
    Polynomial pi2 = skorohod_a(pi1 * p1, s2) + skorohod_a(functional.f2, s2);
    // The eps-derivative of pi_1 also moves D F_eps and gamma(F_eps); together
    // these contribute -delta(h p1 p1') / s^2.
    if (form == SecondOrderForm::Full) pi2 = pi2 - skorohod_a(p1 * p1.derivative(), s2);
    return pi2;
}

double pi1_pathwise(const ChaosFunctional& functional, const PathBundle& bundle) {
    functional.validate();
    const double s2 = functional.variance();
    const double dt = functional.grid.dt();
    double x = 0.0, int_a_dw = 0.0, int_ha = 0.0;
    for (std::size_t k = 0; k < functional.grid.steps; ++k) {
        const double h = functional.kernel[k], a = h / s2;
        x += h * bundle.increment(k, 0);
        int_a_dw += a * bundle.increment(k, 0);
        int_ha += h * a * dt;
    }
    // D_s F^1 = p1'(F^0) h(s)
    return functional.f1(x) * int_a_dw - functional.f1.derivative()(x) * int_ha;
}

double ScalarPayoff::operator()(double x) const {
    switch (kind) {
        case Kind::Digital: return x > level ? 1.0 : 0.0;
        case Kind::Call: return std::max(x - level, 0.0);
        case Kind::Identity: return x;
        case Kind::Cosine: return std::cos(level * x);
        case Kind::Constant: return level;
    }
    return 0.0;
}

std::vector<double> ScalarPayoff::breakpoints() const {
    if (kind == Kind::Digital || kind == Kind::Call) return {level};
    return {};
}

double gaussian_expectation(const std::function<double(double)>& g, double variance,
                            const std::vector<double>& breakpoints) {
    if (!(variance > 0.0)) throw std::invalid_argument("variance must be positive");
    const double sd = std::sqrt(variance);
    const double lo = -12.0 * sd, hi = 12.0 * sd;
    std::vector<double> cuts{lo, hi};
    constexpr int kPanels = 24;
    for (int k = 1; k < kPanels; ++k) cuts.push_back(lo + (hi - lo) * k / kPanels);
    for (double b : breakpoints)
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
    auto integrand = [&](double x) { return g(x) * norm * std::exp(-0.5 * x * x / variance); };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[k], cuts[k + 1], 10, 1e-14);
    return total;
}

double gaussian_weak_price(const ChaosFunctional& functional, const ScalarPayoff& f, double eps, int order,
                           SecondOrderForm form) {
    if (order < 0 || order > 2) throw std::invalid_argument("weak price order must be 0, 1 or 2");
    functional.validate();
    const double s2 = functional.variance();
    const auto bp = f.breakpoints();
    double price = gaussian_expectation([&](double x) { return f(x); }, s2, bp);
    if (order >= 1) {
        const Polynomial w1 = weight_recursion(1, functional, form);
        price += eps * gaussian_expectation([&](double x) { return f(x) * w1(x); }, s2, bp);
    }
    if (order >= 2) {
        const Polynomial w2 = weight_recursion(2, functional, form);
        const double coeff = form == SecondOrderForm::Full ? eps * eps / 2.0 : eps * eps;
        price += coeff * gaussian_expectation([&](double x) { return f(x) * w2(x); }, s2, bp);
    }
    return price;
}

double gaussian_exact_price(const ChaosFunctional& functional, const ScalarPayoff& f, double eps) {
    functional.validate();
    const Polynomial path = Polynomial({0.0, 1.0}) + functional.f1 * eps + functional.f2 * (eps * eps / 2.0);
    const double s2 = functional.variance();
    // f(path(x)) jumps or kinks where path(x) crosses a payoff breakpoint; split there.
    std::vector<double> cuts;
    const double sd = std::sqrt(s2);
    constexpr int kScan = 2400;
    for (double b : f.breakpoints()) {
        auto g = [&](double x) { return path(x) - b; };
        double x0 = -12.0 * sd, g0 = g(x0);
        for (int k = 1; k <= kScan; ++k) {
            const double x1 = -12.0 * sd + 24.0 * sd * k / kScan, g1 = g(x1);
            if (g1 == 0.0) {
                cuts.push_back(x1);
            } else if (g0 * g1 < 0.0) {
                std::uintmax_t iters = 200;
                const auto r = boost::math::tools::toms748_solve(g, x0, x1, g0, g1,
                                                                 boost::math::tools::eps_tolerance<double>(), iters);
                cuts.push_back(0.5 * (r.first + r.second));
            }
            x0 = x1;
            g0 = g1;
        }
    }
    return gaussian_expectation([&](double x) { return f(path(x)); }, s2, cuts);
}

McEstimate gaussian_weighted_mc(const ChaosFunctional& functional, const std::function<double(double)>& f,
                                const Polynomial& weight, std::size_t paths, std::uint64_t seed) {
    functional.validate();
    if (paths < 2) throw std::invalid_argument("need at least two paths");
    const std::size_t pairs = paths / 2;
    PathGenerator gen(functional.grid, Matrix::identity(1), SeedPolicy{seed});
    PathBundle bundle;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        gen.generate(p, bundle);
        const double x = functional.sample(bundle);
        const double v = 0.5 * (f(x) * weight(x) + f(-x) * weight(-x));
        sum += v;
        sumsq += v * v;
    }
    McEstimate out;
    out.samples = 2 * pairs;
    out.mean = sum / static_cast<double>(pairs);
    const double var = (sumsq - sum * out.mean) / static_cast<double>(pairs - 1);
    out.stderr_ = std::sqrt(std::max(var, 0.0) / static_cast<double>(pairs));
    return out;
}

}  // namespace lmmtaylor
