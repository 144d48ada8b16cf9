#include "lmmtaylor/taylor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lmmtaylor/error.hpp"

namespace lmmtaylor {

namespace {

constexpr double kSingularTolerance = 1e-12;

// Gauss-Jordan with partial pivoting; throws on a (numerically) singular matrix.
Matrix invert(const Matrix& m, const char* what) {
    const std::size_t n = m.n;
    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        if (std::fabs(a(piv, col)) < kSingularTolerance) throw NumericError(std::string("singular ") + what);
        if (piv != col)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        const double d = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

const std::vector<double>& constant_sigmas(const ModelSpec& spec, std::vector<double>& storage) {
    if (const auto* c = std::get_if<ConstantVol>(&spec.vol)) return c->sigma;
    if (std::holds_alternative<ZeroVol>(spec.vol)) {
        storage.assign(static_cast<std::size_t>(spec.num_rates()), 0.0);
        return storage;
    }
    throw std::invalid_argument("closed-form weights need constant volatilities");
}

double frozen_factor(double alpha, double c) { return alpha * c / (1.0 + alpha * c); }

}  // namespace

StrongCorrection strong_correction(const ModelGrid& model, const PathBundle& bundle) {
    if (bundle.grid != model.grid()) throw std::invalid_argument("path bundle grid does not match the model grid");
    const ModelSpec& spec = model.spec();
    const int n = spec.num_rates();
    const std::size_t steps = model.grid().steps;
    StrongCorrection out;
    out.grid = model.grid();
    out.rates = n;
    out.drift.assign((steps + 1) * static_cast<std::size_t>(n), 0.0);
    out.martingale.assign((steps + 1) * static_cast<std::size_t>(n), 0.0);
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t k = 0; k < steps; ++k)
        for (int i = model.first_alive(); i < n; ++i) {
            const double c = spec.initial_rates[static_cast<std::size_t>(i)];
            const auto idx = k * un + static_cast<std::size_t>(i);
            out.drift[idx + un] = out.drift[idx] - c * model.frozen_drift(k, i);
            out.martingale[idx + un] =
                out.martingale[idx] + c * model.sigma(k, i) * bundle.increment(k, static_cast<std::size_t>(spec.driver_of(i)));
        }
    return out;
}

double strong_taylor(double value_at_0, std::span<const double> derivatives, double eps, int order) {
    if (order < 0) throw std::invalid_argument("order must be non-negative");
    if (static_cast<std::size_t>(order) > derivatives.size())
        throw std::invalid_argument("order exceeds the available derivatives");
    double sum = value_at_0, term = 1.0;
    for (int i = 1; i <= order; ++i) {
        term *= eps / i;
        sum += term * derivatives[static_cast<std::size_t>(i - 1)];
    }
    return sum;
}

double finite_difference_check(const std::function<double(double)>& pricer, double eps0, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    return (pricer(eps0 + h) - pricer(eps0 - h)) / (2.0 * h);
}

CovMatrix2 malliavin_cov_2d(double l1, double l2, double sigma1, double sigma2, double rho12, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("covariance scale must be positive");
    if (rho12 * rho12 >= 1.0 - kSingularTolerance)
        throw NumericError("singular Malliavin covariance: |rho12| = 1");
    const double s1 = sigma1 * l1, s2 = sigma2 * l2;
    const double one_minus = 1.0 - rho12 * rho12;
    CovMatrix2 out;
    out.gamma = {{{scale * s1 * s1, scale * rho12 * s1 * s2}, {scale * rho12 * s1 * s2, scale * s2 * s2}}};
    out.det = scale * scale * s1 * s1 * s2 * s2 * one_minus;
    out.inverse = {{{1.0 / (one_minus * s1 * s1 * scale), -rho12 / (one_minus * s1 * s2 * scale)},
                    {-rho12 / (one_minus * s1 * s2 * scale), 1.0 / (one_minus * s2 * s2 * scale)}}};
    return out;
}

// ---------------------------------------------------------------------------
// Frozen-drift weights.
//
// With q_m = C^m / (sigma_m L^m), where C^m is the eps1-derivative of L^m,
//   q_m = -sum_{j>m} rho_mj beta_j (G_{d(j)} - mu_j T^2 / 2),
//   beta_j = alpha c_j sigma_j^2 / (1 + alpha c_j)^2,  mu_j = sum_{l>j} f_l sigma_l rho_jl,
// and G_d the time integral of W^d. The Skorohod integral gives
//   zeta = (q^T R^{-1} W_T - T^2/2 sum_{i,m} Rinv_im sum_d a_md R_{d, d(i)}) / T.

FrozenWeights::FrozenWeights(const ModelGrid& model, std::vector<int> priced, WeightForm form)
    : model_(&model), priced_(std::move(priced)), form_(form), horizon_(model.grid().t_end) {
    const ModelSpec& spec = model.spec();
    if (spec.stochastic_vol()) throw std::invalid_argument("frozen-drift weights need deterministic volatility");
    std::vector<double> zero;
    const std::vector<double>& sigma = constant_sigmas(spec, zero);
    const int n = spec.num_rates();
    const double alpha = spec.tenor.accrual;
    const auto& c = spec.initial_rates;
    if (priced_.empty()) throw std::invalid_argument("no priced rates");
    for (int m : priced_)
        if (m < model.first_alive() || m >= n) throw std::out_of_range("priced rate is not live at the horizon");

    const std::size_t p = priced_.size();
    Matrix r_f(p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) r_f(a, b) = model.rate_corr(priced_[a], priced_[b]);
    if (p == 2 && r_f(0, 1) * r_f(0, 1) >= 1.0 - kSingularTolerance)
        throw NumericError("singular Malliavin covariance: the priced rates are perfectly correlated");
    const Matrix rinv = invert(r_f, "Malliavin covariance: the priced rates share a driver");
    rinv_ = rinv.data;

    if (form_ == WeightForm::Literal) {
        if (n != 3 || p != 2 || priced_[0] != 0 || priced_[1] != 1 || spec.driver_of(2) != spec.driver_of(1))
            throw std::invalid_argument(
                "the literal weight form covers three rates, two priced rates and the third rate on the second driver");
        auto beta_lit = [&](int j) {
            const double cj = c[static_cast<std::size_t>(j)], sj = sigma[static_cast<std::size_t>(j)];
            return alpha * cj * cj * sj * sj / ((1.0 + alpha * cj) * (1.0 + alpha * cj));
        };
        beta2_ = beta_lit(1);
        beta3_ = beta_lit(2);
        rho_ = model.rate_corr(0, 1);
        shift_ = sigma[2] * frozen_factor(alpha, c[2]) * beta2_ * horizon_ / 2.0;
        return;
    }

    std::vector<double> beta(static_cast<std::size_t>(n)), mu(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        const double cj = c[static_cast<std::size_t>(j)], sj = sigma[static_cast<std::size_t>(j)];
        beta[static_cast<std::size_t>(j)] = alpha * cj * sj * sj / ((1.0 + alpha * cj) * (1.0 + alpha * cj));
        for (int l = j + 1; l < n; ++l)
            mu[static_cast<std::size_t>(j)] += frozen_factor(alpha, c[static_cast<std::size_t>(l)]) *
                                               sigma[static_cast<std::size_t>(l)] * model.rate_corr(j, l);
    }
    const std::size_t drivers = spec.rate_drivers();
    const double half_t2 = horizon_ * horizon_ / 2.0;
    a_.assign(p, std::vector<double>(drivers, 0.0));
    b_.assign(p, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        const int m = priced_[a];
        for (int j = m + 1; j < n; ++j) {
            const double w = model.rate_corr(m, j) * beta[static_cast<std::size_t>(j)];
            a_[a][static_cast<std::size_t>(spec.driver_of(j))] -= w;
            b_[a] += w * mu[static_cast<std::size_t>(j)] * half_t2;
        }
    }
    const Matrix& rho = model.correlation();
    double trace = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t a = 0; a < p; ++a) {
            double s = 0.0;
            for (std::size_t d = 0; d < drivers; ++d)
                s += a_[a][d] * rho(d, static_cast<std::size_t>(spec.driver_of(priced_[i])));
            trace += rinv(i, a) * s;
        }
    trace_ = trace * half_t2;
}

WeightSample FrozenWeights::operator()(const PathBundle& bundle, bool diagnostics) const {
    const ModelSpec& spec = model_->spec();
    if (bundle.grid != model_->grid()) throw std::invalid_argument("path bundle grid does not match the model grid");
    WeightSample out;
    const double t = horizon_;

    if (form_ == WeightForm::Literal) {
        const auto d1 = static_cast<std::size_t>(spec.driver_of(0)), d2 = static_cast<std::size_t>(spec.driver_of(1));
        const double w1 = bundle.terminal(d1), w2 = bundle.terminal(d2);
        const double integral = time_integral_W(bundle, d2);
        const double b23 = beta2_ + beta3_;
        const double zeta1 = rho_ * (w1 * (shift_ - b23 * integral / t) + rho_ * b23 * t / 2.0) -
                             rho_ * (rho_ * beta3_ * t / 2.0 - beta3_ * w1 * integral / t);
        const double zeta2 = rho_ * rho_ * (w2 * (shift_ - b23 * integral / t) + b23 * t / 2.0) -
                             (beta3_ * t / 2.0 - beta3_ * w2 * integral / t);
        out.zeta = zeta1 + zeta2;
        if (diagnostics)
            out.components = {{"zeta1", zeta1}, {"zeta2", zeta2}, {"W1", w1}, {"W2", w2},
                              {"intW2", integral}, {"beta2", beta2_}, {"beta3", beta3_}};
        return out;
    }

    const std::size_t p = priced_.size();
    const std::size_t drivers = spec.rate_drivers();
    std::vector<double> g(drivers, 0.0);
    for (std::size_t d = 0; d < drivers; ++d) {
        bool used = false;
        for (std::size_t a = 0; a < p; ++a) used = used || a_[a][d] != 0.0;
        if (used) g[d] = time_integral_W(bundle, d);
    }
    std::vector<double> q(p);
    for (std::size_t a = 0; a < p; ++a) {
        double s = b_[a];
        for (std::size_t d = 0; d < drivers; ++d) s += a_[a][d] * g[d];
        q[a] = s;
    }
    double quad = 0.0;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
            quad += q[a] * rinv_[a * p + b] * bundle.terminal(static_cast<std::size_t>(spec.driver_of(priced_[b])));
    out.zeta = (quad - trace_) / t;
    if (diagnostics) {
        for (std::size_t a = 0; a < p; ++a)
            out.components.emplace_back("q" + std::to_string(priced_[a] + 1), q[a]);
        for (std::size_t d = 0; d < drivers; ++d) {
            out.components.emplace_back("W" + std::to_string(d + 1), bundle.terminal(d));
            out.components.emplace_back("intW" + std::to_string(d + 1), g[d]);
        }
        out.components.emplace_back("trace", trace_);
    }
    return out;
}

WeightSample frozen_swaption_weights(const ModelGrid& model, const PathBundle& bundle, WeightForm form) {
    const int n = model.spec().num_rates();
    if (n < 2) throw std::invalid_argument("swaption weights need at least two rates");
    std::vector<int> priced;
    for (int k = model.first_alive(); k < n - 1; ++k) priced.push_back(k);
    if (priced.empty()) priced.push_back(n - 1);
    return FrozenWeights(model, priced, form)(bundle, true);
}

// ---------------------------------------------------------------------------
// Stochastic-volatility weights, two rates W^1, W^2 and variance driver B.
//
// eps1: q_1 = -rho12 beta_2 Y, q_2 = 0, so
//   zeta = -(rho12 beta_2 / c) Y (X_1 - rho12 X_2) / (1 - rho12^2).
// eps2: q_i = J_i / 2 + s_i B / kappa, s_1 = sigma_1/2 + f_2 sigma_2 rho12, s_2 = sigma_2/2,
//   pi = (q^T R^{-1} X + B / kappa - rho^T R^{-1} (H / 2 + s m / kappa)) / c,
// with J_i = int f U dW^i, U_t = int_0^t g dB, H_i = int f G dW^i and
// m = e^{-kappa T} G(T) - c.

SvWeights::SvWeights(const ModelGrid& model, WeightForm form) : model_(&model), form_(form) {
    const ModelSpec& spec = model.spec();
    if (!spec.cir) throw std::invalid_argument("stochastic-volatility weights need a cir section");
    if (spec.num_rates() != 2 || spec.driver_of(0) != 0 || spec.driver_of(1) != 1 || model.first_alive() != 0)
        throw std::invalid_argument("stochastic-volatility weights cover two live rates on two drivers");
    std::vector<double> zero;
    const std::vector<double>& sigma = constant_sigmas(spec, zero);
    const CirSpec& cir = *spec.cir;
    const TimeGrid& grid = model.grid();
    const double alpha = spec.tenor.accrual;
    const double c2 = spec.initial_rates[1];

    horizon_ = grid.t_end;
    kappa_ = cir.kappa;
    c_ = model.base_variance_integral();
    sigma1_ = sigma[0];
    sigma2_ = sigma[1];
    rho12_ = model.rate_corr(0, 1);
    rho1_ = model.variance_corr(0);
    rho2_ = model.variance_corr(1);
    if (rho12_ * rho12_ >= 1.0 - kSingularTolerance)
        throw NumericError("singular Malliavin covariance: |rho12| = 1");
    f2_ = frozen_factor(alpha, c2);
    beta2_ = alpha * c2 * sigma2_ * sigma2_ / ((1.0 + alpha * c2) * (1.0 + alpha * c2));
    if (form_ == WeightForm::Literal) beta2_ *= c2;

    const std::size_t steps = grid.steps;
    const double t_end = horizon_, dt = grid.dt();
    const double decay_end = std::exp(-kappa_ * t_end);
    root_v_.resize(steps + 1);
    x_weight_.resize(steps);
    y_kernel_.resize(steps + 1);
    f_.resize(steps + 1);
    g_.resize(steps + 1);
    b_kernel_.resize(steps + 1);
    h_kernel_.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = grid.node(k);
        const double rv = std::sqrt(cir.base_variance(t));
        root_v_[k] = rv;
        const double tail = cir.theta * (t_end - t) - (cir.v0 - cir.theta) / kappa_ * (decay_end - std::exp(-kappa_ * t));
        y_kernel_[k] = rv * tail;
        f_[k] = std::exp(-kappa_ * t) / rv;
        g_[k] = std::exp(kappa_ * t) * rv;
        b_kernel_[k] = g_[k] * (decay_end - std::exp(-kappa_ * t));
        const double big_g = (cir.v0 - cir.theta) * t + cir.theta * (std::exp(kappa_ * t) - 1.0) / kappa_;
        h_kernel_[k] = f_[k] * big_g;
        if (k < steps) x_weight_[k] = model.base_vol(k);
    }
    // Discrete Ito isometry so that the subtracted means match the sampled integrals.
    double m = 0.0, cov = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        m += b_kernel_[k] * x_weight_[k] * dt;
        cov += y_kernel_[k] * x_weight_[k] * dt;
    }
    m_ = m;
    cov_x2y_ = cov;
    cov_x1y_ = rho12_ * cov;
}

WeightSample SvWeights::operator()(const PathBundle& bundle, const PathBundle* independent, bool diagnostics) const {
    const ModelSpec& spec = model_->spec();
    if (bundle.grid != model_->grid()) throw std::invalid_argument("path bundle grid does not match the model grid");
    const std::size_t bd = spec.variance_driver();
    const std::size_t steps = bundle.grid.steps;

    double x1 = 0.0, x2 = 0.0, y = 0.0, bb = 0.0;
    double u = 0.0, j1 = 0.0, j2 = 0.0, h1 = 0.0, h2 = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double dw1 = bundle.increment(k, 0), dw2 = bundle.increment(k, 1), db = bundle.increment(k, bd);
        x1 += x_weight_[k] * dw1;
        x2 += x_weight_[k] * dw2;
        y += y_kernel_[k] * dw2;
        bb += b_kernel_[k] * db;
        j1 += f_[k] * u * dw1;
        j2 += f_[k] * u * dw2;
        h1 += h_kernel_[k] * dw1;
        h2 += h_kernel_[k] * dw2;
        u += g_[k] * db;
    }

    WeightSample out;
    const double one_minus = 1.0 - rho12_ * rho12_;
    if (form_ == WeightForm::Derived) {
        out.zeta = -(rho12_ * beta2_ / c_) * y * (x1 - rho12_ * x2) / one_minus;
        const double s1 = sigma1_ / 2.0 + f2_ * sigma2_ * rho12_, s2 = sigma2_ / 2.0;
        const double q1 = 0.5 * j1 + s1 * bb / kappa_, q2 = 0.5 * j2 + s2 * bb / kappa_;
        // R^{-1} v for the 2x2 correlation block
        auto solve = [&](double v1, double v2) {
            return std::array<double, 2>{(v1 - rho12_ * v2) / one_minus, (v2 - rho12_ * v1) / one_minus};
        };
        const auto rx = solve(x1, x2);
        const auto rr = solve(rho1_, rho2_);
        const double shift1 = 0.5 * h1 + s1 * m_ / kappa_, shift2 = 0.5 * h2 + s2 * m_ / kappa_;
        out.pi = (q1 * rx[0] + q2 * rx[1] + bb / kappa_ - (rr[0] * shift1 + rr[1] * shift2)) / c_;
        if (diagnostics)
            out.components = {{"X1", x1}, {"X2", x2}, {"Y", y}, {"B", bb}, {"J1", j1}, {"J2", j2},
                              {"H1", h1}, {"H2", h2}, {"beta2", beta2_}, {"c", c_}, {"m", m_}};
        return out;
    }

    if (!independent) throw std::invalid_argument("the literal weight form needs independent drivers");
    if (independent->grid != bundle.grid || independent->drivers < 2)
        throw std::invalid_argument("independent drivers do not match the path grid");
    double d1 = 0.0, d2 = 0.0, z1 = 0.0, z2 = 0.0;
    double i1 = 0.0, i2 = 0.0, iz1 = 0.0, iz2 = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double dw1 = bundle.increment(k, 0), dw2 = bundle.increment(k, 1);
        d1 += f_[k] * i1 * dw1;
        d2 += f_[k] * i2 * dw2;
        z1 += f_[k] * iz1 * dw1;
        z2 += f_[k] * iz2 * dw2;
        i1 += g_[k] * dw1;
        i2 += g_[k] * dw2;
        iz1 += g_[k] * independent->increment(k, 0);
        iz2 += g_[k] * independent->increment(k, 1);
    }
    const double zeta1 = -(rho12_ * beta2_ / c_) * (x1 * y - cov_x1y_);
    const double zeta2 = (rho12_ * rho12_ * beta2_ / c_) * (x2 * y - cov_x2y_);
    out.zeta = zeta1 + zeta2;

    const double k = kappa_, s1 = sigma1_, s2 = sigma2_, r = rho12_;
    const double alpha = spec.tenor.accrual, c2 = spec.initial_rates[1];
    const double q = (alpha * c2 * (2.0 * r * s2 + s1) + s1) / (1.0 + alpha * c2);
    const double e = (1.0 - std::exp(-k * horizon_)) / k - horizon_;
    const double mix1 = rho1_ * d1 + std::sqrt(1.0 - rho1_ * rho1_) * z1;
    const double mix2 = rho2_ * d2 + std::sqrt(1.0 - rho2_ * rho2_) * z2;
    const double pi1 = (x1 * mix1 + bb * x1 / k * q - rho1_ * e / k * q) / (2.0 * c_) -
                       r / (2.0 * c_) * (x1 * mix2 + s1 * bb * x1 / k + r * bb / k - s1 * rho1_ * e / k);
    const double pi2 = (s2 / s1 * x2 * mix2 + bb / k * (s2 * x2 + 1.0) - s2 * rho2_ * e / k) / (2.0 * c_) -
                       r / (2.0 * c_) *
                           (s1 / s2 * x2 * mix1 + s1 * bb * x2 / (k * s2) * q + r * bb / k - s1 * rho2_ * e / (k * s2) * q);
    out.pi = pi1 + pi2;
    if (diagnostics)
        out.components = {{"zeta1", zeta1}, {"zeta2", zeta2}, {"pi1", pi1}, {"pi2", pi2}, {"X1", x1},
                          {"X2", x2}, {"Y", y}, {"B", bb}, {"D1", d1}, {"D2", d2}, {"Z1", z1},
                          {"Z2", z2}, {"E", e}, {"beta2", beta2_}, {"c", c_}};
    return out;
}

WeightSample sv_swaption_weights(const ModelGrid& model, const PathBundle& bundle,
                                 const PathBundle* independent, WeightForm form) {
    return SvWeights(model, form)(bundle, independent, true);
}

}  // namespace lmmtaylor
