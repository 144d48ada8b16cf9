#include "lmmtaylor/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <thread>

#include "lmmtaylor/error.hpp"

namespace lmmtaylor {

std::string method_label(const MethodSpec& method, bool stochastic_vol) {
    switch (method.method) {
        case Method::Benchmark: return "benchmark";
        case Method::Frozen: return stochastic_vol ? "base_model" : "frozen";
        case Method::StrongTaylor: return method.order == 0 ? "strong_taylor_0" : "strong_taylor";
        case Method::WeakTaylor: return "weak_taylor";
    }
    return "unknown";
}

std::optional<MethodSpec> parse_method(const std::string& label) {
    if (label == "benchmark") return MethodSpec{Method::Benchmark, 1};
    if (label == "frozen" || label == "base_model") return MethodSpec{Method::Frozen, 0};
    if (label == "strong_taylor" || label == "strong") return MethodSpec{Method::StrongTaylor, 1};
    if (label == "strong_taylor_0") return MethodSpec{Method::StrongTaylor, 0};
    if (label == "weak_taylor" || label == "weak") return MethodSpec{Method::WeakTaylor, 1};
    return std::nullopt;
}

unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv(kWorkersEnv)) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

namespace {

bool uses_payoff(Quantity q) {
    switch (q) {
        case Quantity::Zeta:
        case Quantity::Pi:
        case Quantity::BenchmarkRate:
        case Quantity::FrozenRate:
        case Quantity::StrongRate: return false;
        default: return true;
    }
}

bool uses_weights(Quantity q) {
    return q == Quantity::Weak || q == Quantity::Zeta || q == Quantity::Pi || q == Quantity::PayoffZeta ||
           q == Quantity::PayoffPi;
}

// Everything shared read-only by the workers.
struct RunContext {
    std::unique_ptr<ModelGrid> model;
    std::vector<std::unique_ptr<ModelGrid>> variants;
    std::unique_ptr<PathGenerator> generator;
    std::unique_ptr<PathGenerator> independent;
    std::vector<PayoffSpec> payoffs;
    std::vector<Cell> cells;
    double alpha = 0.0;

    bool need_benchmark = false, need_frozen = false, need_weights = false;
    std::vector<char> need_variant;
    bool need_strong[2] = {false, false};
    std::vector<int> strong_targets;

    // Deterministic-vol weights, one per distinct set of priced rates.
    std::vector<std::unique_ptr<FrozenWeights>> frozen_weights;
    std::vector<int> weight_set;  // payoff index -> frozen_weights index
    std::unique_ptr<SvWeights> sv_weights;
};

std::unique_ptr<RunContext> build_context(const ModelSpec& spec, const std::vector<PayoffSpec>& payoffs,
                                          const std::vector<Cell>& cells, const EngineSettings& settings,
                                          const std::vector<ModelSpec>& variants) {
    auto ctx = std::make_unique<RunContext>();
    spec.validate();
    for (const auto& p : payoffs) validate_payoff(p, spec.tenor);
    double horizon = spec.tenor.fixing(0);
    if (!payoffs.empty()) {
        horizon = payoff_horizon(payoffs.front(), spec.tenor);
        for (const auto& p : payoffs)
            if (std::fabs(payoff_horizon(p, spec.tenor) - horizon) > 1e-12)
                throw ConfigError("payoff", "all payoffs in one run must fix on the same date");
    }
    const TimeGrid grid = TimeGrid::for_horizon(horizon, settings.steps_per_year, settings.min_steps);
    ctx->model = std::make_unique<ModelGrid>(spec, grid);
    for (const auto& v : variants) {
        if (v.total_drivers() != spec.total_drivers() || !(v.corr == spec.corr) || v.rate_driver != spec.rate_driver)
            throw std::invalid_argument("model variants must share the drivers of the main model");
        ctx->variants.push_back(std::make_unique<ModelGrid>(v, grid));
    }
    ctx->generator = std::make_unique<PathGenerator>(grid, ctx->model->correlation(), SeedPolicy{settings.seed});
    ctx->payoffs = payoffs;
    ctx->cells = cells;
    ctx->alpha = spec.tenor.accrual;
    ctx->need_variant.assign(variants.size(), 0);

    std::vector<char> target(static_cast<std::size_t>(spec.num_rates()), 0);
    for (const auto& c : cells) {
        if (uses_payoff(c.quantity) && (c.index < 0 || c.index >= static_cast<int>(payoffs.size())))
            throw std::out_of_range("cell refers to a missing payoff");
        if (!uses_payoff(c.quantity) && c.quantity != Quantity::Zeta && c.quantity != Quantity::Pi &&
            (c.index < ctx->model->first_alive() || c.index >= spec.num_rates()))
            throw std::out_of_range("cell refers to a rate that is not live at the horizon");
        switch (c.quantity) {
            case Quantity::Benchmark:
                if (c.variant >= 0) {
                    if (c.variant >= static_cast<int>(variants.size())) throw std::out_of_range("missing model variant");
                    ctx->need_variant[static_cast<std::size_t>(c.variant)] = 1;
                } else {
                    ctx->need_benchmark = true;
                }
                break;
            case Quantity::BenchmarkRate: ctx->need_benchmark = true; break;
            case Quantity::BenchmarkMinusFrozen:
                ctx->need_benchmark = true;
                ctx->need_frozen = true;
                break;
            case Quantity::Frozen:
            case Quantity::FrozenRate: ctx->need_frozen = true; break;
            case Quantity::Strong:
            case Quantity::StrongRate: {
                if (spec.stochastic_vol())
                    throw ConfigError("engine.methods", "strong_taylor is defined for deterministic volatility only");
                if (c.order != 0 && c.order != 1) throw ConfigError("engine.methods", "strong proxy order must be 0 or 1");
                ctx->need_strong[c.order] = true;
                if (c.quantity == Quantity::StrongRate)
                    target[static_cast<std::size_t>(c.index)] = 1;
                else
                    for (int r : payoff_rates(payoffs[static_cast<std::size_t>(c.index)])) target[static_cast<std::size_t>(r)] = 1;
                break;
            }
            default: break;
        }
        if (uses_weights(c.quantity)) {
            ctx->need_weights = true;
            if (c.quantity != Quantity::Zeta && c.quantity != Quantity::Pi) ctx->need_frozen = true;
        }
    }
    for (int r = 0; r < spec.num_rates(); ++r)
        if (target[static_cast<std::size_t>(r)]) ctx->strong_targets.push_back(r);

    if (ctx->need_weights) {
        try {
            if (spec.stochastic_vol()) {
                ctx->sv_weights = std::make_unique<SvWeights>(*ctx->model, settings.weights);
                if (ctx->sv_weights->needs_independent_drivers())
                    ctx->independent = std::make_unique<PathGenerator>(grid, Matrix::identity(2), SeedPolicy{settings.seed}, 1);
            } else {
                std::map<std::vector<int>, int> seen;
                ctx->weight_set.assign(std::max<std::size_t>(payoffs.size(), 1), 0);
                for (std::size_t p = 0; p < std::max<std::size_t>(payoffs.size(), 1); ++p) {
                    std::vector<int> rates = payoffs.empty() ? std::vector<int>{ctx->model->first_alive()}
                                                             : payoff_rates(payoffs[p]);
                    auto it = seen.find(rates);
                    if (it == seen.end()) {
                        it = seen.emplace(rates, static_cast<int>(ctx->frozen_weights.size())).first;
                        ctx->frozen_weights.push_back(std::make_unique<FrozenWeights>(*ctx->model, rates, settings.weights));
                    }
                    ctx->weight_set[p] = it->second;
                }
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError("engine.methods", std::string("weak_taylor is not available for this model: ") + e.what());
        }
    }
    return ctx;
}

class PathEvaluator {
public:
    explicit PathEvaluator(const RunContext& ctx) : ctx_(ctx), variant_states_(ctx.variants.size()) {}

    void evaluate(const PathBundle& w, const PathBundle* z, double* out) {
        const ModelGrid& model = *ctx_.model;
        const ModelSpec& spec = model.spec();
        if (ctx_.need_benchmark) bench_ = simulate_benchmark(model, w);
        for (std::size_t v = 0; v < ctx_.variants.size(); ++v)
            if (ctx_.need_variant[v]) variant_states_[v] = simulate_benchmark(*ctx_.variants[v], w);
        if (ctx_.need_frozen) frozen_ = frozen_closed_form(model, w);
        for (int o = 0; o < 2; ++o)
            if (ctx_.need_strong[o]) strong_[o] = simulate_strong_proxy(model, w, o, ctx_.strong_targets);
        if (ctx_.need_weights) {
            if (ctx_.sv_weights) {
                sv_sample_ = (*ctx_.sv_weights)(w, z, false);
            } else {
                frozen_samples_.resize(ctx_.frozen_weights.size());
                for (std::size_t s = 0; s < ctx_.frozen_weights.size(); ++s)
                    frozen_samples_[s] = (*ctx_.frozen_weights[s])(w, false);
            }
        }
        auto weights_for = [&](int payoff) -> const WeightSample& {
            if (ctx_.sv_weights) return sv_sample_;
            const std::size_t p = payoff < 0 ? 0 : static_cast<std::size_t>(payoff);
            return frozen_samples_[static_cast<std::size_t>(ctx_.weight_set[p])];
        };

        for (std::size_t i = 0; i < ctx_.cells.size(); ++i) {
            const Cell& c = ctx_.cells[i];
            const PayoffSpec* p = uses_payoff(c.quantity) ? &ctx_.payoffs[static_cast<std::size_t>(c.index)] : nullptr;
            double v = 0.0;
            switch (c.quantity) {
                case Quantity::Benchmark:
                    v = payoff_value(c.variant >= 0 ? variant_states_[static_cast<std::size_t>(c.variant)] : bench_, *p, ctx_.alpha);
                    break;
                case Quantity::Frozen: v = payoff_value(frozen_, *p, ctx_.alpha); break;
                case Quantity::Strong: v = payoff_value(strong_[c.order], *p, ctx_.alpha); break;
                case Quantity::Weak: {
                    const WeightSample& ws = weights_for(c.index);
                    const double f = payoff_value(frozen_, *p, ctx_.alpha);
                    v = f + spec.eps1 * f * ws.zeta + spec.eps2 * f * ws.pi;
                    break;
                }
                case Quantity::BenchmarkMinusFrozen:
                    v = payoff_value(bench_, *p, ctx_.alpha) - payoff_value(frozen_, *p, ctx_.alpha);
                    break;
                case Quantity::Zeta: v = weights_for(c.index).zeta; break;
                case Quantity::Pi: v = weights_for(c.index).pi; break;
                case Quantity::PayoffZeta: v = payoff_value(frozen_, *p, ctx_.alpha) * weights_for(c.index).zeta; break;
                case Quantity::PayoffPi: v = payoff_value(frozen_, *p, ctx_.alpha) * weights_for(c.index).pi; break;
                case Quantity::BenchmarkRate: v = bench_.rates[static_cast<std::size_t>(c.index)]; break;
                case Quantity::FrozenRate: v = frozen_.rates[static_cast<std::size_t>(c.index)]; break;
                case Quantity::StrongRate: v = strong_[c.order].rates[static_cast<std::size_t>(c.index)]; break;
            }
            out[i] = v;
        }
    }

private:
    const RunContext& ctx_;
    RateState bench_, frozen_, strong_[2];
    std::vector<RateState> variant_states_;
    WeightSample sv_sample_;
    std::vector<WeightSample> frozen_samples_;
};

struct BatchSums {
    std::vector<double> sum, sumsq;
};

// Pairwise reduction over batches [lo, hi) in index order.
BatchSums reduce(const std::vector<BatchSums>& batches, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return batches[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    BatchSums a = reduce(batches, lo, mid);
    const BatchSums b = reduce(batches, mid, hi);
    for (std::size_t i = 0; i < a.sum.size(); ++i) {
        a.sum[i] += b.sum[i];
        a.sumsq[i] += b.sumsq[i];
    }
    return a;
}

}  // namespace

RunResult run_cells(const ModelSpec& model, const std::vector<PayoffSpec>& payoffs, const std::vector<Cell>& cells,
                    const EngineSettings& settings, const std::vector<ModelSpec>& variants) {
    const auto start = std::chrono::steady_clock::now();
    if (settings.paths < (settings.antithetic ? 4u : 2u))
        throw ConfigError("engine.paths", "too few paths for a standard error");
    if (settings.batch_pairs < 1) throw std::invalid_argument("batch size must be positive");
    const auto ctx = build_context(model, payoffs, cells, settings, variants);
    const std::size_t width = cells.size();
    const std::size_t samples = settings.antithetic ? settings.paths / 2 : settings.paths;
    const std::size_t batches = (samples + settings.batch_pairs - 1) / settings.batch_pairs;

    std::vector<BatchSums> sums(batches);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        PathEvaluator eval(*ctx);
        PathBundle w, z;
        std::vector<double> a(width), b(width);
        while (true) {
            const std::size_t batch = next.fetch_add(1);
            if (batch >= batches) break;
            BatchSums& s = sums[batch];
            s.sum.assign(width, 0.0);
            s.sumsq.assign(width, 0.0);
            const std::size_t first = batch * settings.batch_pairs;
            const std::size_t last = std::min(samples, first + settings.batch_pairs);
            for (std::size_t path = first; path < last; ++path) {
                ctx->generator->generate(path, w);
                if (ctx->independent) ctx->independent->generate(path, z);
                const PathBundle* zp = ctx->independent ? &z : nullptr;
                eval.evaluate(w, zp, a.data());
                if (settings.antithetic) {
                    w.negate();
                    if (zp) z.negate();
                    eval.evaluate(w, zp, b.data());
                    for (std::size_t i = 0; i < width; ++i) a[i] = 0.5 * (a[i] + b[i]);
                }
                for (std::size_t i = 0; i < width; ++i) {
                    s.sum[i] += a[i];
                    s.sumsq[i] += a[i] * a[i];
                }
            }
        }
    };
    const unsigned workers = std::min<std::size_t>(resolve_workers(settings.workers), batches);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const BatchSums total = reduce(sums, 0, batches);
    RunResult out;
    out.paths = settings.antithetic ? 2 * samples : samples;
    out.steps = ctx->model->grid().steps;
    out.cells.resize(width);
    const auto m = static_cast<double>(samples);
    for (std::size_t i = 0; i < width; ++i) {
        const double mean = total.sum[i] / m;
        const double var = std::max((total.sumsq[i] - total.sum[i] * mean) / (m - 1.0), 0.0);
        out.cells[i] = {mean, std::sqrt(var / m)};
    }
    out.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

namespace {

Cell cell_for(const MethodSpec& method, int payoff) {
    switch (method.method) {
        case Method::Benchmark: return {Quantity::Benchmark, payoff, -1, 1};
        case Method::Frozen: return {Quantity::Frozen, payoff, -1, 0};
        case Method::StrongTaylor: return {Quantity::Strong, payoff, -1, method.order};
        case Method::WeakTaylor: return {Quantity::Weak, payoff, -1, 1};
    }
    return {};
}

}  // namespace

std::vector<PriceEstimate> price_all(const ModelSpec& model, const std::vector<PayoffSpec>& payoffs,
                                     const std::vector<MethodSpec>& methods, const EngineSettings& settings) {
    std::vector<Cell> cells;
    for (const auto& m : methods)
        for (std::size_t p = 0; p < payoffs.size(); ++p) cells.push_back(cell_for(m, static_cast<int>(p)));
    const RunResult run = run_cells(model, payoffs, cells, settings);
    std::vector<PriceEstimate> out;
    std::size_t i = 0;
    for (const auto& m : methods)
        for (const auto& p : payoffs) {
            const double factor = bps_factor(p, model);
            PriceEstimate e;
            e.method = m;
            e.label = method_label(m, model.stochastic_vol());
            e.strike = strike_of(p);
            e.mean_bps = run.cells[i].mean * factor;
            e.stderr_bps = run.cells[i].stderr_ * factor;
            e.paths = run.paths;
            e.steps = run.steps;
            e.seed = settings.seed;
            e.elapsed = run.elapsed;
            e.discount = std::holds_alternative<PayerSwaption>(p) ? factor * rate_scale(model.units) / 1e4 : 1.0;
            out.push_back(e);
            ++i;
        }
    return out;
}

PriceEstimate price(const ModelSpec& model, const PayoffSpec& payoff, const MethodSpec& method,
                    const EngineSettings& settings) {
    return price_all(model, {payoff}, {method}, settings).front();
}

ConvergenceReport fit_convergence(std::vector<double> eps, std::vector<double> errors) {
    if (eps.size() < 3 || eps.size() != errors.size())
        throw std::invalid_argument("a convergence study needs at least three points");
    ConvergenceReport r;
    r.eps = std::move(eps);
    r.errors = std::move(errors);
    double scale = 0.0;
    for (double e : r.errors) scale = std::max(scale, std::fabs(e));
    if (scale < 1e-13) {
        r.exact = true;
        r.slope = std::nan("");
        return r;
    }
    const auto n = static_cast<double>(r.eps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < r.eps.size(); ++i) {
        const double x = std::log(r.eps[i]), y = std::log(std::max(r.errors[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - r.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < r.eps.size(); ++i) {
        const double d = std::log(std::max(r.errors[i], 1e-300)) - (intercept + r.slope * std::log(r.eps[i]));
        rss += d * d;
    }
    r.residual = std::sqrt(rss / n);
    return r;
}

namespace {

void check_eps_list(const std::vector<double>& eps) {
    if (eps.size() < 3) throw ConfigError("study.eps", "need at least three eps values");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw ConfigError("study.eps", "eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw ConfigError("study.eps", "eps values must decrease");
    }
}

}  // namespace

ConvergenceReport strong_convergence(const ModelSpec& model, double horizon, const std::vector<double>& eps_list,
                                     const EngineSettings& settings) {
    check_eps_list(eps_list);
    if (model.stochastic_vol()) throw ConfigError("model", "the strong study needs deterministic volatility");
    const TimeGrid grid = TimeGrid::for_horizon(horizon, settings.steps_per_year, settings.min_steps);
    std::vector<std::unique_ptr<ModelGrid>> grids;
    for (double e : eps_list) {
        ModelSpec m = model;
        m.eps1 = e;
        grids.push_back(std::make_unique<ModelGrid>(m, grid));
    }
    PathGenerator gen(grid, grids.front()->correlation(), SeedPolicy{settings.seed});
    std::vector<double> err(eps_list.size(), 0.0);
    const std::size_t samples = settings.antithetic ? settings.paths / 2 : settings.paths;
    if (samples < 1) throw ConfigError("engine.paths", "need at least one path");
    PathBundle w;
    std::size_t count = 0;
    const int n = model.num_rates();
    for (std::size_t p = 0; p < samples; ++p) {
        gen.generate(p, w);
        for (int half = 0; half < (settings.antithetic ? 2 : 1); ++half) {
            if (half == 1) w.negate();
            const StrongCorrection y = strong_correction(*grids.front(), w);
            for (std::size_t e = 0; e < eps_list.size(); ++e) {
                const RateState x = simulate_x_process(*grids[e], w);
                for (int i = grids[e]->first_alive(); i < n; ++i) {
                    const double t1 = model.initial_rates[static_cast<std::size_t>(i)] + eps_list[e] * y.value(grid.steps, i);
                    err[e] += std::fabs(x.rates[static_cast<std::size_t>(i)] - t1);
                }
            }
            ++count;
        }
    }
    for (double& e : err) e /= static_cast<double>(count);
    return fit_convergence(eps_list, err);
}

ConvergenceReport weak_convergence(const ChaosFunctional& functional, const ScalarPayoff& f,
                                   const std::vector<double>& eps_list) {
    check_eps_list(eps_list);
    std::vector<double> err;
    for (double e : eps_list)
        err.push_back(std::fabs(gaussian_exact_price(functional, f, e) - gaussian_weak_price(functional, f, e, 1)));
    return fit_convergence(eps_list, err);
}

ConvergenceReport weak_convergence(const ModelSpec& model, const PayoffSpec& payoff,
                                   const std::vector<double>& eps_list, const EngineSettings& settings) {
    check_eps_list(eps_list);
    if (model.stochastic_vol()) throw ConfigError("model", "the weak study on a rate model needs deterministic volatility");
    std::vector<ModelSpec> variants;
    std::vector<Cell> cells{{Quantity::Frozen, 0}, {Quantity::PayoffZeta, 0}};
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        ModelSpec m = model;
        m.eps1 = eps_list[e];
        variants.push_back(m);
        cells.push_back({Quantity::Benchmark, 0, static_cast<int>(e)});
    }
    const RunResult r = run_cells(model, {payoff}, cells, settings, variants);
    const double factor = bps_factor(payoff, model);
    std::vector<double> err;
    for (std::size_t e = 0; e < eps_list.size(); ++e)
        err.push_back(factor * std::fabs(r.cells[2 + e].mean - r.cells[0].mean - eps_list[e] * r.cells[1].mean));
    return fit_convergence(eps_list, err);
}

PerfReport perf_compare(const ModelSpec& model, std::size_t paths, const EngineSettings& settings) {
    if (model.num_rates() < 2) throw ConfigError("model.tenor.rates", "performance comparison needs N >= 2");
    if (model.stochastic_vol()) throw ConfigError("model", "performance comparison needs deterministic volatility");
    const TimeGrid grid = TimeGrid::for_horizon(model.tenor.fixing(0), settings.steps_per_year, settings.min_steps);
    const ModelGrid mg(model, grid);
    PathGenerator gen(grid, mg.correlation(), SeedPolicy{settings.seed});
    const std::vector<int> target{0};
    constexpr std::size_t kChunk = 256;
    std::vector<PathBundle> chunk(kChunk);
    double t_bench = 0.0, t_proxy = 0.0, sink = 0.0;
    for (std::size_t first = 0; first < paths; first += kChunk) {
        const std::size_t count = std::min(kChunk, paths - first);
        for (std::size_t i = 0; i < count; ++i) gen.generate(first + i, chunk[i]);
        auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < count; ++i) sink += simulate_benchmark(mg, chunk[i]).rates[0];
        auto t1 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < count; ++i) sink += simulate_strong_proxy(mg, chunk[i], 1, target).rates[0];
        auto t2 = std::chrono::steady_clock::now();
        t_bench += std::chrono::duration<double>(t1 - t0).count();
        t_proxy += std::chrono::duration<double>(t2 - t1).count();
    }
    PerfReport r;
    r.rates = model.num_rates();
    r.paths = paths;
    r.benchmark_seconds_per_path = t_bench / static_cast<double>(paths);
    r.proxy_seconds_per_path = t_proxy / static_cast<double>(paths);
    r.speedup = std::isfinite(sink) && t_proxy > 0.0 ? t_bench / t_proxy : 0.0;
    return r;
}

}  // namespace lmmtaylor
