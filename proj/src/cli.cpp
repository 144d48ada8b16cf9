#include "lmmtaylor/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "lmmtaylor/config.hpp"
#include "lmmtaylor/error.hpp"
#include "lmmtaylor/tables.hpp"

namespace lmmtaylor {

namespace {

struct Overrides {
    std::optional<std::size_t> paths;
    std::optional<double> steps;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
    std::optional<bool> antithetic;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--paths", paths, "Simulated paths (antithetic pairs count as two)");
        cmd->add_option("--steps", steps, "Time steps per year");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--workers", workers, "Worker threads (default: $LMMTAYLOR_WORKERS, then all cores)");
        cmd->add_option("--out", out, "CSV output path");
        cmd->add_option("--antithetic", antithetic, "Antithetic pairs (true/false)");
    }

    void apply(EngineSettings& e) const {
        if (paths) e.paths = *paths;
        if (steps) e.steps_per_year = *steps;
        if (seed) e.seed = *seed;
        if (workers) e.workers = *workers;
        if (antithetic) e.antithetic = *antithetic;
    }
};

std::string num(double v) {
    char buf[64];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

// CSV to --out (or the config's output) with the summary on `out`; otherwise
// CSV on `out` and the summary on `err`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& out, std::ostream& err) : out_(&out), err_(&err) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ConfigError("--out", "cannot write " + path);
        }
    }
    std::ostream& csv() { return file_ ? *file_ : *out_; }
    std::ostream& summary() { return file_ ? *out_ : *err_; }

private:
    std::ostream* out_;
    std::ostream* err_;
    std::unique_ptr<std::ofstream> file_;
};

void warn_settings(const EngineSettings& e, std::ostream& os) {
    if (e.paths < 100) os << "warning: only " << e.paths << " paths; estimates are noise-dominated\n";
}

RunConfig load_with(const std::string& path, const Overrides& o) {
    RunConfig c = load_config(path);
    o.apply(c.engine);
    if (o.out) c.output = *o.out;
    validate_config(c);
    return c;
}

int cmd_price(const std::string& path, const Overrides& o, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_with(path, o);
    Sink sink(c.output, out, err);
    warn_settings(c.engine, sink.summary());
    std::vector<ReportRow> rows;
    if (c.gaussian) {
        const GaussianDemoSpec& g = *c.gaussian;
        const ChaosFunctional fn = g.functional();
        const double level = g.payoff.level;
        auto row = [&](const std::string& method, double mean, double se) {
            rows.push_back({c.name, level, method, mean, se, std::nullopt, "n/a"});
        };
        row("exact", gaussian_exact_price(fn, g.payoff, g.eps), 0.0);
        row("order_0", gaussian_weak_price(fn, g.payoff, g.eps, 0, g.form), 0.0);
        row("weak_taylor", gaussian_weak_price(fn, g.payoff, g.eps, 1, g.form), 0.0);
        row("weak_taylor_2", gaussian_weak_price(fn, g.payoff, g.eps, 2, g.form), 0.0);
        const Polynomial w1 = weight_recursion(1, fn, g.form);
        row("weight_1", gaussian_expectation([&](double x) { return g.payoff(x) * w1(x); }, fn.variance(),
                                             g.payoff.breakpoints()),
            0.0);
        const McEstimate mc = gaussian_weighted_mc(fn, [&](double x) { return g.payoff(x); }, w1, c.engine.paths,
                                                   c.engine.seed);
        row("weight_1_mc", mc.mean, mc.stderr_);
        sink.summary() << c.name << ": Gaussian demo at eps = " << g.eps << " (values are raw expectations)\n";
    } else {
        for (const auto& w : c.model->warnings()) sink.summary() << "warning: " << w << "\n";
        const auto est = price_all(*c.model, c.payoffs(), c.methods, c.engine);
        for (const auto& e : est) rows.push_back({c.name, e.strike, e.label, e.mean_bps, e.stderr_bps, std::nullopt, "n/a"});
        if (!est.empty())
            sink.summary() << c.name << ": " << est.front().paths << " paths, " << est.front().steps << " steps, seed "
                           << c.engine.seed << ", " << std::fixed << std::setprecision(2) << est.front().elapsed
                           << " s\n";
    }
    write_report_csv(sink.csv(), rows);
    return kExitOk;
}

int cmd_reproduce(int id, const Overrides& o, std::ostream& out, std::ostream& err) {
    if (id < 1 || id > 3) throw ConfigError("table", "expected 1, 2 or 3");
    RunConfig c = table_config(id);
    o.apply(c.engine);
    Sink sink(o.out.value_or(""), out, err);
    warn_settings(c.engine, sink.summary());
    const TableReport report = reproduce_table(id, c.engine);
    write_report_csv(sink.csv(), report.rows);
    std::ostream& s = sink.summary();
    s << "table " << id << ": " << report.paths << " paths, seed " << c.engine.seed << ", " << std::fixed
      << std::setprecision(2) << report.elapsed << " s\n";
    for (const auto& chk : report.checks) {
        s << (chk.pass ? "PASS " : "FAIL ") << chk.name;
        if (!chk.detail.empty()) s << " (" << chk.detail << ")";
        s << "\n";
    }
    for (const auto& n : report.notes) s << "note: " << n << "\n";
    for (const auto& r : report.rows)
        if (r.pass == "fail")
            s << "  " << r.method << " K=" << num(r.strike) << ": " << std::setprecision(4) << r.mean_bps << " +- "
              << r.stderr_bps << " bps vs " << *r.published_bps << "\n";
    return report.passed() ? kExitOk : kExitToleranceFailure;
}

std::vector<double> parse_eps(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
        if (r.ec != std::errc() || r.ptr != item.data() + item.size()) throw ConfigError("--eps", "expected numbers separated by commas");
        out.push_back(v);
    }
    return out;
}

int cmd_study(const std::string& path, const Overrides& o, const std::optional<std::string>& kind,
              const std::optional<std::string>& eps, std::ostream& out, std::ostream& err) {
    RunConfig c = load_with(path, o);
    StudySpec study = c.study.value_or(StudySpec{StudyKind::Strong, {0.5, 0.25, 0.125}, std::nullopt, std::nullopt});
    if (!c.study && c.gaussian) study.kind = StudyKind::Weak;
    if (kind) {
        if (*kind == "strong") study.kind = StudyKind::Strong;
        else if (*kind == "weak") study.kind = StudyKind::Weak;
        else throw ConfigError("--kind", "expected strong or weak");
    }
    if (eps) study.eps = parse_eps(*eps);
    c.study = study;
    validate_config(c);

    Sink sink(c.output, out, err);
    ConvergenceReport r;
    if (c.gaussian) {
        r = weak_convergence(c.gaussian->functional(), study.payoff.value_or(c.gaussian->payoff), study.eps);
    } else if (study.kind == StudyKind::Strong) {
        const double horizon = study.horizon.value_or(payoff_horizon(c.payoffs().front(), c.model->tenor));
        r = strong_convergence(*c.model, horizon, study.eps, c.engine);
    } else {
        r = weak_convergence(*c.model, c.payoffs().front(), study.eps, c.engine);
    }
    const std::string kind_label = study.kind == StudyKind::Strong ? "strong" : "weak";
    const std::string slope = r.exact ? "exact" : num(r.slope);
    sink.csv() << "kind,eps,error,slope\n";
    for (std::size_t i = 0; i < r.eps.size(); ++i)
        sink.csv() << kind_label << ',' << num(r.eps[i]) << ',' << num(r.errors[i]) << ',' << slope << '\n';
    sink.summary() << c.name << ": " << kind_label << " remainder, fitted slope " << slope;
    if (!r.exact) sink.summary() << " (log-log residual " << num(r.residual) << ")";
    sink.summary() << "\n";
    return kExitOk;
}

int cmd_dump_weights(const std::string& path, const Overrides& o, std::size_t count, std::ostream& out,
                     std::ostream& err) {
    const RunConfig c = load_with(path, o);
    Sink sink(c.output, out, err);
    std::ostream& csv = sink.csv();
    if (c.gaussian) {
        const ChaosFunctional fn = c.gaussian->functional();
        const Polynomial w1 = weight_recursion(1, fn, c.gaussian->form);
        const Polynomial w2 = weight_recursion(2, fn, c.gaussian->form);
        PathGenerator gen(fn.grid, Matrix::identity(1), SeedPolicy{c.engine.seed});
        csv << "path,F0,pi1,pi1_pathwise,pi2\n";
        for (std::size_t p = 0; p < count; ++p) {
            const PathBundle b = gen.generate(p);
            const double x = fn.sample(b);
            csv << p << ',' << num(x) << ',' << num(w1(x)) << ',' << num(pi1_pathwise(fn, b)) << ',' << num(w2(x)) << '\n';
        }
        return kExitOk;
    }
    const ModelSpec& m = *c.model;
    const PayoffSpec payoff = c.payoffs().front();
    const TimeGrid grid =
        TimeGrid::for_horizon(payoff_horizon(payoff, m.tenor), c.engine.steps_per_year, c.engine.min_steps);
    const ModelGrid mg(m, grid);
    PathGenerator gen(grid, mg.correlation(), SeedPolicy{c.engine.seed});
    std::unique_ptr<PathGenerator> indep;
    std::unique_ptr<FrozenWeights> fw;
    std::unique_ptr<SvWeights> sw;
    try {
        if (m.stochastic_vol()) {
            sw = std::make_unique<SvWeights>(mg, c.engine.weights);
            if (sw->needs_independent_drivers())
                indep = std::make_unique<PathGenerator>(grid, Matrix::identity(2), SeedPolicy{c.engine.seed}, 1);
        } else {
            fw = std::make_unique<FrozenWeights>(mg, payoff_rates(payoff), c.engine.weights);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("model", std::string("no closed-form weights: ") + e.what());
    }
    PathBundle w, z;
    for (std::size_t p = 0; p < count; ++p) {
        gen.generate(p, w);
        if (indep) indep->generate(p, z);
        const WeightSample s = sw ? (*sw)(w, indep ? &z : nullptr, true) : (*fw)(w, true);
        if (p == 0) {
            csv << "path,zeta,pi";
            for (const auto& [name, v] : s.components) csv << ',' << name;
            csv << '\n';
        }
        csv << p << ',' << num(s.zeta) << ',' << num(s.pi);
        for (const auto& [name, v] : s.components) csv << ',' << num(v);
        csv << '\n';
    }
    return kExitOk;
}

int cmd_dump_path(const std::string& path, const Overrides& o, std::uint64_t index, std::ostream& out,
                  std::ostream& err) {
    const RunConfig c = load_with(path, o);
    Sink sink(c.output, out, err);
    if (c.gaussian) {
        const ChaosFunctional fn = c.gaussian->functional();
        write_path_csv(sink.csv(), PathGenerator(fn.grid, Matrix::identity(1), SeedPolicy{c.engine.seed}).generate(index));
        return kExitOk;
    }
    const ModelSpec& m = *c.model;
    const TimeGrid grid = TimeGrid::for_horizon(payoff_horizon(c.payoffs().front(), m.tenor), c.engine.steps_per_year,
                                                c.engine.min_steps);
    const Matrix rho = resolve_correlation(m.corr, m.total_drivers());
    write_path_csv(sink.csv(), PathGenerator(grid, rho, SeedPolicy{c.engine.seed}).generate(index));
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo pricing with strong and weak Taylor approximations in LIBOR market models", "lmmtaylor"};
    app.require_subcommand(1);
    Overrides o;
    std::string config;
    int table = 0;
    std::optional<std::string> kind, eps;
    std::size_t count = 8;
    std::uint64_t index = 0;

    auto* price = app.add_subcommand("price", "Price every method and strike of a config");
    price->add_option("config", config, "YAML config")->required();
    o.add_to(price);
    auto* reproduce = app.add_subcommand("reproduce", "Reproduce table 1, 2 or 3 with pass/fail per cell");
    reproduce->add_option("table", table, "Table id")->required();
    o.add_to(reproduce);
    auto* study = app.add_subcommand("study", "Strong or weak remainder against eps");
    study->add_option("config", config, "YAML config")->required();
    study->add_option("--kind", kind, "strong or weak");
    study->add_option("--eps", eps, "Comma-separated decreasing eps values");
    o.add_to(study);
    auto* dump = app.add_subcommand("dump-weights", "Per-path Malliavin weights and their building blocks");
    dump->add_option("config", config, "YAML config")->required();
    dump->add_option("--count", count, "Number of paths");
    o.add_to(dump);
    auto* dump_path = app.add_subcommand("dump-path", "Brownian drivers of one path");
    dump_path->add_option("config", config, "YAML config")->required();
    dump_path->add_option("--index", index, "Path index");
    o.add_to(dump_path);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        if (*price) return cmd_price(config, o, out, err);
        if (*reproduce) return cmd_reproduce(table, o, out, err);
        if (*study) return cmd_study(config, o, kind, eps, out, err);
        if (*dump) return cmd_dump_weights(config, o, count, out, err);
        if (*dump_path) return cmd_dump_path(config, o, index, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::out_of_range& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumericError;
    }
    return kExitConfigError;
}

}  // namespace lmmtaylor
