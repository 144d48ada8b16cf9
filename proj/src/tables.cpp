#include "lmmtaylor/tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace lmmtaylor {

namespace {

constexpr MethodSpec kBenchmark{Method::Benchmark, 1};
constexpr MethodSpec kFrozen{Method::Frozen, 0};
constexpr MethodSpec kStrong{Method::StrongTaylor, 1};
constexpr MethodSpec kWeak{Method::WeakTaylor, 1};

TableDefinition caplet_table() {
    TableDefinition t;
    t.id = 1;
    t.name = "table1";
    ModelSpec& m = t.model;
    m.units = RateUnits::Percent;
    m.tenor = {1.53151, 0.50137, 3};
    m.initial_rates = {3.86777, 3.7574, 3.8631};
    m.vol = AbcdVol{-0.113035, 0.22911, 0.113035, 0.684784};
    m.corr = ExpDecayCorrelation{0.49, 0.13};
    t.payoff = Caplet{0, 0.0};
    t.strikes = {3.0, 3.5, 4.0, 5.75, 6.25, 8.0};
    t.published = {
        {kBenchmark, {11.1831, 8.5897, 6.5503, 3.0349, 2.4423, 1.2969}},
        {kStrong, {11.0687, 8.5691, 6.5867, 3.1448, 2.5513, 1.3926}},
        {kFrozen, {13.9551, 11.1822, 8.8803, 4.6313, 3.8506, 2.2524}},
    };
    return t;
}

TableDefinition swaption_table() {
    TableDefinition t;
    t.id = 2;
    t.name = "table2";
    ModelSpec& m = t.model;
    m.units = RateUnits::Percent;
    m.tenor = {0.25, 0.25, 3};
    m.spot_rate = 5.28875;
    m.initial_rates = {5.37375, 5.40, 5.40125};
    m.vol = ConstantVol{{0.18, 0.15, 0.12}};
    // L^3 shares the second driver; W^1 and W^2 are correlated.
    m.rate_driver = {0, 1, 1};
    Matrix rho = Matrix::identity(2);
    rho(0, 1) = rho(1, 0) = 0.75;
    m.corr = ExplicitCorrelation{rho};
    m.discount = {DiscountConvention::Kind::Fixed, 1.0};
    t.payoff = PayerSwaption{0, 1, 0.0};
    t.strikes = {4.0, 4.5, 4.75, 5.0, 5.15, 5.25};
    t.published = {
        {kBenchmark, {10.2240, 6.5386, 4.7454, 3.1060, 2.2599, 1.7758}},
        {kFrozen, {10.2132, 6.5326, 4.7419, 3.1028, 2.2582, 1.7618}},
        {kStrong, {10.2240, 6.5386, 4.7454, 3.1060, 2.2599, 1.7758}},
        {kWeak, {10.2266, 6.5407, 4.7485, 3.1064, 2.2593, 1.7626}},
    };
    return t;
}

TableDefinition sv_table() {
    TableDefinition t;
    t.id = 3;
    t.name = "table3";
    ModelSpec& m = t.model;
    m.units = RateUnits::Percent;
    m.tenor = {1.5, 1.5, 2};
    m.spot_rate = 5.28875;
    m.initial_rates = {5.4, 5.39};
    m.vol = ConstantVol{{0.25, 0.15}};
    m.corr = SvCorrelation{0.63, -0.75, -0.6};
    m.eps2 = 0.25;
    m.cir = CirSpec{2.3767, 0.2143, 1.0};
    m.discount = {DiscountConvention::Kind::ForwardProduct, 1.0};
    t.payoff = PayerSwaption{0, 1, 0.0};
    t.strikes = {3.5, 4.0, 5.0, 6.0, 7.0, 8.0};
    t.published = {
        {kBenchmark, {3.8984, 2.9221, 1.2588, 0.3858, 0.1019, 0.0216}},
        {kFrozen, {3.8951, 2.9053, 1.2705, 0.3966, 0.0942, 0.0185}},
        {kWeak, {3.8990, 2.9159, 1.2694, 0.3791, 0.1042, 0.0210}},
    };
    return t;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

const char* verdict(bool ok) { return ok ? "pass" : "fail"; }

}  // namespace

std::vector<PayoffSpec> TableDefinition::payoffs() const {
    std::vector<PayoffSpec> out;
    for (double k : strikes) out.push_back(with_strike(payoff, k));
    return out;
}

std::vector<MethodSpec> TableDefinition::methods() const {
    std::vector<MethodSpec> out;
    for (const auto& r : published) out.push_back(r.method);
    return out;
}

TableDefinition table_definition(int id) {
    switch (id) {
        case 1: return caplet_table();
        case 2: return swaption_table();
        case 3: return sv_table();
        default: throw std::out_of_range("table id must be 1, 2 or 3");
    }
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
    auto num = [](double v) {
        char buf[64];
        return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    };
    os << "table,strike,method,mean_bps,stderr_bps,published_bps,pass\n";
    for (const auto& r : rows)
        os << r.table << ',' << num(r.strike) << ',' << r.method << ',' << num(r.mean_bps) << ',' << num(r.stderr_bps)
           << ',' << (r.published_bps ? num(*r.published_bps) : std::string()) << ',' << r.pass << '\n';
}

bool TableReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CriterionCheck& c) { return c.pass; });
}

TableReport reproduce_table(int id, const EngineSettings& settings) {
    return reproduce_table(table_definition(id), settings);
}

TableReport reproduce_table(const TableDefinition& table, const EngineSettings& settings) {
    const auto methods = table.methods();
    const auto estimates = price_all(table.model, table.payoffs(), methods, settings);
    const std::size_t ns = table.strikes.size();

    TableReport report;
    report.id = table.id;
    report.paths = estimates.empty() ? 0 : estimates.front().paths;
    report.elapsed = estimates.empty() ? 0.0 : estimates.front().elapsed;
    auto est = [&](const MethodSpec& m, std::size_t s) -> const PriceEstimate& {
        for (std::size_t r = 0; r < methods.size(); ++r)
            if (methods[r] == m) return estimates[r * ns + s];
        throw std::logic_error("method missing from table");
    };
    auto pub = [&](const MethodSpec& m, std::size_t s) {
        for (const auto& r : table.published)
            if (r.method == m) return r.values_bps[s];
        throw std::logic_error("method missing from table");
    };

    for (std::size_t r = 0; r < methods.size(); ++r)
        for (std::size_t s = 0; s < ns; ++s) {
            const PriceEstimate& e = estimates[r * ns + s];
            report.rows.push_back({table.name, table.strikes[s], e.label, e.mean_bps, e.stderr_bps,
                                   table.published[r].values_bps[s], "n/a"});
        }
    auto set_pass = [&](const MethodSpec& m, std::size_t s, bool ok) {
        report.rows[static_cast<std::size_t>(std::find(methods.begin(), methods.end(), m) - methods.begin()) * ns + s]
            .pass = verdict(ok);
    };
    auto within = [](double value, double target, double se, double rel) {
        return std::fabs(value - target) <= std::max(3.0 * se, rel * std::fabs(target));
    };

    if (table.id == 1) {
        bool bench_ok = true, strong_ok = true;
        for (std::size_t s = 0; s < ns; ++s) {
            const auto& b = est(kBenchmark, s);
            const bool ok = within(b.mean_bps, pub(kBenchmark, s), b.stderr_bps, 0.02);
            set_pass(kBenchmark, s, ok);
            bench_ok &= ok;
            const bool sok = std::fabs(est(kStrong, s).mean_bps - pub(kStrong, s)) <= 0.15;
            set_pass(kStrong, s, sok);
            strong_ok &= sok;
        }
        const double gap = est(kFrozen, 0).mean_bps - est(kBenchmark, 0).mean_bps;
        const double published_gap = pub(kFrozen, 0) - pub(kBenchmark, 0);
        const bool gap_ok = gap > 1.5 && std::fabs(gap - published_gap) <= 0.7;
        set_pass(kFrozen, 0, gap_ok);
        report.checks.push_back({"benchmark within max(3 se, 2%)", bench_ok, ""});
        report.checks.push_back({"frozen overshoot at first strike", gap_ok,
                                 fmt("frozen - benchmark = %.4f bps (published %.4f, need > 1.5 and within 0.7)", gap,
                                     published_gap)});
        report.checks.push_back({"strong Taylor within 0.15 bps", strong_ok, ""});
    } else if (table.id == 2) {
        bool frozen_ok = true, weak_ok = true, strong_ok = true, abs_ok = true;
        double implied = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            const auto& b = est(kBenchmark, s);
            const double pb = pub(kBenchmark, s);
            for (const MethodSpec& m : {kFrozen, kWeak}) {
                const double ratio = est(m, s).mean_bps / b.mean_bps;
                const double target = pub(m, s) / pb;
                const bool ok = std::fabs(ratio / target - 1.0) <= 0.003;
                set_pass(m, s, ok);
                (m == kFrozen ? frozen_ok : weak_ok) &= ok;
            }
            const bool sok = std::fabs(est(kStrong, s).mean_bps - b.mean_bps) <= 0.05;
            set_pass(kStrong, s, sok);
            strong_ok &= sok;
            abs_ok &= within(b.mean_bps, pb, b.stderr_bps, 0.01);
            implied += pb / b.mean_bps / static_cast<double>(ns);
        }
        report.checks.push_back({"frozen/benchmark ratios within 0.3%", frozen_ok, ""});
        report.checks.push_back({"weak/benchmark ratios within 0.3%", weak_ok, ""});
        report.checks.push_back({"strong Taylor within 0.05 bps of benchmark", strong_ok, ""});
        // The absolute level depends on an unstated discount factor; it is
        // reported, and only the discount-invariant checks above gate the table.
        report.notes.push_back(abs_ok ? "absolute benchmark level matches with P(0,T) = 1"
                                      : fmt("absolute benchmark level differs; published / computed = %.4f on average, "
                                            "the implied discount factor",
                                            implied));
    } else {
        bool bench_ok = true, base_ok = true, weak_ok = true;
        int improved = 0;
        for (std::size_t s = 0; s < ns; ++s) {
            const auto& b = est(kBenchmark, s);
            const auto& f = est(kFrozen, s);
            const auto& w = est(kWeak, s);
            const bool bok = within(b.mean_bps, pub(kBenchmark, s), b.stderr_bps, 0.03);
            const bool fok = within(f.mean_bps, pub(kFrozen, s), f.stderr_bps, 0.03);
            const bool wok = within(w.mean_bps, pub(kWeak, s), w.stderr_bps, 0.05);
            set_pass(kBenchmark, s, bok);
            set_pass(kFrozen, s, fok);
            set_pass(kWeak, s, wok);
            bench_ok &= bok;
            base_ok &= fok;
            weak_ok &= wok;
            if (std::fabs(w.mean_bps - b.mean_bps) < std::fabs(f.mean_bps - b.mean_bps)) ++improved;
        }
        report.checks.push_back({"benchmark within max(3 se, 3%)", bench_ok, ""});
        report.checks.push_back({"(0,0) model within max(3 se, 3%)", base_ok, ""});
        report.checks.push_back({"weak Taylor within max(3 se, 5%)", weak_ok, ""});
        report.checks.push_back({"weak improves on the (0,0) model in >= 4 of 6 strikes", improved >= 4,
                                 fmt("%.0f of %.0f strikes improved", improved, static_cast<double>(ns))});
    }
    return report;
}

}  // namespace lmmtaylor
