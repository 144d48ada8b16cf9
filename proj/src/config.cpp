#include "lmmtaylor/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "lmmtaylor/error.hpp"
#include "lmmtaylor/tables.hpp"

namespace lmmtaylor {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) throw ConfigError(path, "expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError(join(path, key), "unknown field");
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& path, const char* expected) {
    if (!node.IsScalar()) throw ConfigError(path, std::string("expected ") + expected);
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(path, std::string("expected ") + expected);
    }
}

YAML::Node child(const YAML::Node& node, const char* key) { return node[key]; }

YAML::Node required(const YAML::Node& node, const std::string& path, const char* key) {
    YAML::Node c = child(node, key);
    if (!c) throw ConfigError(join(path, key), "missing");
    return c;
}

double get_double(const YAML::Node& node, const std::string& path, const char* key) {
    return scalar<double>(required(node, path, key), join(path, key), "a number");
}

template <typename T>
T get_or(const YAML::Node& node, const std::string& path, const char* key, T fallback, const char* expected) {
    YAML::Node c = child(node, key);
    return c ? scalar<T>(c, join(path, key), expected) : fallback;
}

std::vector<double> number_list(const YAML::Node& node, const std::string& path) {
    if (node.IsScalar()) return {scalar<double>(node, path, "a number")};
    if (!node.IsSequence()) throw ConfigError(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i)
        out.push_back(scalar<double>(node[i], path + "[" + std::to_string(i) + "]", "a number"));
    return out;
}

std::string get_string(const YAML::Node& node, const std::string& path, const char* key) {
    return scalar<std::string>(required(node, path, key), join(path, key), "a string");
}

VolatilitySpec parse_vol(const YAML::Node& n, const std::string& path) {
    const std::string type = get_string(n, path, "type");
    if (type == "zero") {
        check_keys(n, path, {"type"});
        return ZeroVol{};
    }
    if (type == "constant") {
        check_keys(n, path, {"type", "sigma"});
        return ConstantVol{number_list(required(n, path, "sigma"), join(path, "sigma"))};
    }
    if (type == "abcd") {
        check_keys(n, path, {"type", "a", "b", "d", "e"});
        return AbcdVol{get_double(n, path, "a"), get_double(n, path, "b"), get_double(n, path, "d"),
                       get_double(n, path, "e")};
    }
    throw ConfigError(join(path, "type"), "expected zero, constant or abcd");
}

CorrelationSpec parse_corr(const YAML::Node& n, const std::string& path) {
    const std::string type = get_string(n, path, "type");
    if (type == "exp_decay") {
        check_keys(n, path, {"type", "floor", "rate"});
        return ExpDecayCorrelation{get_double(n, path, "floor"), get_double(n, path, "rate")};
    }
    if (type == "explicit") {
        check_keys(n, path, {"type", "matrix"});
        const std::string mpath = join(path, "matrix");
        const YAML::Node m = required(n, path, "matrix");
        if (!m.IsSequence() || m.size() == 0) throw ConfigError(mpath, "expected a list of rows");
        Matrix out(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const auto row = number_list(m[i], mpath + "[" + std::to_string(i) + "]");
            if (row.size() != m.size()) throw ConfigError(mpath, "matrix must be square");
            for (std::size_t j = 0; j < row.size(); ++j) out(i, j) = row[j];
        }
        return ExplicitCorrelation{out};
    }
    if (type == "sv") {
        check_keys(n, path, {"type", "rho12", "rho1", "rho2"});
        return SvCorrelation{get_double(n, path, "rho12"), get_double(n, path, "rho1"), get_double(n, path, "rho2")};
    }
    throw ConfigError(join(path, "type"), "expected exp_decay, explicit or sv");
}

ModelSpec parse_model(const YAML::Node& n) {
    const std::string path = "model";
    check_keys(n, path,
               {"units", "tenor", "initial_rates", "spot_rate", "vol", "correlation", "drivers", "eps1", "eps2", "cir",
                "discount"});
    ModelSpec m;
    const std::string units = get_or<std::string>(n, path, "units", "decimal", "a string");
    if (units == "percent")
        m.units = RateUnits::Percent;
    else if (units != "decimal")
        throw ConfigError("model.units", "expected decimal or percent");

    const YAML::Node tenor = required(n, path, "tenor");
    check_keys(tenor, "model.tenor", {"first_fixing", "accrual", "rates"});
    m.tenor.accrual = get_double(tenor, "model.tenor", "accrual");
    m.tenor.first_fixing = get_or<double>(tenor, "model.tenor", "first_fixing", m.tenor.accrual, "a number");
    m.tenor.num_rates = scalar<int>(required(tenor, "model.tenor", "rates"), "model.tenor.rates", "an integer");

    m.initial_rates = number_list(required(n, path, "initial_rates"), "model.initial_rates");
    if (const auto s = child(n, "spot_rate")) m.spot_rate = scalar<double>(s, "model.spot_rate", "a number");
    m.vol = parse_vol(required(n, path, "vol"), "model.vol");
    m.corr = parse_corr(required(n, path, "correlation"), "model.correlation");
    if (const auto d = child(n, "drivers")) {
        if (!d.IsSequence()) throw ConfigError("model.drivers", "expected a list of driver numbers");
        for (std::size_t i = 0; i < d.size(); ++i)
            m.rate_driver.push_back(scalar<int>(d[i], "model.drivers[" + std::to_string(i) + "]", "an integer") - 1);
    }
    m.eps1 = get_or<double>(n, path, "eps1", 1.0, "a number");
    m.eps2 = get_or<double>(n, path, "eps2", 0.0, "a number");
    if (!(m.eps1 >= 0.0)) throw ConfigError("model.eps1", "must be non-negative");
    if (!(m.eps2 >= 0.0)) throw ConfigError("model.eps2", "must be non-negative");
    if (const auto c = child(n, "cir")) {
        check_keys(c, "model.cir", {"kappa", "theta", "v0"});
        m.cir = CirSpec{get_double(c, "model.cir", "kappa"), get_double(c, "model.cir", "theta"),
                        get_double(c, "model.cir", "v0")};
    }
    if (const auto d = child(n, "discount")) {
        const std::string type = get_string(d, "model.discount", "type");
        if (type == "fixed") {
            check_keys(d, "model.discount", {"type", "terminal_bond"});
            m.discount = {DiscountConvention::Kind::Fixed,
                          get_or<double>(d, "model.discount", "terminal_bond", 1.0, "a number")};
        } else if (type == "forward_product") {
            check_keys(d, "model.discount", {"type"});
            m.discount = {DiscountConvention::Kind::ForwardProduct, 1.0};
        } else {
            throw ConfigError("model.discount.type", "expected fixed or forward_product");
        }
    }
    return m;
}

PayoffSpec parse_payoff(const YAML::Node& n, std::vector<double>& strikes) {
    const std::string path = "payoff";
    const std::string type = get_string(n, path, "type");
    const YAML::Node k = child(n, "strike");
    if (!k) throw ConfigError("payoff.strike", "missing");
    strikes = number_list(k, "payoff.strike");
    if (strikes.empty()) throw ConfigError("payoff.strike", "at least one strike is required");
    if (type == "caplet") {
        check_keys(n, path, {"type", "rate", "strike"});
        return Caplet{scalar<int>(required(n, path, "rate"), "payoff.rate", "an integer") - 1, strikes.front()};
    }
    if (type == "swaption") {
        check_keys(n, path, {"type", "entry", "last", "strike"});
        return PayerSwaption{scalar<int>(required(n, path, "entry"), "payoff.entry", "an integer") - 1,
                             scalar<int>(required(n, path, "last"), "payoff.last", "an integer") - 1, strikes.front()};
    }
    throw ConfigError("payoff.type", "expected caplet or swaption");
}

EngineSettings parse_engine(const YAML::Node& n) {
    const std::string path = "engine";
    check_keys(n, path, {"paths", "steps_per_year", "min_steps", "seed", "antithetic", "workers", "weights", "batch_pairs"});
    EngineSettings e;
    e.paths = get_or<std::size_t>(n, path, "paths", e.paths, "a positive integer");
    e.steps_per_year = get_or<double>(n, path, "steps_per_year", e.steps_per_year, "a number");
    e.min_steps = get_or<std::size_t>(n, path, "min_steps", e.min_steps, "a positive integer");
    e.seed = get_or<std::uint64_t>(n, path, "seed", e.seed, "an unsigned integer");
    e.antithetic = get_or<bool>(n, path, "antithetic", e.antithetic, "true or false");
    e.workers = get_or<unsigned>(n, path, "workers", e.workers, "a non-negative integer");
    e.batch_pairs = get_or<std::size_t>(n, path, "batch_pairs", e.batch_pairs, "a positive integer");
    const std::string w = get_or<std::string>(n, path, "weights", "derived", "a string");
    if (w == "literal")
        e.weights = WeightForm::Literal;
    else if (w != "derived")
        throw ConfigError("engine.weights", "expected derived or literal");
    return e;
}

ScalarPayoff parse_scalar_payoff(const YAML::Node& n, const std::string& path) {
    check_keys(n, path, {"type", "level"});
    const std::string type = get_string(n, path, "type");
    ScalarPayoff p;
    p.level = get_or<double>(n, path, "level", 0.0, "a number");
    if (type == "digital") p.kind = ScalarPayoff::Kind::Digital;
    else if (type == "call") p.kind = ScalarPayoff::Kind::Call;
    else if (type == "identity") p.kind = ScalarPayoff::Kind::Identity;
    else if (type == "cosine") p.kind = ScalarPayoff::Kind::Cosine;
    else if (type == "constant") p.kind = ScalarPayoff::Kind::Constant;
    else throw ConfigError(join(path, "type"), "expected digital, call, identity, cosine or constant");
    return p;
}

GaussianDemoSpec parse_gaussian(const YAML::Node& n) {
    const std::string path = "gaussian";
    check_keys(n, path, {"horizon", "steps", "kernel", "f1", "f2", "payoff", "second_order", "eps"});
    GaussianDemoSpec g;
    g.horizon = get_or<double>(n, path, "horizon", g.horizon, "a number");
    g.steps = get_or<std::size_t>(n, path, "steps", g.steps, "a positive integer");
    g.kernel = get_or<double>(n, path, "kernel", g.kernel, "a number");
    g.eps = get_or<double>(n, path, "eps", g.eps, "a number");
    g.f1 = Polynomial(number_list(required(n, path, "f1"), "gaussian.f1"));
    if (const auto f2 = child(n, "f2")) g.f2 = Polynomial(number_list(f2, "gaussian.f2"));
    g.payoff = parse_scalar_payoff(required(n, path, "payoff"), "gaussian.payoff");
    const std::string form = get_or<std::string>(n, path, "second_order", "full", "a string");
    if (form == "short")
        g.form = SecondOrderForm::Short;
    else if (form != "full")
        throw ConfigError("gaussian.second_order", "expected full or short");
    return g;
}

StudySpec parse_study(const YAML::Node& n) {
    check_keys(n, "study", {"kind", "eps", "horizon", "payoff"});
    StudySpec s;
    const std::string kind = get_string(n, "study", "kind");
    if (kind == "weak")
        s.kind = StudyKind::Weak;
    else if (kind != "strong")
        throw ConfigError("study.kind", "expected strong or weak");
    s.eps = number_list(required(n, "study", "eps"), "study.eps");
    if (const auto h = child(n, "horizon")) s.horizon = scalar<double>(h, "study.horizon", "a number");
    if (const auto p = child(n, "payoff")) s.payoff = parse_scalar_payoff(p, "study.payoff");
    return s;
}

// Shortest decimal that parses back to the same double.
std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << num(x);
    out << YAML::EndSeq;
}

const char* method_key(const MethodSpec& m) {
    switch (m.method) {
        case Method::Benchmark: return "benchmark";
        case Method::Frozen: return "frozen";
        case Method::StrongTaylor: return m.order == 0 ? "strong_taylor_0" : "strong_taylor";
        case Method::WeakTaylor: return "weak_taylor";
    }
    return "";
}

const char* scalar_payoff_key(ScalarPayoff::Kind k) {
    switch (k) {
        case ScalarPayoff::Kind::Digital: return "digital";
        case ScalarPayoff::Kind::Call: return "call";
        case ScalarPayoff::Kind::Identity: return "identity";
        case ScalarPayoff::Kind::Cosine: return "cosine";
        case ScalarPayoff::Kind::Constant: return "constant";
    }
    return "";
}

void emit_scalar_payoff(YAML::Emitter& out, const char* key, const ScalarPayoff& p) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "type" << YAML::Value
        << scalar_payoff_key(p.kind) << YAML::Key << "level" << YAML::Value << num(p.level) << YAML::EndMap;
}

void emit_model(YAML::Emitter& out, const ModelSpec& m) {
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "units" << YAML::Value << (m.units == RateUnits::Percent ? "percent" : "decimal");
    out << YAML::Key << "tenor" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "first_fixing"
        << YAML::Value << num(m.tenor.first_fixing) << YAML::Key << "accrual" << YAML::Value << num(m.tenor.accrual)
        << YAML::Key << "rates" << YAML::Value << m.tenor.num_rates << YAML::EndMap;
    out << YAML::Key << "initial_rates" << YAML::Value;
    emit_list(out, m.initial_rates);
    if (m.spot_rate) out << YAML::Key << "spot_rate" << YAML::Value << num(*m.spot_rate);

    out << YAML::Key << "vol" << YAML::Value << YAML::Flow << YAML::BeginMap;
    if (const auto* c = std::get_if<ConstantVol>(&m.vol)) {
        out << YAML::Key << "type" << YAML::Value << "constant" << YAML::Key << "sigma" << YAML::Value;
        emit_list(out, c->sigma);
    } else if (const auto* a = std::get_if<AbcdVol>(&m.vol)) {
        out << YAML::Key << "type" << YAML::Value << "abcd" << YAML::Key << "a" << YAML::Value << num(a->a) << YAML::Key
            << "b" << YAML::Value << num(a->b) << YAML::Key << "d" << YAML::Value << num(a->d) << YAML::Key << "e"
            << YAML::Value << num(a->e);
    } else {
        out << YAML::Key << "type" << YAML::Value << "zero";
    }
    out << YAML::EndMap;

    out << YAML::Key << "correlation" << YAML::Value << YAML::BeginMap;
    if (const auto* e = std::get_if<ExpDecayCorrelation>(&m.corr)) {
        out << YAML::Key << "type" << YAML::Value << "exp_decay" << YAML::Key << "floor" << YAML::Value << num(e->floor)
            << YAML::Key << "rate" << YAML::Value << num(e->rate);
    } else if (const auto* x = std::get_if<ExplicitCorrelation>(&m.corr)) {
        out << YAML::Key << "type" << YAML::Value << "explicit" << YAML::Key << "matrix" << YAML::Value << YAML::BeginSeq;
        for (std::size_t i = 0; i < x->matrix.n; ++i)
            emit_list(out, std::vector<double>(x->matrix.data.begin() + static_cast<std::ptrdiff_t>(i * x->matrix.n),
                                               x->matrix.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * x->matrix.n)));
        out << YAML::EndSeq;
    } else {
        const auto& s = std::get<SvCorrelation>(m.corr);
        out << YAML::Key << "type" << YAML::Value << "sv" << YAML::Key << "rho12" << YAML::Value << num(s.rho12)
            << YAML::Key << "rho1" << YAML::Value << num(s.rho1) << YAML::Key << "rho2" << YAML::Value << num(s.rho2);
    }
    out << YAML::EndMap;

    if (!m.rate_driver.empty()) {
        out << YAML::Key << "drivers" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (int d : m.rate_driver) out << d + 1;
        out << YAML::EndSeq;
    }
    out << YAML::Key << "eps1" << YAML::Value << num(m.eps1);
    out << YAML::Key << "eps2" << YAML::Value << num(m.eps2);
    if (m.cir)
        out << YAML::Key << "cir" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "kappa" << YAML::Value
            << num(m.cir->kappa) << YAML::Key << "theta" << YAML::Value << num(m.cir->theta) << YAML::Key << "v0"
            << YAML::Value << num(m.cir->v0) << YAML::EndMap;
    out << YAML::Key << "discount" << YAML::Value << YAML::Flow << YAML::BeginMap;
    if (m.discount.kind == DiscountConvention::Kind::Fixed)
        out << YAML::Key << "type" << YAML::Value << "fixed" << YAML::Key << "terminal_bond" << YAML::Value
            << num(m.discount.terminal_bond);
    else
        out << YAML::Key << "type" << YAML::Value << "forward_product";
    out << YAML::EndMap;
    out << YAML::EndMap;
}

}  // namespace

ChaosFunctional GaussianDemoSpec::functional() const {
    return ChaosFunctional::constant_kernel(horizon, steps, kernel, f1, f2);
}

std::vector<PayoffSpec> RunConfig::payoffs() const {
    std::vector<PayoffSpec> out;
    if (payoff)
        for (double k : strikes) out.push_back(with_strike(*payoff, k));
    return out;
}

void validate_config(const RunConfig& c) {
    if (c.model.has_value() == c.gaussian.has_value())
        throw ConfigError("model", "exactly one of model and gaussian must be given");
    if (c.engine.paths < 1) throw ConfigError("engine.paths", "must be positive");
    if (c.engine.batch_pairs < 1) throw ConfigError("engine.batch_pairs", "must be positive");
    if (!(c.engine.steps_per_year > 0.0)) throw ConfigError("engine.steps_per_year", "must be positive");
    if (c.study) {
        if (c.study->eps.size() < 3) throw ConfigError("study.eps", "need at least three eps values");
        for (std::size_t i = 0; i < c.study->eps.size(); ++i) {
            if (!(c.study->eps[i] > 0.0)) throw ConfigError("study.eps", "eps values must be positive");
            if (i > 0 && !(c.study->eps[i] < c.study->eps[i - 1])) throw ConfigError("study.eps", "eps values must decrease");
        }
        if (c.study->horizon && !(*c.study->horizon > 0.0)) throw ConfigError("study.horizon", "must be positive");
    }
    if (c.gaussian) {
        if (c.gaussian->steps < 1) throw ConfigError("gaussian.steps", "must be positive");
        if (!(c.gaussian->horizon > 0.0)) throw ConfigError("gaussian.horizon", "must be positive");
        if (!(c.gaussian->eps >= 0.0)) throw ConfigError("gaussian.eps", "must be non-negative");
        if (c.gaussian->kernel == 0.0) throw ConfigError("gaussian.kernel", "degenerate kernel: int h^2 ds = 0");
        if (c.study && c.study->kind == StudyKind::Strong)
            throw ConfigError("study.kind", "the Gaussian demo supports weak studies only");
        return;
    }
    c.model->validate();
    if (!c.payoff) throw ConfigError("payoff", "missing");
    if (c.strikes.empty()) throw ConfigError("payoff.strike", "at least one strike is required");
    for (const auto& p : c.payoffs()) validate_payoff(p, c.model->tenor);
    if (c.methods.empty()) throw ConfigError("methods", "at least one method is required");
    if (c.model->stochastic_vol())
        for (const auto& m : c.methods)
            if (m.method == Method::StrongTaylor)
                throw ConfigError("methods", "strong_taylor is defined for deterministic volatility only");
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", std::string("malformed YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("", "expected a mapping at the top level");
    check_keys(root, "", {"name", "model", "payoff", "methods", "engine", "study", "gaussian", "output"});
    RunConfig c;
    c.name = get_or<std::string>(root, "", "name", c.name, "a string");
    c.output = get_or<std::string>(root, "", "output", "", "a string");
    if (const auto m = root["model"]) c.model = parse_model(m);
    if (const auto p = root["payoff"]) c.payoff = parse_payoff(p, c.strikes);
    if (const auto m = root["methods"]) {
        if (!m.IsSequence()) throw ConfigError("methods", "expected a list");
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string path = "methods[" + std::to_string(i) + "]";
            const auto label = scalar<std::string>(m[i], path, "a method name");
            const auto spec = parse_method(label);
            if (!spec) throw ConfigError(path, "unknown method '" + label + "'");
            c.methods.push_back(*spec);
        }
    }
    if (const auto e = root["engine"]) c.engine = parse_engine(e);
    if (const auto s = root["study"]) c.study = parse_study(s);
    if (const auto g = root["gaussian"]) c.gaussian = parse_gaussian(g);
    validate_config(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << c.name;
    if (c.model) emit_model(out, *c.model);
    if (c.payoff) {
        out << YAML::Key << "payoff" << YAML::Value << YAML::BeginMap;
        if (const auto* cap = std::get_if<Caplet>(&*c.payoff)) {
            out << YAML::Key << "type" << YAML::Value << "caplet" << YAML::Key << "rate" << YAML::Value << cap->rate + 1;
        } else {
            const auto& s = std::get<PayerSwaption>(*c.payoff);
            out << YAML::Key << "type" << YAML::Value << "swaption" << YAML::Key << "entry" << YAML::Value << s.entry + 1
                << YAML::Key << "last" << YAML::Value << s.last + 1;
        }
        out << YAML::Key << "strike" << YAML::Value;
        emit_list(out, c.strikes);
        out << YAML::EndMap;
    }
    if (!c.methods.empty()) {
        out << YAML::Key << "methods" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& m : c.methods) out << method_key(m);
        out << YAML::EndSeq;
    }
    const EngineSettings& e = c.engine;
    out << YAML::Key << "engine" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "paths" << YAML::Value << e.paths;
    out << YAML::Key << "steps_per_year" << YAML::Value << num(e.steps_per_year);
    out << YAML::Key << "min_steps" << YAML::Value << e.min_steps;
    out << YAML::Key << "seed" << YAML::Value << e.seed;
    out << YAML::Key << "antithetic" << YAML::Value << e.antithetic;
    out << YAML::Key << "workers" << YAML::Value << e.workers;
    out << YAML::Key << "weights" << YAML::Value << (e.weights == WeightForm::Literal ? "literal" : "derived");
    out << YAML::Key << "batch_pairs" << YAML::Value << e.batch_pairs;
    out << YAML::EndMap;
    if (c.study) {
        out << YAML::Key << "study" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << (c.study->kind == StudyKind::Weak ? "weak" : "strong");
        out << YAML::Key << "eps" << YAML::Value;
        emit_list(out, c.study->eps);
        if (c.study->horizon) out << YAML::Key << "horizon" << YAML::Value << num(*c.study->horizon);
        if (c.study->payoff) emit_scalar_payoff(out, "payoff", *c.study->payoff);
        out << YAML::EndMap;
    }
    if (c.gaussian) {
        const auto& g = *c.gaussian;
        out << YAML::Key << "gaussian" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "horizon" << YAML::Value << num(g.horizon);
        out << YAML::Key << "steps" << YAML::Value << g.steps;
        out << YAML::Key << "kernel" << YAML::Value << num(g.kernel);
        out << YAML::Key << "eps" << YAML::Value << num(g.eps);
        out << YAML::Key << "f1" << YAML::Value;
        emit_list(out, g.f1.coefficients());
        out << YAML::Key << "f2" << YAML::Value;
        emit_list(out, g.f2.coefficients());
        emit_scalar_payoff(out, "payoff", g.payoff);
        out << YAML::Key << "second_order" << YAML::Value << (g.form == SecondOrderForm::Short ? "short" : "full");
        out << YAML::EndMap;
    }
    if (!c.output.empty()) out << YAML::Key << "output" << YAML::Value << c.output;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

RunConfig table_config(int id) {
    const TableDefinition t = table_definition(id);
    RunConfig c;
    c.name = t.name;
    c.model = t.model;
    c.payoff = with_strike(t.payoff, t.strikes.front());
    c.strikes = t.strikes;
    c.methods = t.methods();
    return c;
}

}  // namespace lmmtaylor
