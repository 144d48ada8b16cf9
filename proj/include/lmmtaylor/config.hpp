#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lmmtaylor/chaos.hpp"
#include "lmmtaylor/engine.hpp"
#include "lmmtaylor/models.hpp"
#include "lmmtaylor/payoffs.hpp"

namespace lmmtaylor {

enum class StudyKind { Strong, Weak };

struct StudySpec {
    StudyKind kind = StudyKind::Strong;
    std::vector<double> eps;
    std::optional<double> horizon;  // strong studies; defaults to the first fixing date
    std::optional<ScalarPayoff> payoff;  // Gaussian demo weak studies; defaults to the demo payoff

    bool operator==(const StudySpec&) const = default;
};

/// One-dimensional Gaussian demo: F_eps = F^0 + eps F^1 + eps^2/2 F^2, F^0 = int h dW.
struct GaussianDemoSpec {
    double horizon = 1.0;
    std::size_t steps = 64;
    double kernel = 1.0;  // constant h
    Polynomial f1, f2;    // ascending coefficients in F^0
    ScalarPayoff payoff;
    SecondOrderForm form = SecondOrderForm::Full;
    double eps = 0.25;  // used by `price`

    ChaosFunctional functional() const;
    bool operator==(const GaussianDemoSpec&) const = default;
};

/// A validated run: either a rate model with payoff and methods, or the Gaussian demo.
struct RunConfig {
    std::string name = "run";
    std::optional<ModelSpec> model;
    std::optional<PayoffSpec> payoff;  // strike overridden per entry of `strikes`
    std::vector<double> strikes;
    std::vector<MethodSpec> methods;
    EngineSettings engine;
    std::optional<StudySpec> study;
    std::optional<GaussianDemoSpec> gaussian;
    std::string output;  // CSV path; empty for standard output

    std::vector<PayoffSpec> payoffs() const;
    bool operator==(const RunConfig&) const = default;
};

/// Parses YAML text. Errors are ConfigError naming the offending field, e.g. `payoff.strike`.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

/// Checks cross-field consistency; called by parse_config.
void validate_config(const RunConfig& config);

/// Config equivalent to the built-in definition of table 1, 2 or 3.
RunConfig table_config(int id);

}  // namespace lmmtaylor
