#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lmmtaylor/engine.hpp"

namespace lmmtaylor {

struct PublishedRow {
    MethodSpec method;
    std::vector<double> values_bps;  // one per strike
};

struct TableDefinition {
    int id = 0;
    std::string name;  // "table1", ...
    ModelSpec model;
    PayoffSpec payoff;  // strike replaced per column
    std::vector<double> strikes;
    std::vector<PublishedRow> published;

    std::vector<PayoffSpec> payoffs() const;
    std::vector<MethodSpec> methods() const;
};

/// Parameters and published values of tables 1-3. Throws std::out_of_range otherwise.
TableDefinition table_definition(int id);

struct ReportRow {
    std::string table;
    double strike = 0.0;
    std::string method;
    double mean_bps = 0.0;
    double stderr_bps = 0.0;
    std::optional<double> published_bps;
    std::string pass;  // "pass", "fail" or "n/a"
};

struct CriterionCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct TableReport {
    int id = 0;
    std::vector<ReportRow> rows;
    std::vector<CriterionCheck> checks;
    std::vector<std::string> notes;
    std::size_t paths = 0;
    double elapsed = 0.0;

    bool passed() const;
};

/// CSV with header table,strike,method,mean_bps,stderr_bps,published_bps,pass.
/// Numbers use the shortest representation that round-trips; a missing
/// published value is an empty field.
void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

/// Prices every method and strike of a table on common paths and applies the
/// reproduction tolerances.
TableReport reproduce_table(int id, const EngineSettings& settings);
/// Same, for an already resolved (possibly user-modified) definition.
TableReport reproduce_table(const TableDefinition& table, const EngineSettings& settings);

}  // namespace lmmtaylor
