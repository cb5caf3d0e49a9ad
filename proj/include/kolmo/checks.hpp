#pragma once

// Named verification checks run from a RunConfig, their records and the
// report/CSV writers.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "kolmo/config.hpp"
#include "kolmo/lyapunov.hpp"

namespace kolmo {

/// residual: |value| <= 3 se + tolerance; upper: value <= tolerance + 3 se;
/// lower: value >= -(tolerance + 3 se); finite: value is finite.
enum class Rule { Residual, Upper, Lower, Finite };

std::string rule_name(Rule r);
bool record_passes(Rule rule, double value, double se, double tolerance);

struct CheckRecord {
    std::string check;
    std::string item;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    double value = 0.0;
    double se = 0.0;
    double tolerance = 0.0;
    Rule rule = Rule::Residual;
    bool pass = false;
};

CheckRecord make_record(std::string check, std::string item, double value, double se, double tolerance, Rule rule,
                        nlohmann::ordered_json params = nlohmann::ordered_json::object());

using CheckFn = std::function<std::vector<CheckRecord>(const RunConfig&)>;

/// Check names in registry order.
std::vector<std::string> check_names();
bool is_check(const std::string& name);
std::vector<CheckRecord> run_check(const std::string& name, const RunConfig& config);

struct Report {
    std::vector<CheckRecord> records;
    bool all_pass() const;
};

/// Runs config.checks in declaration order (all checks when empty).
Report run_checks(const RunConfig& config);

nlohmann::ordered_json report_json(const Report& report, const RunConfig& config);
/// Writes report.json and one CSV per check into config.output; returns the report path.
std::string write_report(const Report& report, const RunConfig& config);
void write_check_csv(const std::vector<CheckRecord>& records, std::ostream& out);

/// Constants printed by `describe`.
struct ConstantsTable {
    double a0 = 0.0;
    double trace = 0.0;
    double trace_truncated = 0.0;
    DriftConstants c;
};
ConstantsTable constants_table(const RunConfig& config);
void print_constants(const ConstantsTable& t, const RunConfig& config, std::ostream& out);

}  // namespace kolmo
