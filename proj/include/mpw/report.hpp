#pragma once

// Serialization of experiment and condition-check reports.

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "mpw/distributions.hpp"
#include "mpw/limit_lab.hpp"

namespace mpw {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

/// Everything except the runtime, so equal inputs give equal bytes.
Json to_json(const ExperimentReport& report);
Json to_json(const Main2ConditionReport& report);

void write_report_text(std::ostream& out, const ExperimentReport& report);
void write_conditions_text(std::ostream& out, const Main2ConditionReport& report,
                           const StepLaw& xi);

/// Columns: statistic,p,u,x,empirical_cdf,oracle_cdf
void write_plot_csv(std::ostream& out, const ExperimentReport& report);

/// Columns: replica,<one per recorded statistic>
void write_replica_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace mpw
