#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gapprobe/metrics.hpp"

namespace gapprobe::report {

std::string to_text(const metrics::AggregateReport& r);
std::string to_text(const metrics::ComparisonReport& c);

/// Machine-readable records: one JSON object per line, tagged with "type"
/// ("aggregate" or "comparison").
nlohmann::json to_record(const metrics::AggregateReport& r);
nlohmann::json to_record(const metrics::ComparisonReport& c);
metrics::AggregateReport aggregate_from_record(const nlohmann::json& j);

/// Reads every "aggregate" record of a JSON-lines report file.
std::vector<metrics::AggregateReport> read_aggregates(std::string_view jsonl);

/// Grouped bar chart: per dataset, Delta(+filler) accuracy and DiD accuracy
/// with Wilson interval error bars. Reports with n_items == 0 are skipped;
/// throws NoReports when none remain.
std::string render_svg(const std::vector<metrics::AggregateReport>& reports);

}  // namespace gapprobe::report
