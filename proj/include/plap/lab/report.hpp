#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "plap/lab/sweep.hpp"

namespace plap::lab {

/// Column order of results.csv; the first thirteen match the functional row schema.
const std::vector<std::string>& csv_columns();

std::string to_csv(const SweepReport& report);
nlohmann::json to_json(const SweepReport& report);
/// Fixed-width plain-text table, one line per row.
std::string summary_table(const SweepReport& report);

/// Inverse of to_csv / to_json (warnings are not part of the CSV).
std::vector<Row> rows_from_csv(std::string_view text);
std::vector<Row> rows_from_json(const nlohmann::json& j);

struct ReportFormats {
    bool csv = true;
    bool json = true;
};

/// Writes results.csv, results.json and summary.txt into dir (created if
/// needed). Throws IoError when the directory cannot be created or written.
void write_report(const SweepReport& report, const std::string& dir, ReportFormats formats);

} // namespace plap::lab
