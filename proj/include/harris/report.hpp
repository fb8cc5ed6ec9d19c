/// @file report.hpp
/// @brief Tabular experiment reports and trajectory exports with deterministic formatting.
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "harris/bundle.hpp"
#include "harris/flow_sim.hpp"
#include "harris/splitting.hpp"

namespace harris {

/// A table of numbers plus scalar summaries and reproduction metadata.
struct ConvergenceReport {
    std::string experiment;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> summary;
    std::vector<std::pair<std::string, std::string>> notes;

    void add_summary(const std::string& key, double value) { summary.emplace_back(key, value); }
    /// NaN when absent.
    double summary_value(const std::string& key) const;
    /// Index of a column; throws std::out_of_range when absent.
    std::size_t column(const std::string& name) const;
};

bool operator==(const ConvergenceReport& a, const ConvergenceReport& b);

/// %.17g, with "nan", "inf" and "-inf" spelled out.
std::string format_number(double v);

/// CSV: "# key=value" lines for metadata, summary and notes, then a header row and data rows.
void write_csv(const ConvergenceReport& report, std::ostream& out);
std::string to_json_text(const ConvergenceReport& report);
ConvergenceReport report_from_json_text(const std::string& text);

/// Writes to `path` in the given format ("csv" or "json"); an empty path writes to stdout.
void emit_report(const ConvergenceReport& report, const std::string& format, const std::string& path);

/// time, then one column per label.
void write_paths_csv(const PathRecord& record, std::ostream& out);
/// time, then u_i and y_i per label.
void write_split_csv(const SplitPaths& paths, std::ostream& out);
/// JSON array of {"time": t, "labels": [...]}.
std::string merges_json(const std::vector<MergeEvent>& events);
/// "# reversed=true|false" and a "# starts=" line, then time and one column per path.
void write_bundle_csv(const TrajectoryBundle& bundle, std::ostream& out);

}  // namespace harris
