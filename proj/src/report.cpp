#include "harris/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace harris {

double ConvergenceReport::summary_value(const std::string& key) const {
    for (const auto& [k, v] : summary)
        if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

std::size_t ConvergenceReport::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::out_of_range("report has no column '" + name + "'");
}

namespace {

bool same_number(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

nlohmann::ordered_json number_json(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

double json_number(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("report: bad number '" + s + "'");
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

bool operator==(const ConvergenceReport& a, const ConvergenceReport& b) {
    if (a.experiment != b.experiment || a.config_hash != b.config_hash || a.seed != b.seed ||
        a.columns != b.columns || a.notes != b.notes || a.rows.size() != b.rows.size() ||
        a.summary.size() != b.summary.size())
        return false;
    for (std::size_t i = 0; i < a.summary.size(); ++i)
        if (a.summary[i].first != b.summary[i].first || !same_number(a.summary[i].second, b.summary[i].second))
            return false;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        if (a.rows[r].size() != b.rows[r].size()) return false;
        for (std::size_t c = 0; c < a.rows[r].size(); ++c)
            if (!same_number(a.rows[r][c], b.rows[r][c])) return false;
    }
    return true;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const ConvergenceReport& report, std::ostream& out) {
    out << "# experiment=" << report.experiment << '\n';
    out << "# config_hash=" << hex64(report.config_hash) << '\n';
    out << "# seed=" << report.seed << '\n';
    for (const auto& [k, v] : report.summary) out << "# " << k << '=' << format_number(v) << '\n';
    for (const auto& [k, v] : report.notes) out << "# " << k << '=' << v << '\n';
    for (std::size_t i = 0; i < report.columns.size(); ++i) out << (i ? "," : "") << report.columns[i];
    out << '\n';
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
}

std::string to_json_text(const ConvergenceReport& report) {
    nlohmann::ordered_json j;
    j["experiment"] = report.experiment;
    j["config_hash"] = hex64(report.config_hash);
    j["seed"] = report.seed;
    j["columns"] = report.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        auto r = nlohmann::ordered_json::array();
        for (double v : row) r.push_back(number_json(v));
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    auto summary = nlohmann::ordered_json::array();
    for (const auto& [k, v] : report.summary) summary.push_back({k, number_json(v)});
    j["summary"] = std::move(summary);
    auto notes = nlohmann::ordered_json::array();
    for (const auto& [k, v] : report.notes) notes.push_back({k, v});
    j["notes"] = std::move(notes);
    return j.dump(2) + "\n";
}

ConvergenceReport report_from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ConvergenceReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    r.seed = j.at("seed").get<std::uint64_t>();
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
        std::vector<double> v;
        for (const auto& x : row) v.push_back(json_number(x));
        r.rows.push_back(std::move(v));
    }
    for (const auto& kv : j.at("summary")) r.summary.emplace_back(kv.at(0).get<std::string>(), json_number(kv.at(1)));
    for (const auto& kv : j.at("notes")) r.notes.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    return r;
}

void emit_report(const ConvergenceReport& report, const std::string& format, const std::string& path) {
    std::ostringstream os;
    if (format == "csv") write_csv(report, os);
    else if (format == "json") os << to_json_text(report);
    else throw std::invalid_argument("emit_report: format must be csv or json");
    if (path.empty()) {
        std::cout << os.str();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << os.str();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void write_paths_csv(const PathRecord& record, std::ostream& out) {
    out << "time";
    for (std::size_t l = 0; l < record.num_labels; ++l) out << ",x" << l;
    out << '\n';
    for (std::size_t r = 0; r < record.num_rows(); ++r) {
        out << format_number(record.times[r]);
        for (std::size_t l = 0; l < record.num_labels; ++l) out << ',' << format_number(record.value(r, l));
        out << '\n';
    }
}

void write_split_csv(const SplitPaths& paths, std::ostream& out) {
    out << "time";
    for (std::size_t l = 0; l < paths.num_labels; ++l) out << ",u" << l << ",y" << l;
    out << '\n';
    for (std::size_t r = 0; r < paths.num_rows(); ++r) {
        out << format_number(paths.times[r]);
        for (std::size_t l = 0; l < paths.num_labels; ++l)
            out << ',' << format_number(paths.u(r, l)) << ',' << format_number(paths.y(r, l));
        out << '\n';
    }
}

std::string merges_json(const std::vector<MergeEvent>& events) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& e : events) {
        nlohmann::ordered_json ev;
        ev["time"] = e.time;
        ev["labels"] = e.labels;
        j.push_back(std::move(ev));
    }
    return j.dump(2) + "\n";
}

void write_bundle_csv(const TrajectoryBundle& bundle, std::ostream& out) {
    out << "# reversed=" << (bundle.reversed ? "true" : "false") << '\n';
    out << "# starts=";
    for (std::size_t j = 0; j < bundle.num_paths(); ++j)
        out << (j ? ";" : "") << format_number(bundle.starts[j].s) << ':' << format_number(bundle.starts[j].x);
    out << '\n' << "time";
    for (std::size_t j = 0; j < bundle.num_paths(); ++j) out << ",p" << j;
    out << '\n';
    for (std::size_t k = 0; k < bundle.num_times(); ++k) {
        out << format_number(bundle.times[k]);
        for (std::size_t j = 0; j < bundle.num_paths(); ++j) out << ',' << format_number(bundle.value(j, k));
        out << '\n';
    }
}

}  // namespace harris
