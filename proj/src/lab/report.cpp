#include "plap/lab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "plap/error.hpp"
#include "plap/field_io.hpp"
#include "plap/lab/config.hpp"

namespace plap::lab {

namespace {

using OptField = std::optional<double> Row::*;

const std::vector<std::pair<std::string, OptField>>& optional_columns()
{
    static const std::vector<std::pair<std::string, OptField>> cols{
        {"p", &Row::p},         {"epsilon", &Row::epsilon}, {"alpha", &Row::alpha}, {"beta", &Row::beta},
        {"gamma", &Row::gamma}, {"q", &Row::q},             {"r", &Row::r},         {"k", &Row::k},
        {"alpha_tilde", &Row::alpha_tilde}};
    return cols;
}

std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::optional<double> opt_number(const std::string& s)
{
    if (s.empty()) return std::nullopt;
    const auto v = parse_number(s);
    if (!v) throw IoError("malformed number '" + s + "' in results");
    return v;
}

std::string short_num(std::optional<double> v)
{
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", *v);
    return buf;
}

} // namespace

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{"kind",  "p",          "epsilon", "alpha",      "beta",
                                               "gamma", "q",          "r",       "k",          "alpha_tilde",
                                               "h",     "value",      "masked_fraction", "functional", "ratio",
                                               "verdict", "admissible", "prediction", "status"};
    return cols;
}

std::string to_csv(const SweepReport& report)
{
    std::ostringstream os;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const Row& r : report.rows) {
        os << quote(r.kind);
        for (const auto& [name, member] : optional_columns()) {
            const auto& v = r.*member;
            os << ',' << (v ? format_double(*v) : "");
        }
        os << ',' << format_double(r.h) << ',' << format_double(r.value) << ',' << format_double(r.masked_fraction)
           << ',' << quote(r.functional) << ',' << (r.ratio ? format_double(*r.ratio) : "") << ',' << r.verdict << ','
           << r.admissible << ',' << r.prediction << ',' << quote(r.status) << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const SweepReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const Row& r : report.rows) {
        nlohmann::json j;
        j["kind"] = r.kind;
        for (const auto& [name, member] : optional_columns()) {
            const auto& v = r.*member;
            j[name] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
        }
        j["h"] = r.h;
        j["value"] = r.value;
        j["masked_fraction"] = r.masked_fraction;
        j["functional"] = r.functional;
        j["ratio"] = r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json(nullptr);
        j["verdict"] = r.verdict;
        j["admissible"] = r.admissible;
        j["prediction"] = r.prediction;
        j["status"] = r.status;
        j["warnings"] = r.warnings;
        rows.push_back(std::move(j));
    }
    return {{"columns", csv_columns()}, {"rows", rows}};
}

std::vector<Row> rows_from_csv(std::string_view text)
{
    std::vector<Row> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) return rows;
    const auto header = split_csv_line(line);
    if (header != csv_columns()) throw IoError("unexpected CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw IoError("CSV row has the wrong number of fields");
        Row r;
        std::size_t c = 0;
        r.kind = f[c++];
        for (const auto& [name, member] : optional_columns()) r.*member = opt_number(f[c++]);
        r.h = opt_number(f[c++]).value_or(0.0);
        r.value = opt_number(f[c++]).value_or(0.0);
        r.masked_fraction = opt_number(f[c++]).value_or(0.0);
        r.functional = f[c++];
        r.ratio = opt_number(f[c++]);
        r.verdict = f[c++];
        r.admissible = f[c++];
        r.prediction = f[c++];
        r.status = f[c++];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<Row> rows_from_json(const nlohmann::json& j)
{
    std::vector<Row> rows;
    for (const auto& o : j.at("rows")) {
        Row r;
        r.kind = o.at("kind").get<std::string>();
        for (const auto& [name, member] : optional_columns())
            if (!o.at(name).is_null()) r.*member = o.at(name).get<double>();
        r.h = o.at("h").get<double>();
        r.value = o.at("value").get<double>();
        r.masked_fraction = o.at("masked_fraction").get<double>();
        r.functional = o.at("functional").get<std::string>();
        if (!o.at("ratio").is_null()) r.ratio = o.at("ratio").get<double>();
        r.verdict = o.at("verdict").get<std::string>();
        r.admissible = o.at("admissible").get<std::string>();
        r.prediction = o.at("prediction").get<std::string>();
        r.status = o.at("status").get<std::string>();
        r.warnings = o.at("warnings").get<std::vector<std::string>>();
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summary_table(const SweepReport& report)
{
    std::ostringstream os;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-20s %-8s %-8s %-8s %-8s %-8s %-8s %-10s %-13s %-9s %-12s %-12s %-10s %s\n",
                  "functional", "p", "eps", "alpha", "gamma", "a~", "k", "h", "value", "ratio", "verdict",
                  "admissible", "predicted", "status");
    os << buf;
    std::map<std::string, int> counts;
    for (const Row& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%-20s %-8s %-8s %-8s %-8s %-8s %-8s %-10s %-13.6g %-9s %-12s %-12s %-10s %s\n",
                      r.functional.c_str(), short_num(r.p).c_str(), short_num(r.epsilon).c_str(),
                      short_num(r.alpha).c_str(), short_num(r.gamma).c_str(), short_num(r.alpha_tilde).c_str(),
                      short_num(r.k).c_str(), short_num(r.h).c_str(), r.value, short_num(r.ratio).c_str(),
                      r.verdict.c_str(), r.admissible.c_str(), r.prediction.empty() ? "-" : r.prediction.c_str(),
                      r.status.c_str());
        os << buf;
        ++counts[r.verdict];
    }
    os << "\nrows: " << report.rows.size();
    for (const auto& [v, c] : counts) os << "  " << v << ": " << c;
    os << '\n';
    return os.str();
}

void write_report(const SweepReport& report, const std::string& dir, ReportFormats formats)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
    auto put = [&](const std::string& name, const std::string& content) {
        const auto path = (fs::path(dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        out << content;
        out.close();
        if (!out) throw IoError("cannot write " + path);
    };
    if (formats.csv) put("results.csv", to_csv(report));
    if (formats.json) put("results.json", to_json(report).dump(2) + "\n");
    put("summary.txt", summary_table(report));
}

} // namespace plap::lab
