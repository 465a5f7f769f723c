#include "loadid/report.hpp"

#include <charconv>
#include <fstream>

namespace loadid {

namespace {

void format_double(std::string& out, double value) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 17);
    (void)ec;
    out.append(buf, ptr);
}

} // namespace

void write_trace_csv(const ParameterTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    }
    std::string line = "time_s";
    for (const std::string& name : trace.names) {
        line += ',';
        line += name;
    }
    line += ",valid\n";
    out << line;

    for (std::size_t n = 0; n < trace.size(); ++n) {
        line.clear();
        format_double(line, trace.start_time_s + static_cast<double>(n) * trace.sample_interval_s);
        for (std::size_t p = 0; p < trace.param_count(); ++p) {
            line.push_back(',');
            format_double(line, trace.valid[n] ? trace.values[p][n] : 0.0);
        }
        line.push_back(',');
        line.push_back(trace.valid[n] ? '1' : '0');
        line.push_back('\n');
        out << line;
    }
    if (!out) {
        raise(ErrorCode::IoFailure, "write to '" + path + "' failed");
    }
}

nlohmann::json summary_to_json(const TraceSummary& summary) {
    nlohmann::json params = nlohmann::json::array();
    for (const ParamSummary& p : summary.params) {
        nlohmann::json item = {
            {"name", p.name},
            {"mean", p.mean},
            {"median", p.median},
            {"std", p.stddev},
        };
        item["nominal"] = p.nominal ? nlohmann::json(*p.nominal) : nlohmann::json(nullptr);
        item["percent_error"] =
            p.percent_error ? nlohmann::json(*p.percent_error) : nlohmann::json(nullptr);
        params.push_back(std::move(item));
    }
    return nlohmann::json{
        {"params", std::move(params)},
        {"valid_fraction", summary.valid_fraction},
        {"valid_count", summary.valid_count},
    };
}

nlohmann::json sweep_to_json(const SweepReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const SweepEntry& e : report.entries) {
        nlohmann::json entry = {
            {"order", e.spec.order},
            {"cutoff_hz", e.spec.cutoff_hz},
            {"ok", e.ok},
        };
        if (!e.ok) {
            entry["error"] = e.error;
        } else {
            entry["score"] = e.score;
            entry["valid_fraction"] = e.valid_fraction;
            nlohmann::json stats = nlohmann::json::array();
            for (const SweepParamStats& s : e.stats) {
                nlohmann::json item = {
                    {"name", s.name},         {"mean", s.mean},
                    {"median", s.median},     {"std", s.stddev},
                    {"nominal", s.nominal},   {"histogram_lo", s.histogram_lo},
                    {"histogram_hi", s.histogram_hi},
                    {"histogram", s.histogram},
                };
                item["percent_error"] =
                    s.percent_error ? nlohmann::json(*s.percent_error) : nlohmann::json(nullptr);
                stats.push_back(std::move(item));
            }
            entry["stats"] = std::move(stats);
        }
        entries.push_back(std::move(entry));
    }
    return nlohmann::json{
        {"entries", std::move(entries)},
        {"chosen_index", report.chosen_index},
    };
}

} // namespace loadid
