#include "loadid/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

namespace loadid {

namespace {

constexpr int kWidth = 960;
constexpr int kRowHeight = 150;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 24;
constexpr int kMaxPoints = 2000;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Series {
    std::string label;
    std::vector<double> t;
    std::vector<double> y;
    std::vector<bool> ok;
};

void write_rows(std::ofstream& out, const std::vector<Series>& rows) {
    const int height = kMarginTop + kRowHeight * static_cast<int>(rows.size());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Series& s = rows[r];
        const double y_top = kMarginTop + static_cast<double>(r) * kRowHeight + 16.0;
        const double plot_h = kRowHeight - 34.0;

        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        double t_lo = std::numeric_limits<double>::infinity();
        double t_hi = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < s.y.size(); ++k) {
            if (!s.ok[k]) continue;
            lo = std::min(lo, s.y[k]);
            hi = std::max(hi, s.y[k]);
            t_lo = std::min(t_lo, s.t[k]);
            t_hi = std::max(t_hi, s.t[k]);
        }
        const bool empty = !(lo <= hi);
        if (empty) {
            lo = -1.0;
            hi = 1.0;
            t_lo = 0.0;
            t_hi = 1.0;
        }
        if (hi == lo) {
            hi += 0.5;
            lo -= 0.5;
        }
        if (t_hi == t_lo) t_hi = t_lo + 1.0;

        out << "<rect x=\"" << kMarginLeft << "\" y=\"" << fmt(y_top) << "\" width=\""
            << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
            << "\" fill=\"none\" stroke=\"#999\"/>\n";
        out << "<text x=\"" << kMarginLeft << "\" y=\"" << fmt(y_top - 5.0) << "\">" << s.label
            << "  [" << fmt(lo) << ", " << fmt(hi) << "]</text>\n";

        if (empty) {
            out << "<text x=\"" << kMarginLeft + 10 << "\" y=\"" << fmt(y_top + plot_h / 2.0)
                << "\" fill=\"#c00\">no valid samples</text>\n";
            continue;
        }

        auto map_x = [&](double t) {
            return kMarginLeft + (t - t_lo) / (t_hi - t_lo) * plot_w;
        };
        auto map_y = [&](double v) {
            return y_top + plot_h - (v - lo) / (hi - lo) * plot_h;
        };

        bool open = false;
        std::string points;
        auto flush = [&]() {
            if (open && !points.empty()) {
                out << "<polyline fill=\"none\" stroke=\"#1a56a0\" stroke-width=\"1\" points=\""
                    << points << "\"/>\n";
            }
            points.clear();
            open = false;
        };
        const std::size_t stride = std::max<std::size_t>(1, s.y.size() / kMaxPoints);
        for (std::size_t k = 0; k < s.y.size(); k += stride) {
            if (!s.ok[k]) {
                flush();
                continue;
            }
            points += fmt(map_x(s.t[k]));
            points += ',';
            points += fmt(map_y(s.y[k]));
            points += ' ';
            open = true;
        }
        flush();
    }
    out << "</svg>\n";
}

} // namespace

void write_trace_plot(const ParameterTrace& trace, const MeasurementFrame& frame,
                      const std::string& path) {
    std::vector<Series> rows;
    for (std::size_t p = 0; p < trace.param_count(); ++p) {
        Series s;
        s.label = trace.names[p];
        s.t.reserve(trace.size());
        s.y.reserve(trace.size());
        s.ok.reserve(trace.size());
        for (std::size_t k = 0; k < trace.size(); ++k) {
            s.t.push_back(trace.start_time_s + static_cast<double>(k) * trace.sample_interval_s);
            s.y.push_back(trace.values[p][k]);
            s.ok.push_back(trace.valid[k] != 0);
        }
        rows.push_back(std::move(s));
    }
    for (int channel = 0; channel < 2; ++channel) {
        const Waveform& w = channel == 0 ? frame.voltage() : frame.current();
        Series s;
        s.label = channel == 0 ? "v_volts" : "i_amps";
        for (std::size_t k = 0; k < w.size(); ++k) {
            s.t.push_back(w.time_at(k));
            s.y.push_back(w[k]);
            s.ok.push_back(true);
        }
        rows.push_back(std::move(s));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    }
    write_rows(out, rows);
    if (!out) {
        raise(ErrorCode::IoFailure, "write to '" + path + "' failed");
    }
}

void write_sweep_histograms(const SweepEntry& entry, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    }

    const int panels = std::max<int>(1, static_cast<int>(entry.stats.size()));
    const int height = kMarginTop + kRowHeight * panels;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"8\" y=\"16\">order " << entry.spec.order << ", cutoff "
        << fmt(entry.spec.cutoff_hz) << " Hz" << (entry.ok ? "" : "  FAILED") << "</text>\n";

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    for (std::size_t p = 0; p < entry.stats.size(); ++p) {
        const SweepParamStats& s = entry.stats[p];
        const double y_top = kMarginTop + static_cast<double>(p) * kRowHeight + 16.0;
        const double plot_h = kRowHeight - 34.0;
        out << "<rect x=\"" << kMarginLeft << "\" y=\"" << fmt(y_top) << "\" width=\""
            << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
            << "\" fill=\"none\" stroke=\"#999\"/>\n";
        out << "<text x=\"" << kMarginLeft << "\" y=\"" << fmt(y_top - 5.0) << "\">" << s.name
            << "  mean=" << fmt(s.mean) << " median=" << fmt(s.median) << " std=" << fmt(s.stddev)
            << " nominal=" << fmt(s.nominal) << "</text>\n";

        int peak = 1;
        for (int c : s.histogram) peak = std::max(peak, c);
        const double bin_w = plot_w / std::max<std::size_t>(1, s.histogram.size());
        for (std::size_t b = 0; b < s.histogram.size(); ++b) {
            const double bar_h = plot_h * static_cast<double>(s.histogram[b]) / peak;
            out << "<rect x=\"" << fmt(kMarginLeft + static_cast<double>(b) * bin_w) << "\" y=\""
                << fmt(y_top + plot_h - bar_h) << "\" width=\"" << fmt(bin_w * 0.9)
                << "\" height=\"" << fmt(bar_h) << "\" fill=\"#4a7ec0\"/>\n";
        }
    }
    out << "</svg>\n";
    if (!out) {
        raise(ErrorCode::IoFailure, "write to '" + path + "' failed");
    }
}

} // namespace loadid
