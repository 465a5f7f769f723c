#include "loadid/signals.hpp"

#include "loadid/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace loadid {

namespace {

constexpr std::string_view kCsvHeader = "time_s,v_volts,i_amps";
constexpr double kJitterTolerance = 1e-6; // 1 ppm relative

bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

void format_double(std::string& out, double value) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::general, 17);
    (void)ec;
    out.append(buf, ptr);
}

} // namespace

Waveform::Waveform(std::vector<double> samples, double sample_interval_s, double start_time_s)
    : samples_(std::move(samples)),
      sample_interval_s_(sample_interval_s),
      start_time_s_(start_time_s) {
    if (samples_.empty()) {
        raise(ErrorCode::EmptyFile, "waveform must contain at least one sample");
    }
    if (!(sample_interval_s_ > 0.0) || !std::isfinite(sample_interval_s_)) {
        raise(ErrorCode::InvalidConfig, "sample interval must be positive and finite");
    }
    if (!std::isfinite(start_time_s_)) {
        raise(ErrorCode::InvalidConfig, "start time must be finite");
    }
    for (double v : samples_) {
        if (!std::isfinite(v)) {
            raise(ErrorCode::InvalidConfig, "waveform samples must be finite");
        }
    }
}

MeasurementFrame::MeasurementFrame(Waveform voltage, Waveform current)
    : voltage_(std::move(voltage)), current_(std::move(current)) {
    if (voltage_.size() != current_.size() ||
        voltage_.sample_interval_s() != current_.sample_interval_s() ||
        voltage_.start_time_s() != current_.start_time_s()) {
        raise(ErrorCode::InvalidConfig,
              "voltage and current must share length, sample interval, and start time");
    }
}

MeasurementFrame load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::IoFailure, "cannot open '" + path + "' for reading");
    }

    std::string line;
    if (!std::getline(in, line)) {
        raise(ErrorCode::EmptyFile, "'" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) {
        raise(ErrorCode::MalformedFile,
              "'" + path + "': expected header '" + std::string(kCsvHeader) + "', got '" + line + "'");
    }

    std::vector<double> times;
    std::vector<double> volts;
    std::vector<double> amps;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::string_view rest(line);
        double fields[3];
        for (int f = 0; f < 3; ++f) {
            const std::size_t comma = rest.find(',');
            std::string_view cell = (comma == std::string_view::npos) ? rest : rest.substr(0, comma);
            if (f < 2 && comma == std::string_view::npos) {
                raise(ErrorCode::MalformedFile,
                      "'" + path + "' row " + std::to_string(row) + ": expected 3 columns");
            }
            if (f == 2 && comma != std::string_view::npos) {
                raise(ErrorCode::MalformedFile,
                      "'" + path + "' row " + std::to_string(row) + ": expected 3 columns");
            }
            if (!parse_double(cell, fields[f])) {
                raise(ErrorCode::MalformedFile,
                      "'" + path + "' row " + std::to_string(row) + ": non-numeric cell '" +
                          std::string(cell) + "'");
            }
            rest = (comma == std::string_view::npos) ? std::string_view{} : rest.substr(comma + 1);
        }
        times.push_back(fields[0]);
        volts.push_back(fields[1]);
        amps.push_back(fields[2]);
    }

    if (times.empty()) {
        raise(ErrorCode::EmptyFile, "'" + path + "' contains a header but no samples");
    }

    double interval = 1.0;
    if (times.size() >= 2) {
        std::vector<double> deltas(times.size() - 1);
        for (std::size_t n = 0; n + 1 < times.size(); ++n) {
            deltas[n] = times[n + 1] - times[n];
            if (!(deltas[n] > 0.0)) {
                raise(ErrorCode::NonUniformSampling,
                      "'" + path + "': time column must be strictly increasing (row " +
                          std::to_string(n + 3) + ")");
            }
        }
        interval = median(deltas);
        for (double d : deltas) {
            if (std::abs(d - interval) > kJitterTolerance * interval) {
                raise(ErrorCode::NonUniformSampling,
                      "'" + path + "': sampling jitter above 1 ppm of the median interval");
            }
        }
    }

    const double t0 = times.front();
    return MeasurementFrame(Waveform(std::move(volts), interval, t0),
                            Waveform(std::move(amps), interval, t0));
}

void save_csv(const MeasurementFrame& frame, const std::string& path) {
    if (frame.size() == 0) {
        raise(ErrorCode::IoFailure, "refusing to write an empty frame");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
    }

    std::string buf;
    buf.reserve(64);
    out << kCsvHeader << '\n';
    const Waveform& v = frame.voltage();
    const Waveform& i = frame.current();
    for (std::size_t n = 0; n < frame.size(); ++n) {
        buf.clear();
        format_double(buf, v.time_at(n));
        buf.push_back(',');
        format_double(buf, v[n]);
        buf.push_back(',');
        format_double(buf, i[n]);
        buf.push_back('\n');
        out << buf;
    }
    if (!out) {
        raise(ErrorCode::IoFailure, "write to '" + path + "' failed");
    }
}

Waveform remove_dc(const Waveform& w) {
    const double m = mean(w.view());
    std::vector<double> out(w.size());
    for (std::size_t n = 0; n < w.size(); ++n) {
        out[n] = w[n] - m;
    }
    return Waveform(std::move(out), w.sample_interval_s(), w.start_time_s());
}

} // namespace loadid
