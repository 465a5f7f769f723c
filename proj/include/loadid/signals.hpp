#pragma once

#include "loadid/errors.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace loadid {

/// Uniformly sampled real-valued signal (volts or amperes). Immutable after
/// construction; all samples are finite and the sample interval is positive.
class Waveform {
public:
    Waveform(std::vector<double> samples, double sample_interval_s, double start_time_s = 0.0);

    [[nodiscard]] const std::vector<double>& samples() const { return samples_; }
    [[nodiscard]] std::span<const double> view() const { return samples_; }
    [[nodiscard]] double sample_interval_s() const { return sample_interval_s_; }
    [[nodiscard]] double start_time_s() const { return start_time_s_; }
    [[nodiscard]] std::size_t size() const { return samples_.size(); }
    [[nodiscard]] double operator[](std::size_t n) const { return samples_[n]; }
    [[nodiscard]] double time_at(std::size_t n) const {
        return start_time_s_ + static_cast<double>(n) * sample_interval_s_;
    }

private:
    std::vector<double> samples_;
    double sample_interval_s_;
    double start_time_s_;
};

/// Voltage/current pair measured at the same terminals with identical
/// sampling. Immutable after construction.
class MeasurementFrame {
public:
    MeasurementFrame(Waveform voltage, Waveform current);

    [[nodiscard]] const Waveform& voltage() const { return voltage_; }
    [[nodiscard]] const Waveform& current() const { return current_; }
    [[nodiscard]] std::size_t size() const { return voltage_.size(); }
    [[nodiscard]] double sample_interval_s() const { return voltage_.sample_interval_s(); }

private:
    Waveform voltage_;
    Waveform current_;
};

/// Read a frame from a CSV file with header `time_s,v_volts,i_amps`.
/// The time column must be strictly increasing and uniform within 1 ppm
/// relative jitter; the sample interval is the median time delta.
MeasurementFrame load_csv(const std::string& path);

/// Write a frame in the exact format accepted by load_csv. Values are
/// emitted with enough digits to round-trip bit-exactly.
void save_csv(const MeasurementFrame& frame, const std::string& path);

/// Subtract the global mean of the record.
Waveform remove_dc(const Waveform& w);

} // namespace loadid
