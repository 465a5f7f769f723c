#pragma once

#include "loadid/estimators.hpp"
#include "loadid/signals.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace loadid {

enum class FilterFamily { MaximallyFlat };

/// Low-pass specification: maximally-flat magnitude prototype, even order in
/// {2,4,6,8,10}, cutoff in [100, 2000] Hz and below Nyquist at design time.
struct LowpassSpec {
    FilterFamily family = FilterFamily::MaximallyFlat;
    int order = 4;
    double cutoff_hz = 1000.0;
};

struct Biquad {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// Designed recursive low-pass as a cascade of second-order sections
/// (bilinear transform with cutoff prewarping).
class LowpassFilter {
public:
    LowpassFilter(LowpassSpec spec, double sample_rate_hz, std::vector<Biquad> sections)
        : spec_(spec), sample_rate_hz_(sample_rate_hz), sections_(std::move(sections)) {}

    [[nodiscard]] const LowpassSpec& spec() const { return spec_; }
    [[nodiscard]] int order() const { return spec_.order; }
    [[nodiscard]] double sample_rate_hz() const { return sample_rate_hz_; }
    [[nodiscard]] const std::vector<Biquad>& sections() const { return sections_; }

    /// Single-pass transfer function at a radian frequency per sample.
    [[nodiscard]] std::complex<double> response_at(double omega) const;
    [[nodiscard]] std::complex<double> response_at_hz(double frequency_hz) const;

    /// Low-frequency group delay of one pass, in samples.
    [[nodiscard]] double dc_group_delay_samples() const;

private:
    LowpassSpec spec_;
    double sample_rate_hz_;
    std::vector<Biquad> sections_;
};

LowpassFilter design_lowpass(const LowpassSpec& spec, double sample_rate_hz);

/// Forward-backward application of the filter so the net phase response is
/// zero; the effective magnitude is the design magnitude squared. Edge
/// transients are suppressed with odd-reflection padding and steady-state
/// initial conditions, and callers additionally trim 3x order samples.
Waveform zero_phase_filter(const LowpassFilter& filter, const Waveform& w);

struct SweepGrid {
    std::vector<int> orders;
    std::vector<double> cutoffs_hz;

    /// Orders 2..10 (even) by cutoffs 100..1900 Hz in 200 Hz steps.
    static SweepGrid standard();
};

struct SweepParamStats {
    std::string name;
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    double nominal = 0.0;
    std::optional<double> percent_error;
    std::vector<int> histogram;
    double histogram_lo = 0.0;
    double histogram_hi = 0.0;
};

struct SweepEntry {
    LowpassSpec spec;
    bool ok = false;
    std::string error;
    std::vector<SweepParamStats> stats;
    double valid_fraction = 0.0;
    double score = 0.0;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    int chosen_index = -1; // -1 when every entry failed
};

struct SweepOptions {
    int diff_taps = 21;
    int smooth_window = 500;
    double epsilon_rel = 1e-6;
    int histogram_bins = 40;
};

/// Run the full conditioning/estimation pipeline for every grid entry and
/// rank the configurations. Per-entry failures are recorded, not fatal.
/// Selection minimizes sum over parameters of
/// (|median - nominal| + 0.1 * std) / |nominal|, ties broken by lower order
/// then lower cutoff.
SweepReport filter_sweep(const MeasurementFrame& frame, Topology topology,
                         const std::vector<double>& nominal, const SweepGrid& grid,
                         const SweepOptions& options = {});

} // namespace loadid
