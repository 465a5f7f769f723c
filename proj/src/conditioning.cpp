#include "loadid/conditioning.hpp"

#include "loadid/pipeline.hpp"
#include "loadid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace loadid {

namespace {

constexpr double kPi = std::numbers::pi;

void run_sections_forward(const std::vector<Biquad>& sections, std::vector<double>& x) {
    for (const Biquad& s : sections) {
        // Transposed direct-form II with steady-state initial conditions for
        // a step of the first sample, so constants pass through untouched.
        const double x0 = x.front();
        double s1 = x0 * (1.0 - s.b0);
        double s2 = x0 * (s.b2 - s.a2);
        for (double& xn : x) {
            const double y = s.b0 * xn + s1;
            s1 = s.b1 * xn - s.a1 * y + s2;
            s2 = s.b2 * xn - s.a2 * y;
            xn = y;
        }
    }
}

std::vector<double> odd_extend(std::span<const double> x, std::size_t pad) {
    std::vector<double> ext;
    ext.reserve(x.size() + 2 * pad);
    for (std::size_t k = pad; k >= 1; --k) {
        ext.push_back(2.0 * x.front() - x[k]);
    }
    ext.insert(ext.end(), x.begin(), x.end());
    const std::size_t n = x.size();
    for (std::size_t k = 1; k <= pad; ++k) {
        ext.push_back(2.0 * x.back() - x[n - 1 - k]);
    }
    return ext;
}

} // namespace

std::complex<double> LowpassFilter::response_at(double omega) const {
    const std::complex<double> z1 = std::polar(1.0, -omega);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h(1.0, 0.0);
    for (const Biquad& s : sections_) {
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    }
    return h;
}

std::complex<double> LowpassFilter::response_at_hz(double frequency_hz) const {
    return response_at(2.0 * kPi * frequency_hz / sample_rate_hz_);
}

double LowpassFilter::dc_group_delay_samples() const {
    const double omega = 1e-4;
    return -std::arg(response_at(omega)) / omega;
}

LowpassFilter design_lowpass(const LowpassSpec& spec, double sample_rate_hz) {
    if (spec.family != FilterFamily::MaximallyFlat) {
        raise(ErrorCode::InvalidConfig, "unsupported filter family");
    }
    const int n = spec.order;
    if (n != 2 && n != 4 && n != 6 && n != 8 && n != 10) {
        raise(ErrorCode::InvalidConfig, "filter order must be one of 2, 4, 6, 8, 10");
    }
    if (!(sample_rate_hz > 0.0)) {
        raise(ErrorCode::InvalidConfig, "sample rate must be positive");
    }
    if (!(spec.cutoff_hz >= 100.0) || !(spec.cutoff_hz <= 2000.0) ||
        !(spec.cutoff_hz < sample_rate_hz / 2.0)) {
        raise(ErrorCode::InvalidCutoff,
              "cutoff must lie in [100, 2000] Hz and below half the sample rate");
    }

    // Analog prototype poles scaled by the prewarped cutoff, mapped by the
    // bilinear transform, paired into conjugate sections with unit DC gain.
    const double fs2 = 2.0 * sample_rate_hz;
    const double warped = fs2 * std::tan(kPi * spec.cutoff_hz / sample_rate_hz);

    std::vector<Biquad> sections;
    sections.reserve(static_cast<std::size_t>(n / 2));
    for (int k = 0; k < n / 2; ++k) {
        const double theta = kPi * static_cast<double>(2 * k + 1 + n) / (2.0 * n);
        const std::complex<double> s_pole = warped * std::polar(1.0, theta);
        const std::complex<double> z_pole = (fs2 + s_pole) / (fs2 - s_pole);
        Biquad biq;
        biq.a1 = -2.0 * z_pole.real();
        biq.a2 = std::norm(z_pole);
        const double gain = (1.0 + biq.a1 + biq.a2) / 4.0;
        biq.b0 = gain;
        biq.b1 = 2.0 * gain;
        biq.b2 = gain;
        sections.push_back(biq);
    }
    return LowpassFilter(spec, sample_rate_hz, std::move(sections));
}

Waveform zero_phase_filter(const LowpassFilter& filter, const Waveform& w) {
    if (w.size() <= 3 * static_cast<std::size_t>(filter.order())) {
        raise(ErrorCode::SignalTooShort,
              "zero-phase filtering needs more than 3x filter order samples");
    }
    const std::size_t pad =
        std::min(static_cast<std::size_t>(3 * (filter.order() + 1)), w.size() - 1);

    std::vector<double> x = odd_extend(w.view(), pad);
    run_sections_forward(filter.sections(), x);
    std::reverse(x.begin(), x.end());
    run_sections_forward(filter.sections(), x);
    std::reverse(x.begin(), x.end());

    std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(pad),
                            x.begin() + static_cast<std::ptrdiff_t>(pad + w.size()));
    return Waveform(std::move(out), w.sample_interval_s(), w.start_time_s());
}

SweepGrid SweepGrid::standard() {
    SweepGrid grid;
    grid.orders = {2, 4, 6, 8, 10};
    for (double c = 100.0; c <= 1900.0; c += 200.0) grid.cutoffs_hz.push_back(c);
    return grid;
}

SweepReport filter_sweep(const MeasurementFrame& frame, Topology topology,
                         const std::vector<double>& nominal, const SweepGrid& grid,
                         const SweepOptions& options) {
    if (grid.orders.empty() || grid.cutoffs_hz.empty()) {
        raise(ErrorCode::InvalidConfig, "sweep grid must contain at least one configuration");
    }
    if (nominal.size() != parameter_names(topology).size()) {
        raise(ErrorCode::InvalidConfig, "nominal tuple size does not match the topology");
    }

    SweepReport report;
    report.entries.reserve(grid.orders.size() * grid.cutoffs_hz.size());

    for (int order : grid.orders) {
        for (double cutoff : grid.cutoffs_hz) {
            SweepEntry entry;
            entry.spec.order = order;
            entry.spec.cutoff_hz = cutoff;
            try {
                PipelineConfig config;
                config.topology = topology;
                config.filter_order = order;
                config.filter_cutoff_hz = cutoff;
                config.diff_taps = options.diff_taps;
                config.smooth_window = options.smooth_window;
                config.epsilon_rel = options.epsilon_rel;
                config.nominal = nominal;
                const PipelineResult result = run_pipeline(frame, config);
                if (!result.summary) {
                    raise(ErrorCode::NoValidSamples, "no sample survived validity masking");
                }

                entry.ok = true;
                entry.valid_fraction = result.summary->valid_fraction;
                double score = 0.0;
                for (std::size_t p = 0; p < result.summary->params.size(); ++p) {
                    const ParamSummary& ps = result.summary->params[p];
                    SweepParamStats stats;
                    stats.name = ps.name;
                    stats.mean = ps.mean;
                    stats.median = ps.median;
                    stats.stddev = ps.stddev;
                    stats.nominal = nominal[p];
                    stats.percent_error = ps.percent_error;

                    const double denom = std::abs(nominal[p]);
                    const double miss = std::abs(ps.median - nominal[p]) + 0.1 * ps.stddev;
                    score += (denom > 0.0) ? miss / denom : miss;

                    // Histogram of the smoothed valid samples for reporting.
                    std::vector<double> vals;
                    for (std::size_t k = 0; k < result.smoothed.size(); ++k) {
                        if (result.smoothed.valid[k]) vals.push_back(result.smoothed.values[p][k]);
                    }
                    const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
                    stats.histogram_lo = *lo_it;
                    stats.histogram_hi = *hi_it;
                    stats.histogram.assign(static_cast<std::size_t>(options.histogram_bins), 0);
                    const double width = stats.histogram_hi - stats.histogram_lo;
                    for (double v : vals) {
                        std::size_t bin = 0;
                        if (width > 0.0) {
                            bin = static_cast<std::size_t>((v - stats.histogram_lo) / width *
                                                           options.histogram_bins);
                            bin = std::min(bin, static_cast<std::size_t>(options.histogram_bins - 1));
                        }
                        ++stats.histogram[bin];
                    }
                    entry.stats.push_back(std::move(stats));
                }
                entry.score = score;
            } catch (const Error& e) {
                entry.ok = false;
                entry.error = e.what();
            }
            report.entries.push_back(std::move(entry));
        }
    }

    for (std::size_t k = 0; k < report.entries.size(); ++k) {
        const SweepEntry& e = report.entries[k];
        if (!e.ok) continue;
        if (report.chosen_index < 0) {
            report.chosen_index = static_cast<int>(k);
            continue;
        }
        const SweepEntry& best = report.entries[static_cast<std::size_t>(report.chosen_index)];
        const auto key = std::make_tuple(e.score, e.spec.order, e.spec.cutoff_hz);
        const auto best_key = std::make_tuple(best.score, best.spec.order, best.spec.cutoff_hz);
        if (key < best_key) report.chosen_index = static_cast<int>(k);
    }
    return report;
}

} // namespace loadid
