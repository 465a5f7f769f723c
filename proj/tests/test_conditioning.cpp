#include <doctest.h>

#include "loadid/conditioning.hpp"
#include "loadid/oracle.hpp"
#include "loadid/pipeline.hpp"
#include "loadid/report.hpp"
#include "loadid/stats.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace loadid;

namespace {

constexpr double kPi = std::numbers::pi;

Waveform sine_wave(double freq_hz, double rate_hz, std::size_t n, double amp = 1.0) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = amp * std::sin(2.0 * kPi * freq_hz * static_cast<double>(k) / rate_hz);
    }
    return Waveform(std::move(x), 1.0 / rate_hz);
}

} // namespace

TEST_SUITE("conditioning") {

TEST_CASE("low-pass design hits the defining magnitude points") {
    const LowpassFilter f = design_lowpass({FilterFamily::MaximallyFlat, 2, 1000.0}, 10000.0);
    CHECK(std::abs(f.response_at(0.0)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(f.response_at_hz(1000.0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));

    const LowpassFilter steep = design_lowpass({FilterFamily::MaximallyFlat, 10, 100.0}, 10000.0);
    CHECK(std::abs(steep.response_at_hz(100.0)) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(std::abs(steep.response_at_hz(400.0)) < 1e-5);
}

TEST_CASE("low-pass magnitude is monotone non-increasing") {
    for (int order : {2, 6, 10}) {
        const LowpassFilter f = design_lowpass({FilterFamily::MaximallyFlat, order, 700.0}, 10000.0);
        double prev = std::abs(f.response_at(0.0));
        for (int k = 1; k <= 500; ++k) {
            const double mag = std::abs(f.response_at(kPi * k / 500.0));
            CHECK(mag <= prev + 1e-12);
            prev = mag;
        }
    }
}

TEST_CASE("design rejects out-of-range requests") {
    CHECK_THROWS_AS(design_lowpass({FilterFamily::MaximallyFlat, 4, 6000.0}, 10000.0), Error);
    CHECK_THROWS_AS(design_lowpass({FilterFamily::MaximallyFlat, 4, 50.0}, 10000.0), Error);
    CHECK_THROWS_AS(design_lowpass({FilterFamily::MaximallyFlat, 3, 1000.0}, 10000.0), Error);
    CHECK_THROWS_AS(design_lowpass({FilterFamily::MaximallyFlat, 12, 1000.0}, 10000.0), Error);
    try {
        design_lowpass({FilterFamily::MaximallyFlat, 4, 1500.0}, 2000.0);
        FAIL("expected InvalidCutoff");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidCutoff);
    }
}

TEST_CASE("zero-phase filtering preserves amplitude and timing in the passband") {
    const LowpassFilter f = design_lowpass({FilterFamily::MaximallyFlat, 4, 1000.0}, 10000.0);
    const Waveform in = sine_wave(50.0, 10000.0, 10000);
    const Waveform out = zero_phase_filter(f, in);

    // amplitude: compare RMS away from the edges against |H(50)|^2
    const double h50 = std::abs(f.response_at_hz(50.0));
    double num = 0.0, den = 0.0;
    for (std::size_t k = 500; k + 500 < in.size(); ++k) {
        num += out[k] * out[k];
        den += in[k] * in[k];
    }
    const double gain = std::sqrt(num / den);
    CHECK(gain == doctest::Approx(h50 * h50).epsilon(1e-4));
    CHECK(gain == doctest::Approx(1.0).epsilon(1e-3));

    // timing: the cross-correlation peak sits at zero lag
    double best = -1e300;
    int best_lag = -99;
    for (int lag = -5; lag <= 5; ++lag) {
        double acc = 0.0;
        for (std::size_t k = 500; k + 500 < in.size(); ++k) {
            acc += in[k] * out[static_cast<std::size_t>(static_cast<int>(k) + lag)];
        }
        if (acc > best) {
            best = acc;
            best_lag = lag;
        }
    }
    CHECK(best_lag == 0);
}

TEST_CASE("zero-phase filtering of a constant is the identity") {
    const LowpassFilter f = design_lowpass({FilterFamily::MaximallyFlat, 4, 500.0}, 10000.0);
    const Waveform in(std::vector<double>(2000, 3.25), 1e-4);
    const Waveform out = zero_phase_filter(f, in);
    for (std::size_t k = 12; k + 12 < out.size(); ++k) {
        CHECK(out[k] == doctest::Approx(3.25).epsilon(1e-9));
    }
}

TEST_CASE("zero-phase filtering strictly reduces white-noise variance") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> x(20000);
    for (double& v : x) v = dist(rng);
    const LowpassFilter f = design_lowpass({FilterFamily::MaximallyFlat, 4, 1000.0}, 10000.0);
    const Waveform out = zero_phase_filter(f, Waveform(x, 1e-4));
    CHECK(rms(out.view()) < rms(std::span<const double>(x)));
}

TEST_CASE("zero-phase filtering commutes with amplitude scaling") {
    const LowpassFilter f = design_lowpass({FilterFamily::MaximallyFlat, 6, 800.0}, 10000.0);
    const Waveform in = sine_wave(120.0, 10000.0, 4000, 2.0);
    std::vector<double> scaled(in.samples());
    for (double& v : scaled) v *= -4.5;
    const Waveform a = zero_phase_filter(f, in);
    const Waveform b = zero_phase_filter(f, Waveform(scaled, 1e-4));
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(std::abs(b[k] - (-4.5) * a[k]) <= 1e-12 * std::max(1.0, std::abs(a[k]) * 4.5));
    }
}

TEST_CASE("zero-phase filtering needs more than 3x order samples") {
    const LowpassFilter f = design_lowpass({FilterFamily::MaximallyFlat, 4, 500.0}, 10000.0);
    CHECK_THROWS_AS(zero_phase_filter(f, Waveform(std::vector<double>(12, 1.0), 1e-4)), Error);
}

TEST_CASE("filtering both channels identically leaves estimates unchanged") {
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}, {150.0, 20.0, 0.0}}};
    const MeasurementFrame frame =
        steady_state_frame(Topology::SeriesRL, {1.54, 0.01}, exc, 1.0, 10000.0);

    PipelineConfig with_filter;
    with_filter.topology = Topology::SeriesRL;
    with_filter.filter_order = 4;
    with_filter.filter_cutoff_hz = 1000.0;
    with_filter.nominal = std::vector<double>{1.54, 0.01};
    PipelineConfig without = with_filter;
    without.filter_order = 0;
    without.filter_cutoff_hz = 0.0;

    const PipelineResult a = run_pipeline(frame, with_filter);
    const PipelineResult b = run_pipeline(frame, without);
    REQUIRE(a.summary.has_value());
    REQUIRE(b.summary.has_value());
    for (std::size_t p = 0; p < 2; ++p) {
        const double ma = a.summary->params[p].median;
        const double mb = b.summary->params[p].median;
        CHECK(std::abs(ma - mb) <= 1e-3 * std::abs(mb));
        CHECK(*a.summary->params[p].percent_error < 0.1);
    }
}

TEST_CASE("filter sweep ranks configurations and stays deterministic") {
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}, {150.0, 20.0, 0.0}}};
    MeasurementFrame frame = steady_state_frame(Topology::SeriesRL, {11.0, 0.01}, exc, 1.0, 10000.0);
    CorruptionSpec noise;
    noise.snr_db = 40.0;
    noise.seed = 5;
    frame = corrupt(frame, noise);
    const std::vector<double> nominal = {11.0, 0.01};

    SUBCASE("singleton grid selects its only entry") {
        SweepGrid grid;
        grid.orders = {4};
        grid.cutoffs_hz = {300.0};
        const SweepReport report = filter_sweep(frame, Topology::SeriesRL, nominal, grid, {});
        REQUIRE(report.entries.size() == 1);
        CHECK(report.chosen_index == 0);
        CHECK(report.entries[0].ok);
    }
    SUBCASE("noiseless frames pass every configuration under 0.5 percent") {
        const MeasurementFrame clean =
            steady_state_frame(Topology::SeriesRL, {11.0, 0.01}, exc, 1.0, 10000.0);
        SweepGrid grid;
        grid.orders = {2, 6};
        grid.cutoffs_hz = {300.0, 900.0, 1900.0};
        const SweepReport report = filter_sweep(clean, Topology::SeriesRL, nominal, grid, {});
        for (const SweepEntry& e : report.entries) {
            REQUIRE(e.ok);
            for (const SweepParamStats& s : e.stats) {
                REQUIRE(s.percent_error.has_value());
                CHECK(*s.percent_error < 0.5);
            }
        }
    }
    SUBCASE("estimate dispersion grows with the cutoff under noise") {
        SweepGrid grid;
        grid.orders = {4};
        grid.cutoffs_hz = {100.0, 900.0, 1900.0};
        const SweepReport report = filter_sweep(frame, Topology::SeriesRL, nominal, grid, {});
        REQUIRE(report.entries.size() == 3);
        for (const auto& e : report.entries) REQUIRE(e.ok);
        CHECK(report.entries[0].stats[0].stddev < report.entries[1].stats[0].stddev);
        CHECK(report.entries[1].stats[0].stddev < report.entries[2].stats[0].stddev);
    }
    SUBCASE("identical inputs reproduce the report bit for bit") {
        SweepGrid grid;
        grid.orders = {2, 4};
        grid.cutoffs_hz = {300.0, 1100.0};
        const SweepReport a = filter_sweep(frame, Topology::SeriesRL, nominal, grid, {});
        const SweepReport b = filter_sweep(frame, Topology::SeriesRL, nominal, grid, {});
        CHECK(sweep_to_json(a).dump() == sweep_to_json(b).dump());
        CHECK(a.chosen_index == b.chosen_index);
    }
    SUBCASE("hopeless frames are recorded as failures, not crashes") {
        std::vector<double> short_sig(40, 1.0);
        const MeasurementFrame tiny(Waveform(short_sig, 1e-4), Waveform(short_sig, 1e-4));
        SweepGrid grid;
        grid.orders = {4};
        grid.cutoffs_hz = {300.0};
        const SweepReport report = filter_sweep(tiny, Topology::SeriesRL, nominal, grid, {});
        REQUIRE(report.entries.size() == 1);
        CHECK_FALSE(report.entries[0].ok);
        CHECK(report.chosen_index == -1);
        CHECK_FALSE(report.entries[0].error.empty());
    }
}

TEST_CASE("sweep validates its inputs") {
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}}};
    const MeasurementFrame frame =
        steady_state_frame(Topology::SeriesRL, {1.0, 0.01}, exc, 0.2, 10000.0);
    SweepGrid empty;
    CHECK_THROWS_AS(filter_sweep(frame, Topology::SeriesRL, {1.0, 0.01}, empty, {}), Error);
    SweepGrid grid;
    grid.orders = {4};
    grid.cutoffs_hz = {300.0};
    CHECK_THROWS_AS(filter_sweep(frame, Topology::SeriesRL, {1.0}, grid, {}), Error);
}

TEST_CASE("group delay of one pass is positive and order-dependent") {
    const LowpassFilter a = design_lowpass({FilterFamily::MaximallyFlat, 2, 300.0}, 10000.0);
    const LowpassFilter b = design_lowpass({FilterFamily::MaximallyFlat, 8, 300.0}, 10000.0);
    CHECK(a.dc_group_delay_samples() > 0.0);
    CHECK(b.dc_group_delay_samples() > a.dc_group_delay_samples());
}

} // TEST_SUITE
