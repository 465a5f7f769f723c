#include <doctest.h>

#include "loadid/oracle.hpp"
#include "loadid/pipeline.hpp"
#include "loadid/stats.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace loadid;

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("pure resistor obeys Ohm's law exactly") {
    const HarmonicExcitation exc{{{50.0, 10.0, 0.0}}};
    const MeasurementFrame frame =
        steady_state_frame(Topology::SeriesRL, {1.0, 0.0}, exc, 0.1, 10000.0);
    for (std::size_t k = 0; k < frame.size(); ++k) {
        const double t = static_cast<double>(k) * 1e-4;
        CHECK(frame.current()[k] ==
              doctest::Approx(10.0 * std::sin(2.0 * kPi * 50.0 * t)).epsilon(1e-12));
        CHECK(frame.voltage()[k] == doctest::Approx(frame.current()[k]).epsilon(1e-12));
    }
}

TEST_CASE("series RL phasor magnitude and phase match a hand computation") {
    // 100 V at 50 Hz into R = 1.54 ohm, L = 10 mH: wL = pi, so
    // |I| = 100 / sqrt(1.54^2 + pi^2) and the current lags by atan2(pi, 1.54),
    // worked out independently here with complex arithmetic.
    const std::complex<double> z(1.54, 2.0 * kPi * 50.0 * 0.01);
    const double amp = 100.0 / std::abs(z);
    const double phase = -std::arg(z);
    CHECK(amp == doctest::Approx(28.5816914).epsilon(1e-7));
    CHECK(phase == doctest::Approx(-1.1150216).epsilon(1e-6));

    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}}};
    const MeasurementFrame frame =
        steady_state_frame(Topology::SeriesRL, {1.54, 0.01}, exc, 0.2, 10000.0);
    for (std::size_t k = 0; k < frame.size(); k += 7) {
        const double t = static_cast<double>(k) * 1e-4;
        CHECK(frame.current()[k] ==
              doctest::Approx(amp * std::sin(2.0 * kPi * 50.0 * t + phase)).epsilon(1e-9));
    }
}

TEST_CASE("parallel GCL at resonance degenerates to the conductance") {
    const double gamma = 200.0;
    const double c = 250e-6;
    const double f_res = std::sqrt(gamma / c) / (2.0 * kPi);
    const HarmonicExcitation exc{{{f_res, 50.0, 0.4}}};
    const MeasurementFrame frame =
        steady_state_frame(Topology::ParallelGCL, {c, 0.18, gamma}, exc, 0.1, 10000.0);
    for (std::size_t k = 0; k < frame.size(); ++k) {
        CHECK(frame.current()[k] == doctest::Approx(0.18 * frame.voltage()[k]).epsilon(1e-9));
    }
}

TEST_CASE("steady-state responses superpose") {
    const HarmonicExcitation a{{{50.0, 100.0, 0.0}}};
    const HarmonicExcitation b{{{150.0, 20.0, 0.9}}};
    const HarmonicExcitation both{{{50.0, 100.0, 0.0}, {150.0, 20.0, 0.9}}};
    const std::vector<double> params = {2.0, 0.005};
    const auto fa = steady_state_frame(Topology::SeriesRL, params, a, 0.1, 10000.0);
    const auto fb = steady_state_frame(Topology::SeriesRL, params, b, 0.1, 10000.0);
    const auto fab = steady_state_frame(Topology::SeriesRL, params, both, 0.1, 10000.0);
    for (std::size_t k = 0; k < fab.size(); ++k) {
        CHECK(std::abs(fab.current()[k] - fa.current()[k] - fb.current()[k]) < 1e-12);
        CHECK(std::abs(fab.voltage()[k] - fa.voltage()[k] - fb.voltage()[k]) < 1e-12);
    }
}

TEST_CASE("passive loads absorb non-negative average power") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}, {150.0, 30.0, 1.1}}};
    // whole number of 50 Hz periods at 10 kHz
    const double duration = 0.2;
    for (Topology t : {Topology::SeriesRL, Topology::SeriesRLC, Topology::ParallelGL,
                       Topology::ParallelGCL, Topology::ParallelRC, Topology::ParallelRSeriesRL}) {
        std::vector<double> params;
        switch (parameter_names(t).size()) {
            case 2: params = {u(rng), u(rng) * 0.01}; break;
            default: params = {u(rng) * 1e-3, u(rng), u(rng) * 100.0}; break;
        }
        if (t == Topology::SeriesRLC) params = {u(rng) * 1000.0, u(rng), u(rng) * 0.01};
        if (t == Topology::ParallelRSeriesRL) params = {u(rng), u(rng) * 0.2, u(rng) * 0.01};
        const auto frame = steady_state_frame(t, params, exc, duration, 10000.0);
        long double power = 0.0L;
        for (std::size_t k = 0; k < frame.size(); ++k) {
            power += static_cast<long double>(frame.voltage()[k]) * frame.current()[k];
        }
        CHECK(static_cast<double>(power / static_cast<long double>(frame.size())) >= -1e-9);
    }
}

TEST_CASE("parameter validation rejects bad input") {
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}}};
    CHECK_THROWS_AS(steady_state_frame(Topology::SeriesRL, {-1.0, 0.01}, exc, 0.1, 10000.0), Error);
    CHECK_THROWS_AS(steady_state_frame(Topology::SeriesRL, {1.0}, exc, 0.1, 10000.0), Error);
    CHECK_THROWS_AS(steady_state_frame(Topology::SeriesRL, {0.0, 0.0}, exc, 0.1, 10000.0), Error);
    CHECK_THROWS_AS(
        steady_state_frame(Topology::SeriesRL, {1.0, 0.01}, HarmonicExcitation{}, 0.1, 10000.0),
        Error);
    const HarmonicExcitation dup{{{50.0, 1.0, 0.0}, {50.0, 2.0, 0.0}}};
    CHECK_THROWS_AS(steady_state_frame(Topology::SeriesRL, {1.0, 0.01}, dup, 0.1, 10000.0), Error);
}

TEST_CASE("transient integration converges to the analytic steady state") {
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}, {150.0, 20.0, 0.0}}};
    const ParameterSchedule schedule{{{0.0, {5.5, 0.005}}}};
    const TransientResult result =
        transient_frame(Topology::SeriesRL, schedule, exc, 0.5, 10000.0, 10);
    CHECK(result.warnings.empty());
    const MeasurementFrame reference =
        steady_state_frame(Topology::SeriesRL, {5.5, 0.005}, exc, 0.5, 10000.0);

    const double tau = 0.005 / 5.5;
    const std::size_t k0 = static_cast<std::size_t>(10.0 * tau * 10000.0);
    double num = 0.0, den = 0.0;
    for (std::size_t k = k0; k < reference.size(); ++k) {
        const double d = result.frame.current()[k] - reference.current()[k];
        num += d * d;
        den += reference.current()[k] * reference.current()[k];
    }
    CHECK(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("resistance step shrinks the current envelope by the admittance ratio") {
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}}};
    const ParameterSchedule schedule{{{0.0, {5.5, 0.005}}, {0.5, {19.2, 0.005}}}};
    const TransientResult result =
        transient_frame(Topology::SeriesRL, schedule, exc, 1.0, 10000.0, 10);

    auto cycle_rms = [&](std::size_t begin) {
        double acc = 0.0;
        for (std::size_t k = begin; k < begin + 200; ++k) {
            acc += result.frame.current()[k] * result.frame.current()[k];
        }
        return std::sqrt(acc / 200.0);
    };
    const double before = cycle_rms(4000);
    const double after = cycle_rms(9000);
    const double expected_ratio =
        std::abs(std::complex<double>(5.5, 2.0 * kPi * 50.0 * 0.005)) /
        std::abs(std::complex<double>(19.2, 2.0 * kPi * 50.0 * 0.005));
    CHECK(after / before == doctest::Approx(expected_ratio).epsilon(1e-3));
}

TEST_CASE("zero excitation leaves the circuit at rest") {
    const HarmonicExcitation exc{{{50.0, 0.0, 0.0}}};
    const ParameterSchedule schedule{{{0.0, {5.5, 0.005}}}};
    const TransientResult result =
        transient_frame(Topology::SeriesRL, schedule, exc, 0.1, 10000.0, 10);
    for (std::size_t k = 0; k < result.frame.size(); ++k) {
        CHECK(result.frame.voltage()[k] == 0.0);
        CHECK(result.frame.current()[k] == 0.0);
    }
}

TEST_CASE("transient schedule validation") {
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}}};
    CHECK_THROWS_AS(transient_frame(Topology::SeriesRL, {}, exc, 0.1, 10000.0, 10), Error);
    CHECK_THROWS_AS(
        transient_frame(Topology::SeriesRL, {{{0.1, {1.0, 0.01}}}}, exc, 0.1, 10000.0, 10), Error);
    CHECK_THROWS_AS(transient_frame(Topology::SeriesRL,
                                    {{{0.0, {1.0, 0.01}}, {0.0, {2.0, 0.01}}}}, exc, 0.1, 10000.0,
                                    10),
                    Error);
    CHECK_THROWS_AS(
        transient_frame(Topology::SeriesRL, {{{0.0, {1.0, 0.01}}}}, exc, 0.1, 10000.0, 5), Error);
    // stiff-but-stable segment is reported, not fatal
    const TransientResult stiff = transient_frame(
        Topology::SeriesRL, {{{0.0, {10.0, 1e-4}}}}, exc, 0.01, 10000.0, 10);
    CHECK_FALSE(stiff.warnings.empty());
    // an unstable integration is a hard error with a clear code
    CHECK_THROWS_AS(transient_frame(Topology::SeriesRL, {{{0.0, {100.0, 1e-5}}}}, exc, 0.01,
                                    10000.0, 10),
                    Error);
}

TEST_CASE("corruption model") {
    const HarmonicExcitation exc{{{50.0, 1.0, 0.0}}};
    const MeasurementFrame clean =
        steady_state_frame(Topology::SeriesRL, {1.0, 0.0}, exc, 1.0, 10000.0);

    SUBCASE("empty spec is the identity") {
        const MeasurementFrame out = corrupt(clean, {});
        CHECK(out.voltage().samples() == clean.voltage().samples());
        CHECK(out.current().samples() == clean.current().samples());
    }
    SUBCASE("snr scaling is exact over the record") {
        CorruptionSpec spec;
        spec.snr_db = 40.0;
        spec.seed = 99;
        const MeasurementFrame out = corrupt(clean, spec);
        for (int ch = 0; ch < 2; ++ch) {
            const Waveform& a = ch == 0 ? clean.voltage() : clean.current();
            const Waveform& b = ch == 0 ? out.voltage() : out.current();
            std::vector<double> noise(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) noise[k] = b[k] - a[k];
            const double target = rms(a.view()) * std::pow(10.0, -40.0 / 20.0);
            const double realized_db = 20.0 * std::log10(rms(a.view()) / rms(noise));
            CHECK(rms(noise) == doctest::Approx(target).epsilon(1e-9));
            CHECK(std::abs(realized_db - 40.0) < 0.1);
        }
    }
    SUBCASE("quantizer produces only multiples of the step") {
        std::vector<double> small(1000);
        for (std::size_t k = 0; k < small.size(); ++k) {
            small[k] = 0.02 * std::sin(2.0 * kPi * 50.0 * static_cast<double>(k) * 1e-4);
        }
        const MeasurementFrame tiny(Waveform(small, 1e-4), Waveform(small, 1e-4));
        CorruptionSpec spec;
        spec.adc_lsb = 0.05;
        const MeasurementFrame out = corrupt(tiny, spec);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double q = out.current()[k] / 0.05;
            CHECK(std::abs(q - std::round(q)) < 1e-12);
            CHECK(std::abs(out.current()[k]) <= 0.05 + 1e-12);
        }
    }
    SUBCASE("equal seeds reproduce bit-identical noise") {
        CorruptionSpec spec;
        spec.snr_db = 30.0;
        spec.adc_lsb = 1e-3;
        spec.seed = 1234;
        const MeasurementFrame a = corrupt(clean, spec);
        const MeasurementFrame b = corrupt(clean, spec);
        CHECK(a.voltage().samples() == b.voltage().samples());
        CHECK(a.current().samples() == b.current().samples());
        spec.seed = 1235;
        const MeasurementFrame c = corrupt(clean, spec);
        CHECK(a.voltage().samples() != c.voltage().samples());
    }
}

TEST_CASE("full pipeline recovers random parameters from oracle frames") {
    // The master consistency property: noiseless two-harmonic frames from
    // the phasor oracle run through conditioning, differentiation, the
    // per-sample solve, and smoothing must come back within 0.5 %.
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const HarmonicExcitation exc{{{50.0, 100.0, 0.0}, {150.0, 30.0, 0.6}}};

    for (Topology t : {Topology::SeriesRL, Topology::SeriesRLC, Topology::ParallelGL,
                       Topology::ParallelGCL, Topology::ParallelRC, Topology::ParallelRSeriesRL}) {
        for (int trial = 0; trial < 2; ++trial) {
            std::vector<double> params;
            switch (t) {
                case Topology::SeriesRL: params = {0.5 + 10.0 * u(rng), 0.002 + 0.02 * u(rng)}; break;
                case Topology::SeriesRLC:
                    params = {1000.0 + 4000.0 * u(rng), 0.5 + 10.0 * u(rng), 0.002 + 0.02 * u(rng)};
                    break;
                case Topology::ParallelGL: params = {0.1 + 2.0 * u(rng), 50.0 + 400.0 * u(rng)}; break;
                case Topology::ParallelGCL:
                    params = {50e-6 + 400e-6 * u(rng), 0.1 + 2.0 * u(rng), 50.0 + 400.0 * u(rng)};
                    break;
                case Topology::ParallelRC: params = {0.1 + 2.0 * u(rng), 50e-6 + 400e-6 * u(rng)}; break;
                case Topology::ParallelRSeriesRL:
                    params = {0.1 + 2.0 * u(rng), 0.05 + 0.5 * u(rng), 0.002 + 0.02 * u(rng)};
                    break;
            }
            const MeasurementFrame frame = steady_state_frame(t, params, exc, 1.0, 10000.0);
            PipelineConfig cfg;
            cfg.topology = t;
            cfg.filter_order = 4;
            cfg.filter_cutoff_hz = 300.0;
            cfg.nominal = params;
            const PipelineResult result = run_pipeline(frame, cfg);
            REQUIRE(result.summary.has_value());
            for (const ParamSummary& p : result.summary->params) {
                REQUIRE(p.percent_error.has_value());
                CHECK(*p.percent_error < 0.5);
            }
        }
    }
}

} // TEST_SUITE
