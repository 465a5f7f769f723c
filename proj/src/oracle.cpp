#include "loadid/oracle.hpp"

#include "loadid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace loadid {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_params(Topology topology, std::span<const double> params) {
    const std::size_t expected = parameter_names(topology).size();
    if (params.size() != expected) {
        raise(ErrorCode::InvalidParams,
              std::string(topology_name(topology)) + " expects " + std::to_string(expected) +
                  " parameters, got " + std::to_string(params.size()));
    }
    for (double p : params) {
        if (!std::isfinite(p) || p < 0.0) {
            raise(ErrorCode::InvalidParams, "circuit parameters must be finite and non-negative");
        }
    }
}

void validate_excitation(const HarmonicExcitation& excitation) {
    if (excitation.components.empty()) {
        raise(ErrorCode::InvalidParams, "excitation needs at least one harmonic component");
    }
    for (const auto& c : excitation.components) {
        if (!(c.frequency_hz > 0.0) || c.amplitude < 0.0 || !std::isfinite(c.phase_rad)) {
            raise(ErrorCode::InvalidParams, "harmonic components need positive frequency and non-negative amplitude");
        }
    }
    for (std::size_t a = 0; a < excitation.components.size(); ++a) {
        for (std::size_t b = a + 1; b < excitation.components.size(); ++b) {
            if (excitation.components[a].frequency_hz == excitation.components[b].frequency_hz) {
                raise(ErrorCode::InvalidParams, "harmonic frequencies must be distinct");
            }
        }
    }
}

double excitation_value(const HarmonicExcitation& excitation, double t) {
    double v = 0.0;
    for (const auto& c : excitation.components) {
        v += c.amplitude * std::sin(kTwoPi * c.frequency_hz * t + c.phase_rad);
    }
    return v;
}

double excitation_derivative(const HarmonicExcitation& excitation, double t) {
    double v = 0.0;
    for (const auto& c : excitation.components) {
        const double w = kTwoPi * c.frequency_hz;
        v += c.amplitude * w * std::cos(w * t + c.phase_rad);
    }
    return v;
}

// Deterministic standard normal stream (Box-Muller over a 64-bit engine) so
// corruption does not depend on the standard library's distribution
// implementation.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform() {
        return static_cast<double>(engine_()) * 0x1.0p-64;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

std::vector<double> scaled_noise(std::size_t n, double target_rms, std::uint64_t seed) {
    GaussianStream stream(seed);
    std::vector<double> noise(n);
    for (double& x : noise) x = stream.next();
    const double actual = rms(noise);
    const double scale = (actual > 0.0) ? target_rms / actual : 0.0;
    for (double& x : noise) x *= scale;
    return noise;
}

struct OdeModel {
    int state_dim = 0;
    // dstate/dt given time, state, and the active parameter tuple
    void (*deriv)(double t, const double* state, std::span<const double> p,
                  const HarmonicExcitation& exc, double* out) = nullptr;
    // terminal current from state + algebraic part
    double (*output)(double t, const double* state, std::span<const double> p,
                     const HarmonicExcitation& exc) = nullptr;
};

OdeModel ode_model(Topology topology) {
    switch (topology) {
        case Topology::SeriesRL:
            return {1,
                    [](double t, const double* s, std::span<const double> p,
                       const HarmonicExcitation& e, double* out) {
                        out[0] = (excitation_value(e, t) - p[0] * s[0]) / p[1];
                    },
                    [](double, const double* s, std::span<const double>,
                       const HarmonicExcitation&) { return s[0]; }};
        case Topology::SeriesRLC:
            // params (S, R, L); states (i, q) with q the running charge
            return {2,
                    [](double t, const double* s, std::span<const double> p,
                       const HarmonicExcitation& e, double* out) {
                        out[0] = (excitation_value(e, t) - p[1] * s[0] - p[0] * s[1]) / p[2];
                        out[1] = s[0];
                    },
                    [](double, const double* s, std::span<const double>,
                       const HarmonicExcitation&) { return s[0]; }};
        case Topology::ParallelGL:
            // params (G, Gamma); state iL
            return {1,
                    [](double t, const double* , std::span<const double> p,
                       const HarmonicExcitation& e, double* out) {
                        out[0] = p[1] * excitation_value(e, t);
                    },
                    [](double t, const double* s, std::span<const double> p,
                       const HarmonicExcitation& e) {
                        return p[0] * excitation_value(e, t) + s[0];
                    }};
        case Topology::ParallelGCL:
            // params (C, G, Gamma); state iL
            return {1,
                    [](double t, const double*, std::span<const double> p,
                       const HarmonicExcitation& e, double* out) {
                        out[0] = p[2] * excitation_value(e, t);
                    },
                    [](double t, const double* s, std::span<const double> p,
                       const HarmonicExcitation& e) {
                        return p[1] * excitation_value(e, t) +
                               p[0] * excitation_derivative(e, t) + s[0];
                    }};
        case Topology::ParallelRC:
            // params (G, C); stateless
            return {0, nullptr,
                    [](double t, const double*, std::span<const double> p,
                       const HarmonicExcitation& e) {
                        return p[0] * excitation_value(e, t) + p[1] * excitation_derivative(e, t);
                    }};
        case Topology::ParallelRSeriesRL:
            // params (Gp, Rser, Lser); state ib (series-branch current)
            return {1,
                    [](double t, const double* s, std::span<const double> p,
                       const HarmonicExcitation& e, double* out) {
                        out[0] = (excitation_value(e, t) - p[1] * s[0]) / p[2];
                    },
                    [](double t, const double* s, std::span<const double> p,
                       const HarmonicExcitation& e) {
                        return p[0] * excitation_value(e, t) + s[0];
                    }};
    }
    raise(ErrorCode::InvalidConfig, "unknown topology");
}

// Decay time constant of the topology's state, if it has one.
std::optional<double> time_constant(Topology topology, std::span<const double> p) {
    switch (topology) {
        case Topology::SeriesRL:
            return (p[0] > 0.0 && p[1] > 0.0) ? std::optional<double>(p[1] / p[0]) : std::nullopt;
        case Topology::SeriesRLC:
            return (p[1] > 0.0 && p[2] > 0.0) ? std::optional<double>(2.0 * p[2] / p[1]) : std::nullopt;
        case Topology::ParallelRSeriesRL:
            return (p[1] > 0.0 && p[2] > 0.0) ? std::optional<double>(p[2] / p[1]) : std::nullopt;
        default:
            return std::nullopt;
    }
}

void validate_ode_params(Topology topology, std::span<const double> p) {
    validate_params(topology, p);
    switch (topology) {
        case Topology::SeriesRL:
        case Topology::SeriesRLC:
            if (!((topology == Topology::SeriesRL ? p[1] : p[2]) > 0.0)) {
                raise(ErrorCode::InvalidParams, "series inductance must be positive for transient runs");
            }
            break;
        case Topology::ParallelRSeriesRL:
            if (!(p[2] > 0.0)) {
                raise(ErrorCode::InvalidParams, "series-branch inductance must be positive for transient runs");
            }
            break;
        default:
            break;
    }
}

} // namespace

std::complex<double> admittance(Topology topology, std::span<const double> params, double omega) {
    validate_params(topology, params);
    if (!(omega > 0.0)) {
        raise(ErrorCode::InvalidParams, "admittance requires a positive angular frequency");
    }
    const std::complex<double> jw(0.0, omega);
    switch (topology) {
        case Topology::SeriesRL: {
            const std::complex<double> z = params[0] + jw * params[1];
            if (std::abs(z) == 0.0) raise(ErrorCode::InvalidParams, "series RL impedance is zero");
            return 1.0 / z;
        }
        case Topology::SeriesRLC: {
            const std::complex<double> z = params[1] + jw * params[2] + params[0] / jw;
            if (std::abs(z) == 0.0) raise(ErrorCode::InvalidParams, "series RLC impedance is zero");
            return 1.0 / z;
        }
        case Topology::ParallelGL:
            return params[0] + params[1] / jw;
        case Topology::ParallelGCL:
            return params[1] + jw * params[0] + params[2] / jw;
        case Topology::ParallelRC:
            return params[0] + jw * params[1];
        case Topology::ParallelRSeriesRL: {
            const std::complex<double> zb = params[1] + jw * params[2];
            if (std::abs(zb) == 0.0) {
                raise(ErrorCode::InvalidParams, "hybrid series branch impedance is zero");
            }
            return params[0] + 1.0 / zb;
        }
    }
    raise(ErrorCode::InvalidConfig, "unknown topology");
}

MeasurementFrame steady_state_frame(Topology topology, const std::vector<double>& params,
                                    const HarmonicExcitation& excitation, double duration_s,
                                    double sample_rate_hz) {
    validate_params(topology, params);
    validate_excitation(excitation);
    if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0)) {
        raise(ErrorCode::InvalidParams, "duration and sample rate must be positive");
    }
    const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    if (n == 0) {
        raise(ErrorCode::InvalidParams, "duration too short for the sample rate");
    }
    const double h = 1.0 / sample_rate_hz;

    struct Phasor {
        double omega, amp_v, phase_v, amp_i, phase_i;
    };
    std::vector<Phasor> phasors;
    phasors.reserve(excitation.components.size());
    for (const auto& c : excitation.components) {
        const double omega = kTwoPi * c.frequency_hz;
        const std::complex<double> y = admittance(topology, params, omega);
        phasors.push_back({omega, c.amplitude, c.phase_rad, c.amplitude * std::abs(y),
                           c.phase_rad + std::arg(y)});
    }

    std::vector<double> v(n, 0.0);
    std::vector<double> i(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * h;
        double vk = 0.0;
        double ik = 0.0;
        for (const auto& ph : phasors) {
            vk += ph.amp_v * std::sin(ph.omega * t + ph.phase_v);
            ik += ph.amp_i * std::sin(ph.omega * t + ph.phase_i);
        }
        v[k] = vk;
        i[k] = ik;
    }
    return MeasurementFrame(Waveform(std::move(v), h, 0.0), Waveform(std::move(i), h, 0.0));
}

TransientResult transient_frame(Topology topology, const ParameterSchedule& schedule,
                                const HarmonicExcitation& excitation, double duration_s,
                                double sample_rate_hz, int oversample) {
    if (schedule.segments.empty()) {
        raise(ErrorCode::InvalidParams, "schedule needs at least one segment");
    }
    if (schedule.segments.front().start_time_s != 0.0) {
        raise(ErrorCode::InvalidParams, "first schedule segment must start at t = 0");
    }
    for (std::size_t k = 0; k + 1 < schedule.segments.size(); ++k) {
        if (!(schedule.segments[k].start_time_s < schedule.segments[k + 1].start_time_s)) {
            raise(ErrorCode::InvalidParams, "schedule segment start times must strictly increase");
        }
    }
    for (const auto& seg : schedule.segments) {
        validate_ode_params(topology, seg.params);
    }
    validate_excitation(excitation);
    if (oversample < 10) {
        raise(ErrorCode::InvalidParams, "oversample factor must be at least 10");
    }
    if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0)) {
        raise(ErrorCode::InvalidParams, "duration and sample rate must be positive");
    }
    const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    if (n == 0) {
        raise(ErrorCode::InvalidParams, "duration too short for the sample rate");
    }

    const double h = 1.0 / sample_rate_hz;
    const double dt = h / static_cast<double>(oversample);
    const OdeModel model = ode_model(topology);

    TransientResult result{
        MeasurementFrame(Waveform(std::vector<double>(1, 0.0), h), Waveform(std::vector<double>(1, 0.0), h)),
        {}};

    for (std::size_t seg = 0; seg < schedule.segments.size(); ++seg) {
        const auto tau = time_constant(topology, schedule.segments[seg].params);
        if (tau && *tau < 5.0 * dt) {
            result.warnings.push_back("segment " + std::to_string(seg) +
                                      ": time constant below 5 integration steps (stiff)");
        }
    }

    auto params_at = [&](double t) -> std::span<const double> {
        std::size_t idx = 0;
        while (idx + 1 < schedule.segments.size() &&
               schedule.segments[idx + 1].start_time_s <= t) {
            ++idx;
        }
        return schedule.segments[idx].params;
    };

    std::vector<double> v(n, 0.0);
    std::vector<double> i(n, 0.0);
    double state[2] = {0.0, 0.0};
    double k1[2], k2[2], k3[2], k4[2], tmp[2];
    const int dim = model.state_dim;

    std::size_t written = 0;
    auto emit = [&](double t) {
        v[written] = excitation_value(excitation, t);
        i[written] = model.output(t, state, params_at(t), excitation);
        if (!std::isfinite(i[written])) {
            raise(ErrorCode::InvalidParams,
                  "integration diverged near t = " + std::to_string(t) +
                      " s; the circuit is too stiff for the chosen oversampling");
        }
        ++written;
    };

    emit(0.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double t_prev = static_cast<double>(k - 1) * h;
        for (int sub = 0; sub < oversample; ++sub) {
            const double t = t_prev + static_cast<double>(sub) * dt;
            if (dim == 0) break;
            const auto p1 = params_at(t);
            model.deriv(t, state, p1, excitation, k1);
            for (int d = 0; d < dim; ++d) tmp[d] = state[d] + 0.5 * dt * k1[d];
            const auto p2 = params_at(t + 0.5 * dt);
            model.deriv(t + 0.5 * dt, tmp, p2, excitation, k2);
            for (int d = 0; d < dim; ++d) tmp[d] = state[d] + 0.5 * dt * k2[d];
            model.deriv(t + 0.5 * dt, tmp, p2, excitation, k3);
            for (int d = 0; d < dim; ++d) tmp[d] = state[d] + dt * k3[d];
            const auto p3 = params_at(t + dt);
            model.deriv(t + dt, tmp, p3, excitation, k4);
            for (int d = 0; d < dim; ++d) {
                state[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
            }
        }
        emit(static_cast<double>(k) * h);
    }

    result.frame = MeasurementFrame(Waveform(std::move(v), h, 0.0), Waveform(std::move(i), h, 0.0));
    return result;
}

MeasurementFrame corrupt(const MeasurementFrame& frame, const CorruptionSpec& spec) {
    std::vector<double> v(frame.voltage().samples());
    std::vector<double> i(frame.current().samples());

    if (spec.snr_db) {
        const double factor = std::pow(10.0, -(*spec.snr_db) / 20.0);
        const std::uint64_t seed_v = spec.seed * 0x9E3779B97F4A7C15ULL + 1ULL;
        const std::uint64_t seed_i = spec.seed * 0x9E3779B97F4A7C15ULL + 2ULL;
        const std::vector<double> nv = scaled_noise(v.size(), rms(v) * factor, seed_v);
        const std::vector<double> ni = scaled_noise(i.size(), rms(i) * factor, seed_i);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += nv[k];
        for (std::size_t k = 0; k < i.size(); ++k) i[k] += ni[k];
    }
    if (spec.adc_lsb) {
        if (!(*spec.adc_lsb > 0.0)) {
            raise(ErrorCode::InvalidParams, "quantizer step must be positive");
        }
        const double lsb = *spec.adc_lsb;
        for (double& x : v) x = lsb * std::round(x / lsb);
        for (double& x : i) x = lsb * std::round(x / lsb);
    }
    return MeasurementFrame(
        Waveform(std::move(v), frame.sample_interval_s(), frame.voltage().start_time_s()),
        Waveform(std::move(i), frame.sample_interval_s(), frame.current().start_time_s()));
}

} // namespace loadid
