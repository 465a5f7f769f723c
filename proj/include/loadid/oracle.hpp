#pragma once

#include "loadid/estimators.hpp"
#include "loadid/signals.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace loadid {

struct HarmonicComponent {
    double frequency_hz = 0.0;
    double amplitude = 0.0;
    double phase_rad = 0.0;
};

/// Multi-tone excitation v(t) = sum_h A_h sin(2*pi*f_h*t + phi_h). Three-
/// element topologies are only identifiable with at least two components.
struct HarmonicExcitation {
    std::vector<HarmonicComponent> components;
};

struct ScheduleSegment {
    double start_time_s = 0.0;
    std::vector<double> params;
};

/// Piecewise-constant parameter schedule; segment start times strictly
/// increase and the first starts at 0.
struct ParameterSchedule {
    std::vector<ScheduleSegment> segments;
};

/// Measurement-chain corruption: additive white Gaussian noise at a target
/// per-channel SNR, then mid-tread uniform quantization. Reproducible per
/// seed.
struct CorruptionSpec {
    std::optional<double> snr_db;
    std::optional<double> adc_lsb;
    std::uint64_t seed = 0;
};

/// Complex admittance of a topology at angular frequency omega; parameter
/// order matches parameter_names(topology).
std::complex<double> admittance(Topology topology, std::span<const double> params, double omega);

/// Exact per-harmonic steady-state response of a linear topology, sampled
/// uniformly. Free of integrator error by construction.
MeasurementFrame steady_state_frame(Topology topology, const std::vector<double>& params,
                                    const HarmonicExcitation& excitation, double duration_s,
                                    double sample_rate_hz);

struct TransientResult {
    MeasurementFrame frame;
    std::vector<std::string> warnings;
};

/// Integrate the topology's state-space ODE with a classical fixed-step
/// 4th-order scheme at oversample x sample_rate, then decimate. State is
/// continuous across parameter switches; segments whose time constant falls
/// under 5 integration steps are reported, not rejected.
TransientResult transient_frame(Topology topology, const ParameterSchedule& schedule,
                                const HarmonicExcitation& excitation, double duration_s,
                                double sample_rate_hz, int oversample = 10);

/// Apply the corruption model. The realized per-channel SNR matches the
/// requested value exactly over the record (the noise vector is rescaled).
MeasurementFrame corrupt(const MeasurementFrame& frame, const CorruptionSpec& spec);

} // namespace loadid
