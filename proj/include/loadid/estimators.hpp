#pragma once

#include "loadid/fir_diff.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace loadid {

/// Equivalent-circuit topologies identified from a voltage/current frame.
enum class Topology {
    SeriesRL,
    SeriesRLC,
    ParallelGL,
    ParallelGCL,
    ParallelRC,
    ParallelRSeriesRL,
};

/// Highest signal derivative the per-sample solve of a topology consumes.
int required_derivative_order(Topology topology);

/// Ordered parameter labels with unit suffixes, e.g. {"R_ohm", "L_H"}.
const std::vector<std::string>& parameter_names(Topology topology);

const char* topology_name(Topology topology);
Topology parse_topology(const std::string& name);

/// Per-sample estimated parameter tuple plus validity mask. Invalid samples
/// carry no finite-value guarantee and are excluded from all statistics.
struct ParameterTrace {
    Topology topology = Topology::SeriesRL;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values; // one column per parameter
    std::vector<std::uint8_t> valid;
    double sample_interval_s = 0.0;
    double start_time_s = 0.0;

    [[nodiscard]] std::size_t param_count() const { return values.size(); }
    [[nodiscard]] std::size_t size() const { return valid.size(); }
};

/// Determinant cofactors of the hybrid R||(R+L) solve, kept per sample so the
/// intermediate quantities stay inspectable.
struct HybridCofactors {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;
    double x = 0.0;
};

struct EstimatorOptions {
    /// A sample is invalid when the solve's determinant magnitude falls
    /// below epsilon_rel times the product of the RMS values of the matrix
    /// column signals.
    double epsilon_rel = 1e-6;
};

ParameterTrace estimate_series_rl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                  const EstimatorOptions& options = {});
ParameterTrace estimate_series_rlc(const DerivativeStack& vstack, const DerivativeStack& istack,
                                   const EstimatorOptions& options = {});
ParameterTrace estimate_parallel_gl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                    const EstimatorOptions& options = {});
ParameterTrace estimate_parallel_gcl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                     const EstimatorOptions& options = {});
ParameterTrace estimate_parallel_rc(const DerivativeStack& vstack, const DerivativeStack& istack,
                                    const EstimatorOptions& options = {});

struct HybridEstimate {
    ParameterTrace trace;
    std::vector<HybridCofactors> cofactors;
};

HybridEstimate estimate_hybrid_r_rl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                    const EstimatorOptions& options = {});

/// Dispatch to the estimator for `topology` (hybrid cofactors are dropped).
ParameterTrace estimate(Topology topology, const StackPair& stacks,
                        const EstimatorOptions& options = {});

/// Centered moving average over valid samples only; an output sample is
/// valid iff at least half of its (boundary-clipped) window is valid.
ParameterTrace smooth_trace(const ParameterTrace& trace, int window);

struct ParamSummary {
    std::string name;
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    std::optional<double> nominal;
    std::optional<double> percent_error;
};

struct TraceSummary {
    std::vector<ParamSummary> params;
    double valid_fraction = 0.0;
    std::size_t valid_count = 0;
};

/// Statistics over valid samples; percent_error = 100*|median - nominal| /
/// |nominal| per parameter when a nominal tuple is given.
TraceSummary summarize(const ParameterTrace& trace,
                       const std::optional<std::vector<double>>& nominal = {});

} // namespace loadid
