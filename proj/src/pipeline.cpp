#include "loadid/pipeline.hpp"

#include "loadid/conditioning.hpp"

#include <utility>

namespace loadid {

PipelineResult run_pipeline(const MeasurementFrame& frame, const PipelineConfig& config) {
    Waveform v = remove_dc(frame.voltage());
    Waveform i = remove_dc(frame.current());

    std::size_t trim = 0;
    if (config.filter_order > 0 && config.filter_cutoff_hz > 0.0) {
        LowpassSpec spec;
        spec.order = config.filter_order;
        spec.cutoff_hz = config.filter_cutoff_hz;
        const LowpassFilter filter = design_lowpass(spec, 1.0 / frame.sample_interval_s());
        // Both channels go through the identical filter so their phase
        // relationship is preserved exactly.
        v = zero_phase_filter(filter, v);
        i = zero_phase_filter(filter, i);
        trim = 3 * static_cast<std::size_t>(config.filter_order);
    }

    MeasurementFrame conditioned(std::move(v), std::move(i));
    StackPair stacks =
        build_stack(conditioned, required_derivative_order(config.topology), config.diff_taps);
    if (trim > 0) {
        stacks.voltage.narrow_valid_range(trim);
        stacks.current.narrow_valid_range(trim);
    }

    PipelineResult result;
    result.trace = estimate(config.topology, stacks, EstimatorOptions{config.epsilon_rel});
    result.smoothed = smooth_trace(result.trace, config.smooth_window);
    std::size_t valid = 0;
    for (auto f : result.smoothed.valid) valid += f ? 1 : 0;
    result.valid_fraction = result.smoothed.size() == 0
                                ? 0.0
                                : static_cast<double>(valid) /
                                      static_cast<double>(result.smoothed.size());
    if (valid > 0) {
        result.summary = summarize(result.smoothed, config.nominal);
    }
    return result;
}

} // namespace loadid
