#pragma once

#include "loadid/estimators.hpp"
#include "loadid/signals.hpp"

#include <optional>
#include <vector>

namespace loadid {

/// Resolved processing configuration shared by the CLI and the filter sweep.
/// filter_order == 0 (or cutoff_hz == 0) disables the low-pass stage.
struct PipelineConfig {
    Topology topology = Topology::SeriesRL;
    int filter_order = 4;
    double filter_cutoff_hz = 1000.0;
    int diff_taps = 21;
    int smooth_window = 500;
    double epsilon_rel = 1e-6;
    std::optional<std::vector<double>> nominal;
};

struct PipelineResult {
    ParameterTrace trace;                  // per-sample estimates
    ParameterTrace smoothed;               // moving-average trace
    std::optional<TraceSummary> summary;   // absent when no sample survived masking
    double valid_fraction = 0.0;           // of the smoothed trace
};

/// DC removal -> identical zero-phase filtering of both channels ->
/// derivative stacks -> per-sample estimation -> smoothing -> summary.
PipelineResult run_pipeline(const MeasurementFrame& frame, const PipelineConfig& config);

} // namespace loadid
