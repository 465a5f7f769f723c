#pragma once

#include "loadid/conditioning.hpp"
#include "loadid/estimators.hpp"
#include "loadid/signals.hpp"

#include <string>

namespace loadid {

/// Stacked strip chart: one row per trace parameter followed by the voltage
/// and current rows. Invalid samples break the polyline.
void write_trace_plot(const ParameterTrace& trace, const MeasurementFrame& frame,
                      const std::string& path);

/// One histogram panel per parameter of a sweep entry, with the statistics
/// printed in a text box.
void write_sweep_histograms(const SweepEntry& entry, const std::string& path);

} // namespace loadid
