#pragma once

#include "loadid/conditioning.hpp"
#include "loadid/estimators.hpp"

#include <json.hpp>

#include <string>

namespace loadid {

/// Write a trace as CSV: `time_s,<param...>,valid`. Invalid samples emit 0
/// for every parameter with valid = 0.
void write_trace_csv(const ParameterTrace& trace, const std::string& path);

nlohmann::json summary_to_json(const TraceSummary& summary);
nlohmann::json sweep_to_json(const SweepReport& report);

} // namespace loadid
