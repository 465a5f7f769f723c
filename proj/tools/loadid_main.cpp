// Command-line front end: synthesize test frames, identify circuit
// parameters from CSV records, and sweep filter configurations.

#include "loadid/conditioning.hpp"
#include "loadid/errors.hpp"
#include "loadid/estimators.hpp"
#include "loadid/oracle.hpp"
#include "loadid/pipeline.hpp"
#include "loadid/report.hpp"
#include "loadid/signals.hpp"
#include "loadid/svg_plot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

int exit_code_for(loadid::ErrorCode code) {
    switch (code) {
        case loadid::ErrorCode::InvalidConfig:
        case loadid::ErrorCode::InvalidCutoff:
        case loadid::ErrorCode::InsufficientTaps:
        case loadid::ErrorCode::InvalidParams:
            return 2;
        case loadid::ErrorCode::MalformedFile:
        case loadid::ErrorCode::NonUniformSampling:
        case loadid::ErrorCode::EmptyFile:
        case loadid::ErrorCode::IoFailure:
        case loadid::ErrorCode::SignalTooShort:
            return 3;
        case loadid::ErrorCode::SingularDesign:
        case loadid::ErrorCode::StackMismatch:
        case loadid::ErrorCode::NoValidSamples:
            return 4;
    }
    return 4;
}

int fail(loadid::ErrorCode code, const std::string& message) {
    const json err = {{"error", {{"code", loadid::to_string(code)}, {"message", message}}}};
    std::cout << err.dump(2) << std::endl;
    return exit_code_for(code);
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            loadid::raise(loadid::ErrorCode::InvalidConfig,
                          std::string("cannot parse ") + what + " entry '" + item + "'");
        }
    }
    if (out.empty()) {
        loadid::raise(loadid::ErrorCode::InvalidConfig, std::string(what) + " list is empty");
    }
    return out;
}

// "freq:amp[:phase]" components separated by commas.
loadid::HarmonicExcitation parse_harmonics(const std::string& text) {
    loadid::HarmonicExcitation excitation;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        loadid::HarmonicComponent c;
        const int got = std::sscanf(item.c_str(), "%lf:%lf:%lf", &c.frequency_hz, &c.amplitude,
                                    &c.phase_rad);
        if (got < 2) {
            loadid::raise(loadid::ErrorCode::InvalidConfig,
                          "cannot parse harmonic '" + item + "' (expect freq:amp[:phase])");
        }
        if (got == 2) c.phase_rad = 0.0;
        excitation.components.push_back(c);
    }
    return excitation;
}

// "t0:p1,p2[,p3];t1:p1,p2[,p3];..."
loadid::ParameterSchedule parse_schedule(const std::string& text) {
    loadid::ParameterSchedule schedule;
    std::stringstream ss(text);
    std::string segment;
    while (std::getline(ss, segment, ';')) {
        const std::size_t colon = segment.find(':');
        if (colon == std::string::npos) {
            loadid::raise(loadid::ErrorCode::InvalidConfig,
                          "cannot parse schedule segment '" + segment + "' (expect t:params)");
        }
        loadid::ScheduleSegment seg;
        try {
            seg.start_time_s = std::stod(segment.substr(0, colon));
        } catch (const std::exception&) {
            loadid::raise(loadid::ErrorCode::InvalidConfig,
                          "cannot parse schedule time in '" + segment + "'");
        }
        seg.params = parse_number_list(segment.substr(colon + 1), "schedule parameter");
        schedule.segments.push_back(std::move(seg));
    }
    return schedule;
}

json excitation_to_json(const loadid::HarmonicExcitation& excitation) {
    json arr = json::array();
    for (const auto& c : excitation.components) {
        arr.push_back({{"frequency_hz", c.frequency_hz},
                       {"amplitude", c.amplitude},
                       {"phase_rad", c.phase_rad}});
    }
    return arr;
}

struct CommonOptions {
    std::string input;
    std::string output_dir = ".";
    std::string topology = "series_rl";
    double sample_rate_hz = 10000.0;
    int filter_order = 4;
    double filter_cutoff_hz = 1000.0;
    int diff_taps = 21;
    int smooth_window = 500;
    double epsilon = 1e-6;
    std::string nominal;
    bool plot = false;
    std::uint64_t seed = 0;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        loadid::raise(loadid::ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        loadid::raise(loadid::ErrorCode::IoFailure, "write to '" + path.string() + "' failed");
    }
}

json config_echo(const CommonOptions& opt, const std::string& command) {
    json cfg = {
        {"command", command},
        {"input", opt.input},
        {"output_dir", opt.output_dir},
        {"topology", opt.topology},
        {"sample_rate_hz", opt.sample_rate_hz},
        {"filter_order", opt.filter_order},
        {"filter_cutoff_hz", opt.filter_cutoff_hz},
        {"diff_taps", opt.diff_taps},
        {"smooth_window", opt.smooth_window},
        {"epsilon", opt.epsilon},
        {"plot", opt.plot},
        {"seed", opt.seed},
    };
    cfg["nominal"] = opt.nominal.empty() ? json(nullptr) : json(opt.nominal);
    return cfg;
}

int run_identify(const CommonOptions& opt) {
    loadid::PipelineConfig config;
    config.topology = loadid::parse_topology(opt.topology);
    config.filter_order = opt.filter_order;
    config.filter_cutoff_hz = opt.filter_cutoff_hz;
    config.diff_taps = opt.diff_taps;
    config.smooth_window = opt.smooth_window;
    config.epsilon_rel = opt.epsilon;
    if (!opt.nominal.empty()) config.nominal = parse_number_list(opt.nominal, "nominal");

    const loadid::MeasurementFrame frame = loadid::load_csv(opt.input);

    const loadid::PipelineResult result = loadid::run_pipeline(frame, config);

    const std::filesystem::path dir(opt.output_dir);
    std::filesystem::create_directories(dir);
    loadid::write_trace_csv(result.smoothed, (dir / "trace.csv").string());

    json summary = result.summary ? loadid::summary_to_json(*result.summary)
                                  : json{{"params", json::array()},
                                         {"valid_fraction", result.valid_fraction},
                                         {"valid_count", 0}};
    summary["config"] = config_echo(opt, "identify");
    json warnings = json::array();
    if (result.valid_fraction < 0.5) {
        warnings.push_back("low_valid_fraction: only " + std::to_string(result.valid_fraction) +
                           " of samples produced a well-conditioned solve (the model may be "
                           "unidentifiable under this excitation)");
    }
    summary["warnings"] = warnings;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    if (opt.plot) {
        loadid::write_trace_plot(result.smoothed, frame, (dir / "plot.svg").string());
    }
    std::cout << "wrote " << (dir / "trace.csv").string() << " and "
              << (dir / "summary.json").string() << std::endl;
    return 0;
}

int run_sweep(const CommonOptions& opt, const std::string& orders_text,
              const std::string& cutoffs_text) {
    if (opt.nominal.empty()) {
        loadid::raise(loadid::ErrorCode::InvalidConfig,
                      "sweep requires --nominal parameters for percent-error ranking");
    }
    const loadid::Topology topology = loadid::parse_topology(opt.topology);
    const std::vector<double> nominal = parse_number_list(opt.nominal, "nominal");
    const loadid::MeasurementFrame frame = loadid::load_csv(opt.input);

    loadid::SweepGrid grid = loadid::SweepGrid::standard();
    if (!orders_text.empty()) {
        grid.orders.clear();
        for (double v : parse_number_list(orders_text, "order")) {
            grid.orders.push_back(static_cast<int>(v));
        }
    }
    if (!cutoffs_text.empty()) grid.cutoffs_hz = parse_number_list(cutoffs_text, "cutoff");

    loadid::SweepOptions options;
    options.diff_taps = opt.diff_taps;
    options.smooth_window = opt.smooth_window;
    options.epsilon_rel = opt.epsilon;
    const loadid::SweepReport report = loadid::filter_sweep(frame, topology, nominal, grid, options);

    const std::filesystem::path dir(opt.output_dir);
    std::filesystem::create_directories(dir);
    json doc = loadid::sweep_to_json(report);
    doc["config"] = config_echo(opt, "sweep");
    write_text(dir / "sweep.json", doc.dump(2) + "\n");

    for (const loadid::SweepEntry& entry : report.entries) {
        if (!entry.ok) continue;
        char name[64];
        std::snprintf(name, sizeof(name), "hist_o%02d_c%04.0f.svg", entry.spec.order,
                      entry.spec.cutoff_hz);
        loadid::write_sweep_histograms(entry, (dir / name).string());
    }

    if (report.chosen_index < 0) {
        loadid::raise(loadid::ErrorCode::NoValidSamples, "every sweep entry failed");
    }
    const auto& chosen = report.entries[static_cast<std::size_t>(report.chosen_index)];
    std::cout << "chosen: order " << chosen.spec.order << ", cutoff " << chosen.spec.cutoff_hz
              << " Hz (score " << chosen.score << ")" << std::endl;
    return 0;
}

int run_synth(const CommonOptions& opt, const std::string& params_text,
              const std::string& schedule_text, const std::string& harmonics_text,
              double duration_s, double snr_db, double adc_lsb, int oversample) {
    const loadid::Topology topology = loadid::parse_topology(opt.topology);
    const loadid::HarmonicExcitation excitation =
        harmonics_text.empty() ? parse_harmonics("50:100:0,150:20:0")
                               : parse_harmonics(harmonics_text);

    json truth = {{"topology", opt.topology},
                  {"duration_s", duration_s},
                  {"sample_rate_hz", opt.sample_rate_hz},
                  {"excitation", excitation_to_json(excitation)}};

    std::optional<loadid::MeasurementFrame> frame;
    std::vector<std::string> warnings;
    if (!schedule_text.empty()) {
        const loadid::ParameterSchedule schedule = parse_schedule(schedule_text);
        loadid::TransientResult result = loadid::transient_frame(
            topology, schedule, excitation, duration_s, opt.sample_rate_hz, oversample);
        frame = std::move(result.frame);
        warnings = std::move(result.warnings);
        json segs = json::array();
        for (const auto& seg : schedule.segments) {
            segs.push_back({{"start_time_s", seg.start_time_s}, {"params", seg.params}});
        }
        truth["schedule"] = segs;
    } else {
        if (params_text.empty()) {
            loadid::raise(loadid::ErrorCode::InvalidConfig,
                          "synth needs --params (steady state) or --schedule (transient)");
        }
        const std::vector<double> params = parse_number_list(params_text, "circuit parameter");
        frame = loadid::steady_state_frame(topology, params, excitation, duration_s,
                                           opt.sample_rate_hz);
        truth["params"] = params;
    }

    loadid::CorruptionSpec corruption;
    if (snr_db > 0.0) corruption.snr_db = snr_db;
    if (adc_lsb > 0.0) corruption.adc_lsb = adc_lsb;
    corruption.seed = opt.seed;
    if (corruption.snr_db || corruption.adc_lsb) {
        frame = loadid::corrupt(*frame, corruption);
        truth["corruption"] = {
            {"snr_db", corruption.snr_db ? json(*corruption.snr_db) : json(nullptr)},
            {"adc_lsb", corruption.adc_lsb ? json(*corruption.adc_lsb) : json(nullptr)},
            {"seed", corruption.seed}};
    }

    const std::filesystem::path dir(opt.output_dir);
    std::filesystem::create_directories(dir);
    loadid::save_csv(*frame, (dir / "frame.csv").string());
    truth["config"] = config_echo(opt, "synth");
    json warn = json::array();
    for (const std::string& w : warnings) warn.push_back(w);
    truth["warnings"] = warn;
    write_text(dir / "truth.json", truth.dump(2) + "\n");

    std::cout << "wrote " << (dir / "frame.csv").string() << " and "
              << (dir / "truth.json").string() << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-domain identification of equivalent-circuit parameters from "
                 "sampled voltage/current records"};
    app.require_subcommand(1);
    app.fallthrough(true);
    app.set_config("--config", "", "flat key-value config file; command-line flags win");

    CommonOptions opt;
    std::string orders_text;
    std::string cutoffs_text;
    std::string params_text;
    std::string schedule_text;
    std::string harmonics_text;
    double duration_s = 1.0;
    double snr_db = 0.0;
    double adc_lsb = 0.0;
    int oversample = 10;

    auto add_common = [&](CLI::App* cmd, bool needs_input) {
        if (needs_input) {
            cmd->add_option("--input", opt.input, "input frame CSV")->required();
        }
        cmd->add_option("--output-dir", opt.output_dir, "directory for result files");
        cmd->add_option("--topology", opt.topology,
                        "series_rl | series_rlc | parallel_gl | parallel_gcl | parallel_rc | "
                        "parallel_r_series_rl");
        cmd->add_option("--sample-rate-hz", opt.sample_rate_hz, "sample rate for synthesis");
        cmd->add_option("--filter-order", opt.filter_order, "low-pass order (0 disables)");
        cmd->add_option("--filter-cutoff-hz", opt.filter_cutoff_hz, "low-pass cutoff (0 disables)");
        cmd->add_option("--diff-taps", opt.diff_taps, "differentiator tap count (odd)");
        cmd->add_option("--smooth-window", opt.smooth_window, "moving-average window in samples");
        cmd->add_option("--epsilon", opt.epsilon, "relative validity threshold for solves");
        cmd->add_option("--nominal", opt.nominal, "comma-separated nominal parameters");
        cmd->add_flag("--plot", opt.plot, "write SVG plots");
        cmd->add_option("--seed", opt.seed, "noise seed");
    };

    CLI::App* identify = app.add_subcommand("identify", "estimate parameters from a CSV record");
    add_common(identify, true);

    CLI::App* sweep = app.add_subcommand("sweep", "rank filter configurations on a record");
    add_common(sweep, true);
    sweep->add_option("--orders", orders_text, "comma-separated filter orders");
    sweep->add_option("--cutoffs-hz", cutoffs_text, "comma-separated cutoffs");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic frame with ground truth");
    add_common(synth, false);
    synth->add_option("--params", params_text, "steady-state circuit parameters");
    synth->add_option("--schedule", schedule_text, "piecewise schedule t:params;t:params");
    synth->add_option("--harmonics", harmonics_text, "freq:amp[:phase] components");
    synth->add_option("--duration-s", duration_s, "record length in seconds");
    synth->add_option("--snr-db", snr_db, "additive noise SNR (0 disables)");
    synth->add_option("--adc-lsb", adc_lsb, "quantizer step (0 disables)");
    synth->add_option("--oversample", oversample, "ODE oversampling factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        const json err = {{"error", {{"code", "InvalidConfig"}, {"message", e.what()}}}};
        std::cout << err.dump(2) << std::endl;
        return 2;
    }

    try {
        if (identify->parsed()) return run_identify(opt);
        if (sweep->parsed()) return run_sweep(opt, orders_text, cutoffs_text);
        if (synth->parsed()) {
            return run_synth(opt, params_text, schedule_text, harmonics_text, duration_s, snr_db,
                             adc_lsb, oversample);
        }
    } catch (const loadid::Error& e) {
        return fail(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail(loadid::ErrorCode::IoFailure, e.what());
    }
    return 2;
}
