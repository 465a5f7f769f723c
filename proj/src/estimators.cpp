#include "loadid/estimators.hpp"

#include "loadid/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>

namespace loadid {

namespace {

struct Levels {
    std::array<std::span<const double>, 5> v{};
    std::array<std::span<const double>, 5> i{};
    std::size_t begin = 0;
    std::size_t end = 0;
    double h = 0.0;
    double t0 = 0.0;
};

Levels check_stacks(const DerivativeStack& vstack, const DerivativeStack& istack,
                    int v_order, int i_order) {
    if (vstack.base.size() != istack.base.size() ||
        vstack.base.sample_interval_s() != istack.base.sample_interval_s() ||
        vstack.valid_begin != istack.valid_begin || vstack.valid_end != istack.valid_end) {
        raise(ErrorCode::StackMismatch, "voltage and current stacks are not aligned");
    }
    if (vstack.valid_begin >= vstack.valid_end || vstack.valid_end > vstack.base.size()) {
        raise(ErrorCode::StackMismatch, "stack valid range is empty");
    }
    for (int k = 1; k <= v_order; ++k) {
        if (!vstack.has_level(k)) {
            raise(ErrorCode::StackMismatch,
                  "voltage stack lacks derivative order " + std::to_string(k));
        }
    }
    for (int k = 1; k <= i_order; ++k) {
        if (!istack.has_level(k)) {
            raise(ErrorCode::StackMismatch,
                  "current stack lacks derivative order " + std::to_string(k));
        }
    }
    Levels lv;
    for (int k = 0; k <= v_order; ++k) lv.v[static_cast<std::size_t>(k)] = vstack.level(k).view();
    for (int k = 0; k <= i_order; ++k) lv.i[static_cast<std::size_t>(k)] = istack.level(k).view();
    lv.begin = vstack.valid_begin;
    lv.end = vstack.valid_end;
    lv.h = vstack.base.sample_interval_s();
    lv.t0 = vstack.base.start_time_s();
    return lv;
}

double signal_rms(std::span<const double> s, std::size_t begin, std::size_t end) {
    long double acc = 0.0L;
    for (std::size_t n = begin; n < end; ++n) {
        acc += static_cast<long double>(s[n]) * s[n];
    }
    const std::size_t count = end - begin;
    if (count == 0) return 0.0;
    return std::sqrt(static_cast<double>(acc / static_cast<long double>(count)));
}

// Determinant scale for the validity threshold: the permanent of the matrix
// of per-entry signal RMS values. Every transversal product the determinant
// can draw on contributes, so |det| / perm is a dimensionless measure of how
// far the solve sits from total cancellation. A product of column norms is
// not usable here: the columns mix derivative orders, which inflates that
// bound by powers of the excitation frequency.
double perm2(double a11, double a12, double a21, double a22) {
    return a11 * a22 + a12 * a21;
}

double perm3(const std::array<std::array<double, 3>, 3>& s) {
    return s[0][0] * (s[1][1] * s[2][2] + s[1][2] * s[2][1]) +
           s[0][1] * (s[1][0] * s[2][2] + s[1][2] * s[2][0]) +
           s[0][2] * (s[1][0] * s[2][1] + s[1][1] * s[2][0]);
}

ParameterTrace make_trace(Topology topology, std::size_t n, double h, double t0) {
    ParameterTrace trace;
    trace.topology = topology;
    trace.names = parameter_names(topology);
    trace.values.assign(trace.names.size(), std::vector<double>(n, 0.0));
    trace.valid.assign(n, 0);
    trace.sample_interval_s = h;
    trace.start_time_s = t0;
    return trace;
}

double det3(double a11, double a12, double a13,
            double a21, double a22, double a23,
            double a31, double a32, double a33) {
    return a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) +
           a13 * (a21 * a32 - a22 * a31);
}

bool all_finite(std::initializer_list<double> xs) {
    for (double x : xs) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

} // namespace

int required_derivative_order(Topology topology) {
    switch (topology) {
        case Topology::SeriesRL:          return 3;
        case Topology::SeriesRLC:         return 4;
        case Topology::ParallelGL:        return 3;
        case Topology::ParallelGCL:       return 4;
        case Topology::ParallelRC:        return 2;
        case Topology::ParallelRSeriesRL: return 3;
    }
    raise(ErrorCode::InvalidConfig, "unknown topology");
}

const std::vector<std::string>& parameter_names(Topology topology) {
    static const std::vector<std::string> series_rl = {"R_ohm", "L_H"};
    static const std::vector<std::string> series_rlc = {"S_Finv", "R_ohm", "L_H"};
    static const std::vector<std::string> parallel_gl = {"G_S", "Gamma_Hinv"};
    static const std::vector<std::string> parallel_gcl = {"C_F", "G_S", "Gamma_Hinv"};
    static const std::vector<std::string> parallel_rc = {"G_S", "C_F"};
    static const std::vector<std::string> hybrid = {"Gp_S", "Rser_ohm", "Lser_H"};
    switch (topology) {
        case Topology::SeriesRL:          return series_rl;
        case Topology::SeriesRLC:         return series_rlc;
        case Topology::ParallelGL:        return parallel_gl;
        case Topology::ParallelGCL:       return parallel_gcl;
        case Topology::ParallelRC:        return parallel_rc;
        case Topology::ParallelRSeriesRL: return hybrid;
    }
    raise(ErrorCode::InvalidConfig, "unknown topology");
}

const char* topology_name(Topology topology) {
    switch (topology) {
        case Topology::SeriesRL:          return "series_rl";
        case Topology::SeriesRLC:         return "series_rlc";
        case Topology::ParallelGL:        return "parallel_gl";
        case Topology::ParallelGCL:       return "parallel_gcl";
        case Topology::ParallelRC:        return "parallel_rc";
        case Topology::ParallelRSeriesRL: return "parallel_r_series_rl";
    }
    return "unknown";
}

Topology parse_topology(const std::string& name) {
    if (name == "series_rl") return Topology::SeriesRL;
    if (name == "series_rlc") return Topology::SeriesRLC;
    if (name == "parallel_gl") return Topology::ParallelGL;
    if (name == "parallel_gcl") return Topology::ParallelGCL;
    if (name == "parallel_rc") return Topology::ParallelRC;
    if (name == "parallel_r_series_rl") return Topology::ParallelRSeriesRL;
    raise(ErrorCode::InvalidConfig, "unknown topology '" + name + "'");
}

ParameterTrace estimate_series_rl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                  const EstimatorOptions& options) {
    const Levels s = check_stacks(vstack, istack, 2, 3);
    ParameterTrace trace = make_trace(Topology::SeriesRL, vstack.base.size(), s.h, s.t0);

    const double s1 = signal_rms(s.i[1], s.begin, s.end);
    const double s2 = signal_rms(s.i[2], s.begin, s.end);
    const double s3 = signal_rms(s.i[3], s.begin, s.end);
    const double threshold = options.epsilon_rel * perm2(s1, s2, s2, s3);

    for (std::size_t n = s.begin; n < s.end; ++n) {
        const double det = s.i[1][n] * s.i[3][n] - s.i[2][n] * s.i[2][n];
        if (std::abs(det) < threshold) continue;
        const double r = (s.v[1][n] * s.i[3][n] - s.i[2][n] * s.v[2][n]) / det;
        const double l = (s.i[1][n] * s.v[2][n] - s.v[1][n] * s.i[2][n]) / det;
        if (!all_finite({r, l})) continue;
        trace.values[0][n] = r;
        trace.values[1][n] = l;
        trace.valid[n] = 1;
    }
    return trace;
}

ParameterTrace estimate_parallel_gl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                    const EstimatorOptions& options) {
    const Levels s = check_stacks(vstack, istack, 3, 3);
    ParameterTrace trace = make_trace(Topology::ParallelGL, vstack.base.size(), s.h, s.t0);

    const double s1 = signal_rms(s.v[1], s.begin, s.end);
    const double s2 = signal_rms(s.v[2], s.begin, s.end);
    const double s3 = signal_rms(s.v[3], s.begin, s.end);
    const double threshold = options.epsilon_rel * perm2(s1, s2, s2, s3);

    // Same 2x2 solve as the series case with the voltage stack generating the
    // matrix and the current derivatives shifted up one order on the right.
    for (std::size_t n = s.begin; n < s.end; ++n) {
        const double det = s.v[1][n] * s.v[3][n] - s.v[2][n] * s.v[2][n];
        if (std::abs(det) < threshold) continue;
        const double gamma = (s.i[2][n] * s.v[3][n] - s.v[2][n] * s.i[3][n]) / det;
        const double g = (s.v[1][n] * s.i[3][n] - s.i[2][n] * s.v[2][n]) / det;
        if (!all_finite({g, gamma})) continue;
        trace.values[0][n] = g;
        trace.values[1][n] = gamma;
        trace.valid[n] = 1;
    }
    return trace;
}

ParameterTrace estimate_series_rlc(const DerivativeStack& vstack, const DerivativeStack& istack,
                                   const EstimatorOptions& options) {
    const Levels s = check_stacks(vstack, istack, 3, 4);
    ParameterTrace trace = make_trace(Topology::SeriesRLC, vstack.base.size(), s.h, s.t0);

    std::array<double, 5> sig{};
    for (int k = 0; k <= 4; ++k) sig[static_cast<std::size_t>(k)] = signal_rms(s.i[static_cast<std::size_t>(k)], s.begin, s.end);
    const double threshold = options.epsilon_rel * perm3({{{sig[0], sig[1], sig[2]},
                                                           {sig[1], sig[2], sig[3]},
                                                           {sig[2], sig[3], sig[4]}}});

    for (std::size_t n = s.begin; n < s.end; ++n) {
        const double i0 = s.i[0][n], i1 = s.i[1][n], i2 = s.i[2][n], i3 = s.i[3][n], i4 = s.i[4][n];
        const double det = det3(i0, i1, i2, i1, i2, i3, i2, i3, i4);
        if (std::abs(det) < threshold) continue;
        const double v1 = s.v[1][n], v2 = s.v[2][n], v3 = s.v[3][n];
        const double elastance = det3(v1, i1, i2, v2, i2, i3, v3, i3, i4) / det;
        const double r = det3(i0, v1, i2, i1, v2, i3, i2, v3, i4) / det;
        const double l = det3(i0, i1, v1, i1, i2, v2, i2, i3, v3) / det;
        if (!all_finite({elastance, r, l})) continue;
        trace.values[0][n] = elastance;
        trace.values[1][n] = r;
        trace.values[2][n] = l;
        trace.valid[n] = 1;
    }
    return trace;
}

ParameterTrace estimate_parallel_gcl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                     const EstimatorOptions& options) {
    const Levels s = check_stacks(vstack, istack, 4, 3);
    ParameterTrace trace = make_trace(Topology::ParallelGCL, vstack.base.size(), s.h, s.t0);

    std::array<double, 5> sig{};
    for (int k = 0; k <= 4; ++k) sig[static_cast<std::size_t>(k)] = signal_rms(s.v[static_cast<std::size_t>(k)], s.begin, s.end);
    const double threshold = options.epsilon_rel * perm3({{{sig[0], sig[1], sig[2]},
                                                           {sig[1], sig[2], sig[3]},
                                                           {sig[2], sig[3], sig[4]}}});

    // Columns v, v', v'' pair with Gamma, G, C; the right-hand side is
    // (i', i'', i''').
    for (std::size_t n = s.begin; n < s.end; ++n) {
        const double v0 = s.v[0][n], v1 = s.v[1][n], v2 = s.v[2][n], v3 = s.v[3][n], v4 = s.v[4][n];
        const double det = det3(v0, v1, v2, v1, v2, v3, v2, v3, v4);
        if (std::abs(det) < threshold) continue;
        const double i1 = s.i[1][n], i2 = s.i[2][n], i3 = s.i[3][n];
        const double gamma = det3(i1, v1, v2, i2, v2, v3, i3, v3, v4) / det;
        const double g = det3(v0, i1, v2, v1, i2, v3, v2, i3, v4) / det;
        const double c = det3(v0, v1, i1, v1, v2, i2, v2, v3, i3) / det;
        if (!all_finite({c, g, gamma})) continue;
        trace.values[0][n] = c;
        trace.values[1][n] = g;
        trace.values[2][n] = gamma;
        trace.valid[n] = 1;
    }
    return trace;
}

ParameterTrace estimate_parallel_rc(const DerivativeStack& vstack, const DerivativeStack& istack,
                                    const EstimatorOptions& options) {
    const Levels s = check_stacks(vstack, istack, 2, 1);
    ParameterTrace trace = make_trace(Topology::ParallelRC, vstack.base.size(), s.h, s.t0);

    const double s0 = signal_rms(s.v[0], s.begin, s.end);
    const double s1 = signal_rms(s.v[1], s.begin, s.end);
    const double s2 = signal_rms(s.v[2], s.begin, s.end);
    const double threshold = options.epsilon_rel * perm2(s0, s1, s1, s2);

    for (std::size_t n = s.begin; n < s.end; ++n) {
        const double det = s.v[0][n] * s.v[2][n] - s.v[1][n] * s.v[1][n];
        if (std::abs(det) < threshold) continue;
        const double g = (s.i[0][n] * s.v[2][n] - s.v[1][n] * s.i[1][n]) / det;
        const double c = (s.v[0][n] * s.i[1][n] - s.i[0][n] * s.v[1][n]) / det;
        if (!all_finite({g, c})) continue;
        trace.values[0][n] = g;
        trace.values[1][n] = c;
        trace.valid[n] = 1;
    }
    return trace;
}

HybridEstimate estimate_hybrid_r_rl(const DerivativeStack& vstack, const DerivativeStack& istack,
                                    const EstimatorOptions& options) {
    const Levels s = check_stacks(vstack, istack, 3, 3);
    HybridEstimate out;
    out.trace = make_trace(Topology::ParallelRSeriesRL, vstack.base.size(), s.h, s.t0);
    out.cofactors.assign(vstack.base.size(), {});

    // a2 and a4 are determinants of [[v',v,-i],[v'',v',-i'],[v''',v'',-i'']]
    // and [[v',v,-i'],[v'',v',-i''],[v''',v'',-i''']] columns; threshold each
    // against the permanent of its entry-RMS matrix.
    std::array<double, 4> sv{}, si{};
    for (int k = 0; k <= 3; ++k) {
        sv[static_cast<std::size_t>(k)] = signal_rms(s.v[static_cast<std::size_t>(k)], s.begin, s.end);
        si[static_cast<std::size_t>(k)] = signal_rms(s.i[static_cast<std::size_t>(k)], s.begin, s.end);
    }
    const double a2_threshold = options.epsilon_rel * perm3({{{sv[1], sv[0], si[0]},
                                                              {sv[2], sv[1], si[1]},
                                                              {sv[3], sv[2], si[2]}}});
    const double a4_threshold = options.epsilon_rel * perm3({{{sv[1], sv[0], si[1]},
                                                              {sv[2], sv[1], si[2]},
                                                              {sv[3], sv[2], si[3]}}});

    for (std::size_t n = s.begin; n < s.end; ++n) {
        const double v0 = s.v[0][n], v1 = s.v[1][n], v2 = s.v[2][n], v3 = s.v[3][n];
        const double i0 = s.i[0][n], i1 = s.i[1][n], i2 = s.i[2][n], i3 = s.i[3][n];

        const double a1 = i2 * (v0 * i2 - i1 * v1) - i3 * (v0 * i1 - i0 * v1) +
                          v2 * (i1 * i1 - i0 * i2);
        const double a2 = i2 * (v0 * v2 - v1 * v1) - v3 * (v0 * i1 - i0 * v1) +
                          v2 * (v1 * i1 - i0 * v2);
        const double a3 = i2 * (v1 * i2 - i1 * v2) - i3 * (v1 * i1 - i0 * v2) +
                          v3 * (i1 * i1 - i0 * i2);
        const double a4 = i3 * (v0 * v2 - v1 * v1) - v3 * (v0 * i2 - i1 * v1) +
                          v2 * (v1 * i2 - i1 * v2);
        out.cofactors[n] = {a1, a2, a3, a4, 0.0};

        if (std::abs(a2) < a2_threshold || std::abs(a4) < a4_threshold) continue;
        const double gp = a1 / a2;
        const double x = a3 / a4;
        out.cofactors[n].x = x;
        if (std::abs(x - gp) < options.epsilon_rel * (std::abs(x) + std::abs(gp))) continue;
        const double r_ser = 1.0 / (x - gp);
        const double l_ser = -r_ser * a2 / a4;
        if (!all_finite({gp, r_ser, l_ser})) continue;
        out.trace.values[0][n] = gp;
        out.trace.values[1][n] = r_ser;
        out.trace.values[2][n] = l_ser;
        out.trace.valid[n] = 1;
    }
    return out;
}

ParameterTrace estimate(Topology topology, const StackPair& stacks,
                        const EstimatorOptions& options) {
    switch (topology) {
        case Topology::SeriesRL:
            return estimate_series_rl(stacks.voltage, stacks.current, options);
        case Topology::SeriesRLC:
            return estimate_series_rlc(stacks.voltage, stacks.current, options);
        case Topology::ParallelGL:
            return estimate_parallel_gl(stacks.voltage, stacks.current, options);
        case Topology::ParallelGCL:
            return estimate_parallel_gcl(stacks.voltage, stacks.current, options);
        case Topology::ParallelRC:
            return estimate_parallel_rc(stacks.voltage, stacks.current, options);
        case Topology::ParallelRSeriesRL:
            return estimate_hybrid_r_rl(stacks.voltage, stacks.current, options).trace;
    }
    raise(ErrorCode::InvalidConfig, "unknown topology");
}

ParameterTrace smooth_trace(const ParameterTrace& trace, int window) {
    if (window < 1) {
        raise(ErrorCode::InvalidConfig, "smoothing window must be at least 1");
    }
    const std::size_t n = trace.size();
    const std::size_t w = static_cast<std::size_t>(window);
    const std::size_t back = (w - 1) / 2;
    const std::size_t fwd = w / 2;

    ParameterTrace out = trace;
    if (w == 1 || n == 0) return out;

    // Prefix sums of valid counts and of value*valid per parameter.
    std::vector<std::size_t> count(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) count[k + 1] = count[k] + (trace.valid[k] ? 1 : 0);
    std::vector<std::vector<long double>> sums(trace.param_count(),
                                               std::vector<long double>(n + 1, 0.0L));
    for (std::size_t p = 0; p < trace.param_count(); ++p) {
        for (std::size_t k = 0; k < n; ++k) {
            sums[p][k + 1] = sums[p][k] + (trace.valid[k] ? static_cast<long double>(trace.values[p][k]) : 0.0L);
        }
    }

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = (k >= back) ? k - back : 0;
        const std::size_t hi = std::min(n - 1, k + fwd);
        const std::size_t span_len = hi - lo + 1;
        const std::size_t valid_in_window = count[hi + 1] - count[lo];
        if (valid_in_window * 2 >= span_len && valid_in_window > 0) {
            for (std::size_t p = 0; p < trace.param_count(); ++p) {
                out.values[p][k] = static_cast<double>(
                    (sums[p][hi + 1] - sums[p][lo]) / static_cast<long double>(valid_in_window));
            }
            out.valid[k] = 1;
        } else {
            for (std::size_t p = 0; p < trace.param_count(); ++p) out.values[p][k] = 0.0;
            out.valid[k] = 0;
        }
    }
    return out;
}

TraceSummary summarize(const ParameterTrace& trace,
                       const std::optional<std::vector<double>>& nominal) {
    if (nominal && nominal->size() != trace.param_count()) {
        raise(ErrorCode::InvalidConfig, "nominal tuple size does not match parameter count");
    }
    std::size_t valid_count = 0;
    for (std::uint8_t f : trace.valid) valid_count += f ? 1 : 0;
    if (valid_count == 0) {
        raise(ErrorCode::NoValidSamples, "trace has no valid samples to summarize");
    }

    TraceSummary summary;
    summary.valid_count = valid_count;
    summary.valid_fraction = trace.size() == 0
                                 ? 0.0
                                 : static_cast<double>(valid_count) / static_cast<double>(trace.size());
    for (std::size_t p = 0; p < trace.param_count(); ++p) {
        std::vector<double> vals;
        vals.reserve(valid_count);
        for (std::size_t k = 0; k < trace.size(); ++k) {
            if (trace.valid[k]) vals.push_back(trace.values[p][k]);
        }
        ParamSummary ps;
        ps.name = trace.names[p];
        ps.mean = mean(vals);
        ps.median = median(vals);
        ps.stddev = sample_stddev(vals);
        if (nominal) {
            ps.nominal = (*nominal)[p];
            if (std::abs(*ps.nominal) > 0.0) {
                ps.percent_error = 100.0 * std::abs(ps.median - *ps.nominal) / std::abs(*ps.nominal);
            }
        }
        summary.params.push_back(std::move(ps));
    }
    return summary;
}

} // namespace loadid
