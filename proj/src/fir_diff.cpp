#include "loadid/fir_diff.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

namespace loadid {

namespace {

// Dense solve in extended precision with partial pivoting. The constraint
// systems are small (at most ~(N-1)/2 + 1 rows) but Vandermonde-like, so the
// extra mantissa bits and a refinement pass keep the solution near the
// working-precision floor.
std::vector<long double> solve_dense(std::vector<std::vector<long double>> a,
                                     std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-30L) {
            raise(ErrorCode::SingularDesign, "constraint system is numerically singular");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const long double f = a[r][col] / a[col][col];
            if (f == 0.0L) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<long double> x(n, 0.0L);
    for (std::size_t r = n; r-- > 0;) {
        long double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

std::vector<long double> residual(const std::vector<std::vector<long double>>& a,
                                  const std::vector<long double>& b,
                                  const std::vector<long double>& x) {
    const std::size_t n = b.size();
    std::vector<long double> r(n, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        long double acc = b[i];
        for (std::size_t j = 0; j < n; ++j) acc -= a[i][j] * x[j];
        r[i] = acc;
    }
    return r;
}

constexpr long double kFactorial[5] = {1.0L, 1.0L, 2.0L, 6.0L, 24.0L};

} // namespace

FirDifferentiator design_differentiator(int derivative_order, int tap_count) {
    const int p = derivative_order;
    const int n_taps = tap_count;
    if (p < 1 || p > 4) {
        raise(ErrorCode::InvalidConfig, "derivative order must be in 1..4, got " + std::to_string(p));
    }
    if (n_taps % 2 == 0) {
        raise(ErrorCode::InvalidConfig, "tap count must be odd, got " + std::to_string(n_taps));
    }
    if (n_taps < 2 * p + 3) {
        raise(ErrorCode::InsufficientTaps,
              "order " + std::to_string(p) + " needs at least " + std::to_string(2 * p + 3) +
                  " taps, got " + std::to_string(n_taps));
    }

    const int m = (n_taps - 1) / 2;
    const bool odd = (p % 2) != 0;
    const long double mld = static_cast<long double>(m);

    // Rows are normalized so all coefficients are O(1): moment rows use
    // nodes k/M, the boundary row is scaled to match. Unknowns are c_1..c_M
    // for odd orders and c_0..c_M for even orders.
    const std::size_t n_unknowns = odd ? static_cast<std::size_t>(m)
                                       : static_cast<std::size_t>(m) + 1;
    std::vector<std::vector<long double>> a;
    std::vector<long double> b;
    a.reserve(n_unknowns);
    b.reserve(n_unknowns);

    auto moment_row = [&](int exponent) {
        std::vector<long double> row(n_unknowns, 0.0L);
        for (int k = 1; k <= m; ++k) {
            const long double node = static_cast<long double>(k) / mld;
            const std::size_t idx = odd ? static_cast<std::size_t>(k - 1)
                                        : static_cast<std::size_t>(k);
            row[idx] = std::pow(node, static_cast<long double>(exponent));
        }
        a.push_back(std::move(row));
        long double rhs = 0.0L;
        if (exponent == p) {
            rhs = kFactorial[p] / (2.0L * std::pow(mld, static_cast<long double>(p)));
        }
        b.push_back(rhs);
    };

    if (odd) {
        // Odd-power moments of 2*sum c_k sin(k*omega); H(pi) = 0 holds by
        // antisymmetry, so the Nyquist condition pins the slope there.
        for (int j = 1; j <= 2 * m - 3; j += 2) moment_row(j);
        std::vector<long double> boundary(n_unknowns, 0.0L);
        for (int k = 1; k <= m; ++k) {
            const long double sign = (k % 2 == 0) ? 1.0L : -1.0L;
            boundary[static_cast<std::size_t>(k - 1)] = sign * static_cast<long double>(k) / mld;
        }
        a.push_back(std::move(boundary));
        b.push_back(0.0L);
    } else {
        // Even-power moments of c_0 + 2*sum c_k cos(k*omega), the zero-DC
        // constraint (exponent 0, involving c_0), and H(pi) = 0.
        {
            std::vector<long double> dc(n_unknowns, 0.0L);
            dc[0] = 1.0L;
            for (int k = 1; k <= m; ++k) dc[static_cast<std::size_t>(k)] = 2.0L;
            a.push_back(std::move(dc));
            b.push_back(0.0L);
        }
        for (int j = 2; j <= 2 * (m - 1); j += 2) moment_row(j);
        std::vector<long double> boundary(n_unknowns, 0.0L);
        boundary[0] = 1.0L;
        for (int k = 1; k <= m; ++k) {
            boundary[static_cast<std::size_t>(k)] = (k % 2 == 0) ? 2.0L : -2.0L;
        }
        a.push_back(std::move(boundary));
        b.push_back(0.0L);
    }

    std::vector<long double> x = solve_dense(a, b);
    // One refinement pass against the exactly-formed rows.
    {
        std::vector<long double> r = residual(a, b, x);
        std::vector<long double> dx = solve_dense(a, r);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    }

    // The returned coefficients live in double precision; check the
    // normalized constraint residuals at that precision.
    {
        std::vector<long double> xd(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            xd[i] = static_cast<long double>(static_cast<double>(x[i]));
        }
        const std::vector<long double> r = residual(a, b, xd);
        for (long double ri : r) {
            if (std::abs(ri) > 1e-10L) {
                raise(ErrorCode::SingularDesign,
                      "constraint residual " + std::to_string(static_cast<double>(ri)) +
                          " exceeds tolerance for order " + std::to_string(p) + ", taps " +
                          std::to_string(n_taps));
            }
        }
    }

    double center = 0.0;
    std::vector<double> side(static_cast<std::size_t>(m), 0.0);
    if (odd) {
        for (int k = 1; k <= m; ++k) {
            side[static_cast<std::size_t>(k - 1)] = static_cast<double>(x[static_cast<std::size_t>(k - 1)]);
        }
    } else {
        center = static_cast<double>(x[0]);
        for (int k = 1; k <= m; ++k) {
            side[static_cast<std::size_t>(k - 1)] = static_cast<double>(x[static_cast<std::size_t>(k)]);
        }
    }
    return FirDifferentiator(p, center, std::move(side));
}

std::complex<double> FirDifferentiator::response_at(double omega) const {
    const bool odd = (order_ % 2) != 0;
    if (odd) {
        double acc = 0.0;
        for (std::size_t k = 0; k < side_.size(); ++k) {
            acc += side_[k] * std::sin(static_cast<double>(k + 1) * omega);
        }
        return {0.0, 2.0 * acc};
    }
    double acc = center_;
    for (std::size_t k = 0; k < side_.size(); ++k) {
        acc += 2.0 * side_[k] * std::cos(static_cast<double>(k + 1) * omega);
    }
    return {acc, 0.0};
}

std::vector<std::complex<double>> FirDifferentiator::frequency_response(
    std::span<const double> omegas) const {
    std::vector<std::complex<double>> out;
    out.reserve(omegas.size());
    for (double w : omegas) out.push_back(response_at(w));
    return out;
}

Waveform FirDifferentiator::differentiate(const Waveform& w) const {
    const std::size_t n = w.size();
    if (n <= static_cast<std::size_t>(tap_count())) {
        raise(ErrorCode::SignalTooShort,
              "signal of length " + std::to_string(n) + " is too short for " +
                  std::to_string(tap_count()) + " taps");
    }
    const int m = half_length();
    const double sign = (order_ % 2 != 0) ? -1.0 : 1.0;
    const double scale = 1.0 / std::pow(w.sample_interval_s(), order_);
    const std::span<const double> x = w.view();

    std::vector<double> out(n, 0.0);
    for (std::size_t i = static_cast<std::size_t>(m); i + static_cast<std::size_t>(m) < n; ++i) {
        double acc = center_ * x[i];
        for (int k = 1; k <= m; ++k) {
            acc += side_[static_cast<std::size_t>(k - 1)] *
                   (x[i + static_cast<std::size_t>(k)] + sign * x[i - static_cast<std::size_t>(k)]);
        }
        out[i] = acc * scale;
    }
    return Waveform(std::move(out), w.sample_interval_s(), w.start_time_s());
}

const Waveform& DerivativeStack::level(int order) const {
    if (order == 0) return base;
    if (!has_level(order)) {
        raise(ErrorCode::StackMismatch,
              "derivative order " + std::to_string(order) + " was not built");
    }
    return *deriv[static_cast<std::size_t>(order - 1)];
}

bool DerivativeStack::has_level(int order) const {
    if (order == 0) return true;
    if (order < 0 || order > 4) return false;
    return deriv[static_cast<std::size_t>(order - 1)].has_value();
}

int DerivativeStack::max_order() const {
    int order = 0;
    while (order < 4 && deriv[static_cast<std::size_t>(order)].has_value()) ++order;
    return order;
}

void DerivativeStack::narrow_valid_range(std::size_t margin) {
    valid_begin += margin;
    valid_end = (valid_end >= margin) ? valid_end - margin : 0;
    if (valid_begin >= valid_end) {
        raise(ErrorCode::SignalTooShort, "no samples remain after edge trimming");
    }
}

StackPair build_stack(const MeasurementFrame& frame, int max_order, int tap_count) {
    if (max_order < 1 || max_order > 4) {
        raise(ErrorCode::InvalidConfig, "max derivative order must be in 1..4");
    }
    if (frame.size() <= static_cast<std::size_t>(tap_count)) {
        raise(ErrorCode::SignalTooShort,
              "frame of length " + std::to_string(frame.size()) + " is too short for " +
                  std::to_string(tap_count) + " taps");
    }

    DerivativeStack v{frame.voltage(), {}, 0, 0};
    DerivativeStack i{frame.current(), {}, 0, 0};
    int m = 0;
    for (int p = 1; p <= max_order; ++p) {
        const FirDifferentiator f = design_differentiator(p, tap_count);
        m = std::max(m, f.half_length());
        v.deriv[static_cast<std::size_t>(p - 1)] = f.differentiate(frame.voltage());
        i.deriv[static_cast<std::size_t>(p - 1)] = f.differentiate(frame.current());
    }
    v.valid_begin = i.valid_begin = static_cast<std::size_t>(m);
    v.valid_end = i.valid_end = frame.size() - static_cast<std::size_t>(m);
    return {std::move(v), std::move(i)};
}

} // namespace loadid
