#pragma once

#include "loadid/signals.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace loadid {

/// Symmetric-difference FIR differentiator of order p in 1..4.
///
/// The tap set approximates the ideal response (j*omega)^p at low frequency
/// (moment constraint 2*sum c_k k^p = p!, maximal flatness on the remaining
/// degrees of freedom) and is pinned to zero response at the Nyquist
/// frequency. Odd orders are antisymmetric with a zero center tap; even
/// orders are symmetric with the center tap closing the DC constraint.
class FirDifferentiator {
public:
    [[nodiscard]] int derivative_order() const { return order_; }
    [[nodiscard]] int tap_count() const { return 2 * static_cast<int>(side_.size()) + 1; }
    [[nodiscard]] int half_length() const { return static_cast<int>(side_.size()); }
    [[nodiscard]] double center_coefficient() const { return center_; }
    [[nodiscard]] std::span<const double> side_coefficients() const { return side_; }

    /// Transfer function of the designed tap set at a radian frequency in
    /// [0, pi], before the 1/h^p scaling.
    [[nodiscard]] std::complex<double> response_at(double omega) const;
    [[nodiscard]] std::vector<std::complex<double>> frequency_response(
        std::span<const double> omegas) const;

    /// Apply the differentiator. Output is scaled by 1/h^p; the first and
    /// last half_length() samples cannot be computed and are left at zero
    /// (callers exclude them through a valid range).
    [[nodiscard]] Waveform differentiate(const Waveform& w) const;

private:
    friend FirDifferentiator design_differentiator(int, int);
    FirDifferentiator(int order, double center, std::vector<double> side)
        : order_(order), center_(center), side_(std::move(side)) {}

    int order_;
    double center_;
    std::vector<double> side_;
};

/// Design a differentiator with the given derivative order (1..4) and odd tap
/// count N >= 2p + 3.
FirDifferentiator design_differentiator(int derivative_order, int tap_count = 21);

/// A waveform together with its numerical derivatives up to order 4.
/// Orders above the built maximum stay disengaged. valid range excludes the
/// filter half-length at each end (and any further conditioning trim).
struct DerivativeStack {
    Waveform base;
    std::array<std::optional<Waveform>, 4> deriv;
    std::size_t valid_begin = 0;
    std::size_t valid_end = 0;

    [[nodiscard]] const Waveform& level(int order) const;
    [[nodiscard]] bool has_level(int order) const;
    [[nodiscard]] int max_order() const;

    /// Shrink the valid range by `margin` samples at each end.
    void narrow_valid_range(std::size_t margin);
};

struct StackPair {
    DerivativeStack voltage;
    DerivativeStack current;
};

/// Differentiate both channels of a frame up to max_order (1..4) with a
/// shared tap count; both stacks share the same valid range.
StackPair build_stack(const MeasurementFrame& frame, int max_order, int tap_count = 21);

} // namespace loadid
