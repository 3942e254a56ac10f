#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace platoon {

/// Integer count of discretization intervals.
using Tick = std::int64_t;

/// Thrown when tick arithmetic would leave the representable range.
class TickOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

Tick add_ticks(Tick a, Tick b);
Tick sub_ticks(Tick a, Tick b);

/**
 * Probability mass function over integer ticks.
 *
 * masses()[k] is P(X = offset() + k). The support window is tight: the first
 * and last stored masses are strictly positive. Instances are immutable once
 * constructed.
 */
class DiscretePmf {
public:
    /// Validates non-negativity, unit mass (within 1e-9) and a tight window.
    static DiscretePmf from_masses(Tick offset, std::vector<double> masses);

    Tick offset() const { return offset_; }
    /// Last tick with positive mass.
    Tick last() const { return offset_ + static_cast<Tick>(masses_.size()) - 1; }
    std::size_t size() const { return masses_.size(); }
    std::span<const double> masses() const { return masses_; }

    /// P(X = t), zero outside the support window.
    double at(Tick t) const;
    double total() const;

private:
    DiscretePmf(Tick offset, std::vector<double> masses)
        : offset_(offset), masses_(std::move(masses)) {}

    friend DiscretePmf delta(Tick t);
    friend DiscretePmf normalize(Tick offset, std::span<const double> masses);
    friend DiscretePmf convolve(const DiscretePmf& a, const DiscretePmf& b);

    Tick offset_ = 0;
    std::vector<double> masses_;
};

DiscretePmf delta(Tick t);

/// Scales to unit mass and strips exact zeros at both ends.
/// Throws std::domain_error("degenerate distribution") when nothing is positive.
DiscretePmf normalize(Tick offset, std::span<const double> masses);
inline DiscretePmf normalize(const DiscretePmf& p) {
    return normalize(p.offset(), p.masses());
}

/// Direct O(n*m) convolution; the distribution of the sum of independent draws.
DiscretePmf convolve(const DiscretePmf& a, const DiscretePmf& b);

double expectation(const DiscretePmf& p);
double variance(const DiscretePmf& p);

}  // namespace platoon
