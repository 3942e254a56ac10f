#include "platoon/pmf.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace platoon {

Tick add_ticks(Tick a, Tick b) {
    Tick out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw TickOverflow("tick arithmetic overflow: " + std::to_string(a) + " + " +
                           std::to_string(b));
    }
    return out;
}

Tick sub_ticks(Tick a, Tick b) {
    Tick out = 0;
    if (__builtin_sub_overflow(a, b, &out)) {
        throw TickOverflow("tick arithmetic overflow: " + std::to_string(a) + " - " +
                           std::to_string(b));
    }
    return out;
}

namespace {

Tick window_end(Tick offset, std::size_t n) {
    if (n == 0) {
        return offset;
    }
    if (n - 1 > static_cast<std::size_t>(std::numeric_limits<Tick>::max())) {
        throw TickOverflow("support window too long");
    }
    return add_ticks(offset, static_cast<Tick>(n - 1));
}

}  // namespace

DiscretePmf DiscretePmf::from_masses(Tick offset, std::vector<double> masses) {
    if (masses.empty()) {
        throw std::invalid_argument("pmf: empty support");
    }
    for (double m : masses) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw std::invalid_argument("pmf: masses must be finite and non-negative");
        }
    }
    if (masses.front() == 0.0 || masses.back() == 0.0) {
        throw std::invalid_argument("pmf: support window is not tight");
    }
    const double sum = std::accumulate(masses.begin(), masses.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("pmf: masses sum to " + std::to_string(sum));
    }
    window_end(offset, masses.size());
    return DiscretePmf(offset, std::move(masses));
}

double DiscretePmf::at(Tick t) const {
    if (t < offset_ || t > last()) {
        return 0.0;
    }
    return masses_[static_cast<std::size_t>(t - offset_)];
}

double DiscretePmf::total() const {
    return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

DiscretePmf delta(Tick t) { return DiscretePmf(t, {1.0}); }

DiscretePmf normalize(Tick offset, std::span<const double> masses) {
    std::size_t first = 0;
    while (first < masses.size() && masses[first] == 0.0) {
        ++first;
    }
    if (first == masses.size()) {
        throw std::domain_error("degenerate distribution");
    }
    std::size_t last = masses.size() - 1;
    while (masses[last] == 0.0) {
        --last;
    }
    double sum = 0.0;
    for (std::size_t k = first; k <= last; ++k) {
        if (!(masses[k] >= 0.0) || !std::isfinite(masses[k])) {
            throw std::invalid_argument("pmf: masses must be finite and non-negative");
        }
        sum += masses[k];
    }
    std::vector<double> out(masses.begin() + static_cast<std::ptrdiff_t>(first),
                            masses.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    for (double& m : out) {
        m /= sum;
    }
    const Tick start = add_ticks(offset, static_cast<Tick>(first));
    window_end(start, out.size());
    return DiscretePmf(start, std::move(out));
}

DiscretePmf convolve(const DiscretePmf& a, const DiscretePmf& b) {
    const Tick offset = add_ticks(a.offset(), b.offset());
    window_end(offset, a.size() + b.size() - 1);

    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    const auto am = a.masses();
    const auto bm = b.masses();
    for (std::size_t i = 0; i < am.size(); ++i) {
        const double ai = am[i];
        double* dst = out.data() + i;
        for (std::size_t j = 0; j < bm.size(); ++j) {
            dst[j] += ai * bm[j];
        }
    }
    // Products of positive endpoints can still underflow to zero.
    if (out.front() == 0.0 || out.back() == 0.0) {
        std::size_t first = 0;
        while (out[first] == 0.0) {
            ++first;
        }
        std::size_t last = out.size() - 1;
        while (out[last] == 0.0) {
            --last;
        }
        std::vector<double> tight(out.begin() + static_cast<std::ptrdiff_t>(first),
                                  out.begin() + static_cast<std::ptrdiff_t>(last) + 1);
        return DiscretePmf(offset + static_cast<Tick>(first), std::move(tight));
    }
    return DiscretePmf(offset, std::move(out));
}

double expectation(const DiscretePmf& p) {
    // Centered on the offset so large offsets keep precision.
    double acc = 0.0;
    const auto m = p.masses();
    for (std::size_t k = 0; k < m.size(); ++k) {
        acc += static_cast<double>(k) * m[k];
    }
    return static_cast<double>(p.offset()) * p.total() + acc;
}

double variance(const DiscretePmf& p) {
    const double mean_rel = expectation(p) - static_cast<double>(p.offset()) * p.total();
    const auto m = p.masses();
    double acc = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double d = static_cast<double>(k) - mean_rel;
        acc += d * d * m[k];
    }
    return acc;
}

}  // namespace platoon
