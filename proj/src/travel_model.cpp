#include "platoon/travel_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace platoon {

void SpeedMixture::validate() const {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw std::invalid_argument("mixture: w must lie in [0, 1]");
    }
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
        throw std::invalid_argument("mixture: sigma1 and sigma2 must be positive");
    }
    if (!(v_min < v_max)) {
        throw std::invalid_argument("mixture: v_min must be below v_max");
    }
}

SpeedMixture SpeedMixture::reliable() {
    return SpeedMixture{.w = 0.04, .mu1 = 64.45, .sigma1 = 34.76, .sigma2 = 8.22,
                        .v_min = 10.0, .v_max = 100.0};
}

SpeedMixture SpeedMixture::unreliable() {
    return SpeedMixture{.w = 0.55, .mu1 = 38.64, .sigma1 = 18.96, .sigma2 = 9.96,
                        .v_min = 10.0, .v_max = 100.0};
}

void SegmentSpec::validate() const {
    if (!(length_km > 0.0) || !std::isfinite(length_km)) {
        throw std::invalid_argument("segment: length must be positive");
    }
    mixture.validate();
}

SpeedSet::SpeedSet(std::vector<double> speeds) : speeds_(std::move(speeds)) {
    if (speeds_.empty()) {
        throw std::invalid_argument("speed set is empty");
    }
    for (std::size_t i = 0; i < speeds_.size(); ++i) {
        if (!std::isfinite(speeds_[i]) || speeds_[i] <= 0.0) {
            throw std::invalid_argument("speed set: speeds must be positive");
        }
        if (i > 0 && !(speeds_[i] > speeds_[i - 1])) {
            throw std::invalid_argument("speed set must be strictly increasing");
        }
    }
}

SpeedSet SpeedSet::range(double min, double max, double step) {
    if (!(step > 0.0) || !(max >= min)) {
        throw std::invalid_argument("speed range: need step > 0 and max >= min");
    }
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) {
        // Rounded to 1e-9 so that 70 + k * 0.1 style grids compare exactly.
        out.push_back(std::round((min + static_cast<double>(k) * step) * 1e9) / 1e9);
    }
    return SpeedSet(std::move(out));
}

std::size_t SpeedSet::index_of(double speed) const {
    const auto it = std::find(speeds_.begin(), speeds_.end(), speed);
    if (it == speeds_.end()) {
        throw std::out_of_range("speed " + std::to_string(speed) + " is not admissible");
    }
    return static_cast<std::size_t>(it - speeds_.begin());
}

TraversalModel::TraversalModel(std::vector<double> speeds, std::vector<DiscretePmf> pmfs)
    : speeds_(std::move(speeds)), pmfs_(std::move(pmfs)) {
    if (pmfs_.empty() || speeds_.size() != pmfs_.size()) {
        throw std::invalid_argument("traversal model: need one pmf per speed");
    }
    if (!std::is_sorted(speeds_.begin(), speeds_.end(), std::less_equal<>())) {
        throw std::invalid_argument("traversal model: speeds must be strictly increasing");
    }
    t_min_ = std::numeric_limits<Tick>::max();
    t_max_ = std::numeric_limits<Tick>::min();
    for (const auto& p : pmfs_) {
        t_min_ = std::min(t_min_, p.offset());
        t_max_ = std::max(t_max_, p.last());
    }
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double truncated_normal_cdf(double x, double mu, double sigma, double lo, double hi) {
    if (!(sigma > 0.0) || !(lo < hi)) {
        throw std::invalid_argument("truncated normal: need sigma > 0 and lo < hi");
    }
    if (x < lo) {
        return 0.0;
    }
    if (x >= hi) {
        return 1.0;
    }
    const double a = normal_cdf((lo - mu) / sigma);
    const double b = normal_cdf((hi - mu) / sigma);
    const double denom = b - a;
    if (denom < 1e-300) {
        throw std::domain_error("component mass vanishes on truncation interval");
    }
    return std::clamp((normal_cdf((x - mu) / sigma) - a) / denom, 0.0, 1.0);
}

double speed_survival(double v, const SpeedMixture& m, double v_ref) {
    const double congested = truncated_normal_cdf(v, m.mu1, m.sigma1, m.v_min, m.v_max);
    const double free_flow = truncated_normal_cdf(v, v_ref, m.sigma2, m.v_min, m.v_max);
    return m.w * (1.0 - congested) + (1.0 - m.w) * (1.0 - free_flow);
}

namespace {

// Ratios such as 4 km / 100 km/h / 1e-4 h land a few ulps off an integer.
constexpr double kTickSlack = 1e-9;

Tick checked_tick(double x) {
    if (!std::isfinite(x) || std::abs(x) > 9.0e15) {
        throw TickOverflow("traversal window exceeds tick range");
    }
    return static_cast<Tick>(x);
}

}  // namespace

DiscretePmf build_traversal_pmf(const SegmentSpec& segment, double v_ref, double tick_hours) {
    segment.validate();
    if (!(tick_hours > 0.0)) {
        throw std::invalid_argument("tick duration must be positive");
    }
    const auto& m = segment.mixture;
    const double L = segment.length_km;
    const double fastest = L / m.v_max / tick_hours;
    const double slowest = L / m.v_min / tick_hours;
    const Tick lo = checked_tick(std::ceil(fastest - kTickSlack * std::max(1.0, fastest)));
    const Tick hi = checked_tick(std::floor(slowest + kTickSlack * std::max(1.0, slowest)));
    if (lo > hi || hi <= 0) {
        throw std::invalid_argument("tick too coarse for segment");
    }

    const auto n = static_cast<std::size_t>(hi - lo + 1);
    std::vector<double> masses(n);
    double prev = 0.0;  // F(lo - 1)
    for (std::size_t k = 0; k < n; ++k) {
        const Tick tau = lo + static_cast<Tick>(k);
        double cdf = 1.0;  // F(hi)
        if (tau < hi) {
            cdf = speed_survival(L / (static_cast<double>(tau) * tick_hours), m, v_ref);
        }
        masses[k] = std::max(0.0, cdf - prev);
        prev = std::max(prev, cdf);
    }
    return normalize(lo, masses);
}

TraversalModel build_traversal_model(const SegmentSpec& segment, const SpeedSet& speeds,
                                     double tick_hours) {
    std::vector<DiscretePmf> pmfs;
    pmfs.reserve(speeds.size());
    for (double v : speeds.values()) {
        pmfs.push_back(build_traversal_pmf(segment, v, tick_hours));
    }
    return TraversalModel(speeds.values(), std::move(pmfs));
}

}  // namespace platoon
