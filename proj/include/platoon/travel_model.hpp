#pragma once

#include <string>
#include <vector>

#include "platoon/pmf.hpp"

namespace platoon {

/// Two-component Gaussian speed mixture, each component truncated to
/// [v_min, v_max] individually. The free-flow mean is supplied per query.
struct SpeedMixture {
    double w = 0.0;       ///< weight of the congestion component
    double mu1 = 0.0;     ///< congestion mean, km/h
    double sigma1 = 1.0;  ///< congestion spread, km/h
    double sigma2 = 1.0;  ///< free-flow spread, km/h
    double v_min = 10.0;
    double v_max = 100.0;

    void validate() const;

    static SpeedMixture reliable();
    static SpeedMixture unreliable();
};

struct SegmentSpec {
    double length_km = 0.0;
    SpeedMixture mixture;
    std::string label;

    void validate() const;
};

/// Finite, strictly increasing set of admissible reference speeds in km/h.
class SpeedSet {
public:
    explicit SpeedSet(std::vector<double> speeds);
    static SpeedSet range(double min, double max, double step);

    const std::vector<double>& values() const { return speeds_; }
    std::size_t size() const { return speeds_.size(); }
    double operator[](std::size_t i) const { return speeds_[i]; }
    /// Index of an exact member; throws std::out_of_range otherwise.
    std::size_t index_of(double speed) const;

private:
    std::vector<double> speeds_;
};

/// One traversal-time PMF per admissible reference speed for a single segment.
class TraversalModel {
public:
    TraversalModel(std::vector<double> speeds, std::vector<DiscretePmf> pmfs);

    const std::vector<double>& speeds() const { return speeds_; }
    const std::vector<DiscretePmf>& pmfs() const { return pmfs_; }
    const DiscretePmf& pmf(std::size_t speed_index) const { return pmfs_.at(speed_index); }
    std::size_t size() const { return pmfs_.size(); }

    /// Earliest support tick over every speed.
    Tick t_min() const { return t_min_; }
    Tick t_max() const { return t_max_; }

private:
    std::vector<double> speeds_;
    std::vector<DiscretePmf> pmfs_;
    Tick t_min_ = 0;
    Tick t_max_ = 0;
};

/// Standard normal CDF.
double normal_cdf(double z);

double truncated_normal_cdf(double x, double mu, double sigma, double lo, double hi);

/// P(V >= v) under the mixture with free-flow mean v_ref.
double speed_survival(double v, const SpeedMixture& mixture, double v_ref);

/// Traversal ticks over the window [ceil(L/v_max/tick), floor(L/v_min/tick)].
/// Mass at tau is F(tau) - F(tau - 1) with F(tau) = P(V >= L / (tau * tick)).
DiscretePmf build_traversal_pmf(const SegmentSpec& segment, double v_ref, double tick_hours);

TraversalModel build_traversal_model(const SegmentSpec& segment, const SpeedSet& speeds,
                                     double tick_hours);

}  // namespace platoon
