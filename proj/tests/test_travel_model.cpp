#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "platoon/travel_model.hpp"

using namespace platoon;

namespace {

double normal_density(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Composite Simpson integral of the untruncated density.
double simpson(double a, double b, double mu, double sigma, int intervals) {
    const double h = (b - a) / intervals;
    double s = normal_density(a, mu, sigma) + normal_density(b, mu, sigma);
    for (int k = 1; k < intervals; ++k) {
        s += (k % 2 ? 4.0 : 2.0) * normal_density(a + k * h, mu, sigma);
    }
    return s * h / 3.0;
}

double truncated_cdf_by_quadrature(double x, double mu, double sigma, double lo, double hi) {
    return simpson(lo, x, mu, sigma, 200000) / simpson(lo, hi, mu, sigma, 200000);
}

double sample_truncated(std::mt19937_64& rng, double mu, double sigma, double lo, double hi) {
    std::normal_distribution<double> n(mu, sigma);
    while (true) {
        const double v = n(rng);
        if (v >= lo && v <= hi) {
            return v;
        }
    }
}

const SegmentSpec kReliable4{4.0, SpeedMixture::reliable(), "reliable"};
const SegmentSpec kUnreliable4{4.0, SpeedMixture::unreliable(), "unreliable"};

}  // namespace

TEST_CASE("truncated normal cdf") {
    CHECK(truncated_normal_cdf(100.0, 80.0, 8.22, 10.0, 100.0) == 1.0);
    CHECK(truncated_normal_cdf(150.0, 80.0, 8.22, 10.0, 100.0) == 1.0);
    CHECK(truncated_normal_cdf(5.0, 80.0, 8.22, 10.0, 100.0) == 0.0);
    CHECK(truncated_normal_cdf(50.0, 50.0, 7.0, 20.0, 80.0) == doctest::Approx(0.5).epsilon(1e-15));

    // [10, 100] cuts more of the upper tail than the lower one around 80.
    const double got = truncated_normal_cdf(80.0, 80.0, 8.22, 10.0, 100.0);
    const double want = truncated_cdf_by_quadrature(80.0, 80.0, 8.22, 10.0, 100.0);
    CHECK(std::abs(got - want) <= 1e-9);
    CHECK(got > 0.5);

    for (double x : {12.0, 40.0, 64.45, 71.3, 95.0}) {
        CHECK(std::abs(truncated_normal_cdf(x, 64.45, 34.76, 10.0, 100.0) -
                       truncated_cdf_by_quadrature(x, 64.45, 34.76, 10.0, 100.0)) <= 1e-9);
    }

    CHECK_THROWS_WITH_AS(truncated_normal_cdf(50.0, 1000.0, 1.0, 10.0, 100.0),
                         "component mass vanishes on truncation interval", std::domain_error);
    CHECK_THROWS_AS(truncated_normal_cdf(50.0, 80.0, 0.0, 10.0, 100.0), std::invalid_argument);
}

TEST_CASE("speed survival bounds") {
    const auto m = SpeedMixture::reliable();
    CHECK(speed_survival(10.0, m, 80.0) == 1.0);
    CHECK(speed_survival(3.0, m, 80.0) == 1.0);
    CHECK(speed_survival(100.5, m, 80.0) == 0.0);
}

TEST_CASE("speed survival matches rejection sampling of the mixture") {
    const auto m = SpeedMixture::reliable();
    std::mt19937_64 rng(99);
    std::bernoulli_distribution congested(m.w);
    constexpr int n = 10'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const double v = congested(rng) ? sample_truncated(rng, m.mu1, m.sigma1, m.v_min, m.v_max)
                                        : sample_truncated(rng, 80.0, m.sigma2, m.v_min, m.v_max);
        hits += v >= 70.0;
    }
    const double p_hat = static_cast<double>(hits) / n;
    const double se = std::sqrt(p_hat * (1.0 - p_hat) / n);
    const double got = speed_survival(70.0, m, 80.0);
    MESSAGE("survival(70) = " << got << ", sampled " << p_hat << " +- " << se);
    CHECK(std::abs(got - p_hat) <= 3.0 * se);
}

TEST_CASE("traversal pmf support follows the speed bounds") {
    const SegmentSpec five{5.0, SpeedMixture::reliable(), "5 km"};
    const auto p = build_traversal_pmf(five, 80.0, 1e-4);
    CHECK(p.offset() >= 500);
    CHECK(p.last() <= 5000);
    CHECK(std::abs(p.total() - 1.0) <= 1e-9);
}

TEST_CASE("reliable segment traversal peaks near L / v_ref") {
    const auto p = build_traversal_pmf(kReliable4, 80.0, 1e-4);
    std::size_t mode = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        if (p.masses()[k] > p.masses()[mode]) {
            mode = k;
        }
    }
    const Tick mode_tick = p.offset() + static_cast<Tick>(mode);
    MESSAGE("mode at " << mode_tick);
    CHECK(std::abs(mode_tick - 500) <= 10);
}

TEST_CASE("unreliable segment takes longer on average") {
    const double rel = expectation(build_traversal_pmf(kReliable4, 80.0, 1e-4));
    const double unrel = expectation(build_traversal_pmf(kUnreliable4, 80.0, 1e-4));
    MESSAGE("mean ticks reliable " << rel << ", unreliable " << unrel);
    CHECK(unrel > rel);
}

TEST_CASE("traversal cdf reproduces the speed survival function") {
    const double tick = 1e-4;
    for (const auto& seg : {kReliable4, kUnreliable4}) {
        const auto p = build_traversal_pmf(seg, 77.0, tick);
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < p.size(); ++k) {
            cum += p.masses()[k];
            const Tick tau = p.offset() + static_cast<Tick>(k);
            const double want =
                speed_survival(seg.length_km / (static_cast<double>(tau) * tick), seg.mixture, 77.0);
            CHECK(std::abs(cum - want) <= 1e-9);
        }
    }
}

TEST_CASE("traversal model over a speed set") {
    const auto single = build_traversal_model(kReliable4, SpeedSet({80.0}), 1e-4);
    CHECK(single.size() == 1);

    const auto speeds = SpeedSet::range(70.0, 90.0, 1.0);
    REQUIRE(speeds.size() == 21);
    const auto model = build_traversal_model(kReliable4, speeds, 1e-4);
    CHECK(model.size() == 21);
    Tick fastest = model.pmf(20).offset();
    for (std::size_t k = 0; k < model.size(); ++k) {
        CHECK(std::abs(model.pmf(k).total() - 1.0) <= 1e-9);
        CHECK(model.pmf(k).offset() >= fastest);
        CHECK(model.pmf(k).offset() >= 400);
        CHECK(model.pmf(k).last() <= 4000);
    }
    CHECK(model.t_min() == fastest);
    CHECK(model.t_min() >= 400);
}

TEST_CASE("higher reference speed dominates in free flow") {
    SpeedMixture free_flow = SpeedMixture::reliable();
    free_flow.w = 0.0;
    const SegmentSpec seg{4.0, free_flow, "free"};
    const auto slow = build_traversal_pmf(seg, 72.0, 1e-4);
    const auto fast = build_traversal_pmf(seg, 88.0, 1e-4);
    double cs = 0.0;
    double cf = 0.0;
    for (Tick t = std::min(slow.offset(), fast.offset()); t <= std::max(slow.last(), fast.last()); ++t) {
        cs += slow.at(t);
        cf += fast.at(t);
        CHECK(cf >= cs - 1e-12);
    }
}

TEST_CASE("invalid inputs") {
    SpeedMixture bad = SpeedMixture::reliable();
    bad.w = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SpeedMixture::reliable();
    bad.v_min = 120.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    const SegmentSpec tiny{0.001, SpeedMixture::reliable(), "tiny"};
    CHECK_THROWS_WITH_AS(build_traversal_pmf(tiny, 80.0, 1.0), "tick too coarse for segment",
                         std::invalid_argument);
    CHECK_THROWS_AS(SpeedSet({}), std::invalid_argument);
    CHECK_THROWS_AS(SpeedSet({80.0, 80.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpeedSet({80.0}).index_of(81.0), std::out_of_range);
}
