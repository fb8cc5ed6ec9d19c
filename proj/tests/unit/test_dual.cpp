#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "harris/dual.hpp"
#include "harris/errors.hpp"
#include "harris/splitting.hpp"

using namespace harris;

namespace {

std::vector<double> grid_times(double H, std::size_t K) {
    std::vector<double> t(K + 1);
    for (std::size_t k = 0; k <= K; ++k) t[k] = H * static_cast<double>(k) / static_cast<double>(K);
    return t;
}

double affine_flow(double s, double t, double x) { return x * std::exp(-(t - s)); }

}  // namespace

TEST_CASE("identity bundle: the dual picks the next stored level") {
    std::vector<Start> starts;
    for (int i = 0; i <= 10; ++i) starts.push_back({0.0, i / 10.0});
    const auto times = grid_times(1.0, 8);
    const TrajectoryBundle b = deterministic_bundle(starts, times, [](double, double, double x) { return x; });
    CHECK(dual_value(b, 0.0, 1.0, 0.25) == doctest::Approx(0.3));
    CHECK(dual_value(b, 0.5, 0.75, 0.3) == doctest::Approx(0.4));
    CHECK(dual_value(b, 0.0, 0.0, -5.0) == 0.0);
    CHECK_THROWS_AS(dual_value(b, 0.0, 1.0, 1.0), CoverageError);
    CHECK(std::isinf(dual_value_or_inf(b, 0.0, 1.0, 2.0)));
    try {
        dual_value(b, 0.25, 0.5, 7.0);
    } catch (const CoverageError& e) {
        CHECK(e.s() == 0.25);
        CHECK(e.t() == 0.5);
        CHECK(e.x() == 7.0);
    }
}

TEST_CASE("affine flow: dual is the inverse map within one start cell") {
    const double H = 1.0, dx = 0.01;
    std::vector<Start> starts;
    const auto times = grid_times(H, 16);
    for (std::size_t k = 0; k < 4; ++k)
        for (int i = 0; i <= 600; ++i) starts.push_back({0.25 * static_cast<double>(k), -3.0 + dx * i});
    const TrajectoryBundle b = deterministic_bundle(starts, times, affine_flow);
    for (double s : {0.0, 0.25, 0.5}) {
        for (double t : {0.5, 0.75, 1.0}) {
            if (t < s) continue;
            for (double x = -0.9; x <= 0.9; x += 0.07) {
                const double exact = x * std::exp(t - s);
                const double d = dual_value(b, s, t, x);
                CHECK(d >= exact);
                CHECK(d - exact <= dx);
            }
        }
    }
}

TEST_CASE("dual is nondecreasing in x") {
    std::vector<Start> starts;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 8; ++i) starts.push_back({0.25 * k, -1.0 + 0.25 * i});
    RandomStream rng(61, 0);
    SimConfig cfg;
    cfg.dt_fine = 1.0 / 64.0;
    const TrajectoryBundle b = split_two_param(CovarianceSpec::exponential(1.0), DriftSpec::affine(0.0, -1.0), starts,
                                               make_uniform_partition(1.0, 4), cfg, rng);
    for (double s : {0.0, 0.25}) {
        for (double t : {0.5, 1.0}) {
            double prev = -1e300;
            for (double x = -3.0; x <= 3.0; x += 0.01) {
                const double v = dual_value_or_inf(b, s, t, x);
                CHECK(v >= prev);
                prev = v;
            }
        }
    }
}

TEST_CASE("dual bundles and involution on the affine flow") {
    const double H = 0.5, dx = 0.005;
    const auto times = grid_times(H, 16);
    std::vector<Start> starts;
    for (int i = 0; i <= 1200; ++i) starts.push_back({0.0, -3.0 + dx * i});
    const TrajectoryBundle fwd = deterministic_bundle(starts, times, affine_flow);

    std::vector<Start> dual_starts;
    for (int i = 0; i <= 600; ++i) dual_starts.push_back({0.0, -1.5 + dx * i});
    const TrajectoryBundle dual = dual_bundle(fwd, dual_starts);
    CHECK(dual.reversed);
    REQUIRE(dual.num_times() == fwd.num_times());
    for (std::size_t j = 0; j < dual.num_paths(); j += 50)
        for (std::size_t k = 0; k < dual.num_times(); ++k) {
            const double exact = dual_starts[j].x * std::exp(dual.times[k]);
            CHECK(dual.value(j, k) >= exact);
            CHECK(dual.value(j, k) - exact <= dx);
        }

    std::vector<Start> back_starts;
    for (double x = -0.8; x <= 0.8; x += 0.1) back_starts.push_back({0.0, x});
    const TrajectoryBundle twice = dual_bundle(dual, back_starts);
    CHECK_FALSE(twice.reversed);
    for (std::size_t j = 0; j < back_starts.size(); ++j)
        for (std::size_t k = 0; k < twice.num_times(); ++k) {
            const double exact = affine_flow(0.0, twice.times[k], back_starts[j].x);
            CHECK(std::abs(twice.value(j, k) - exact) <= 2.0 * dx * std::exp(H));
        }

    CHECK(wedge_check(fwd, dual).empty());
}

TEST_CASE("mapping I on small bundles") {
    const auto times = grid_times(1.0, 4);
    const std::vector<Start> one{{0.25, 0.5}};
    const TrajectoryBundle single =
        deterministic_bundle(one, times, [](double s, double t, double x) { return x + (t - s); });
    const TrajectoryBundle own = mapping_I(single);
    for (std::size_t k = 1; k < times.size(); ++k) CHECK(own.value(0, k) == single.value(0, k));
    CHECK(own.value(0, 0) == own.value(0, 1));

    const std::vector<Start> levels{{0.0, 0.0}, {0.0, 1.0}};
    const TrajectoryBundle flat = deterministic_bundle(levels, times, [](double, double, double x) { return x; });
    const std::vector<Start> mid{{0.0, 0.5}};
    const TrajectoryBundle q = mapping_I(flat, mid);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(q.value(0, k) == 1.0);
    const std::vector<Start> above{{0.0, 1.5}};
    CHECK_THROWS_AS(mapping_I(flat, above), CoverageError);
}

TEST_CASE("wedge check") {
    const auto times = grid_times(1.0, 8);
    std::vector<Start> starts;
    for (int i = 0; i < 5; ++i) starts.push_back({0.0, 0.25 * i});
    const auto identity = [](double, double, double x) { return x; };
    const TrajectoryBundle id = deterministic_bundle(starts, times, identity);
    std::vector<Start> mids;
    for (int i = 0; i < 4; ++i) mids.push_back({0.0, 0.125 + 0.25 * i});
    CHECK(wedge_check(id, deterministic_bundle(mids, times, identity)).empty());

    // A dual that climbs through a flat forward path is flagged.
    TrajectoryBundle crossing = deterministic_bundle(std::vector<Start>{{0.0, -1.0}}, times,
                                                     [](double s, double t, double x) { return x + 4.0 * (t - s); });
    crossing.reversed = true;
    const auto v = wedge_check(id, crossing);
    CHECK_FALSE(v.empty());
    for (const auto& w : v) CHECK(w.magnitude > 0.0);

    TrajectoryBundle other = id;
    other.times.pop_back();
    CHECK_THROWS_AS(wedge_check(id, other), std::invalid_argument);
}

TEST_CASE("random two-parameter bundles: dual passes the wedge check") {
    for (std::uint32_t rep = 0; rep < 4; ++rep) {
        std::vector<Start> starts;
        for (int k = 0; k < 8; ++k)
            for (int i = 0; i < 8; ++i) starts.push_back({0.125 * k, -1.0 + (2.0 * i + 1.0) / 8.0});
        RandomStream rng(62, make_stream_id(Purpose::increments, 0, rep));
        SimConfig cfg;
        cfg.dt_fine = 1.0 / 256.0;
        const TrajectoryBundle b = split_two_param(CovarianceSpec::gaussian(), DriftSpec::affine(0.0, -1.0), starts,
                                                   make_uniform_partition(1.0, 8), cfg, rng);
        std::vector<Start> ds;
        for (int k = 0; k < 8; ++k)
            for (int i = 0; i < 12; ++i) ds.push_back({0.125 * k, -0.6 + 0.1 * i});
        TrajectoryBundle d;
        try {
            d = dual_bundle(b, ds);
        } catch (const CoverageError&) {
            continue;
        }
        CHECK(wedge_check(b, d).empty());
    }
}

TEST_CASE("finite bundles give outer approximations that shrink under refinement") {
    std::vector<Start> starts;
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 8; ++i) starts.push_back({0.125 * k, -1.0 + 0.25 * i});
    RandomStream rng(63, 0);
    SimConfig cfg;
    cfg.dt_fine = 1.0 / 128.0;
    const TrajectoryBundle fine_bundle = split_two_param(CovarianceSpec::exponential(1.0), DriftSpec::affine(0.0, -1.0),
                                                         starts, make_uniform_partition(1.0, 8), cfg, rng);
    std::vector<std::size_t> coarse_idx;
    for (std::size_t j = 0; j < starts.size(); ++j) {
        const std::size_t k = j / 8, i = j % 8;
        if (k % 2 == 0 && i % 2 == 0) coarse_idx.push_back(j);
    }
    const TrajectoryBundle coarse = fine_bundle.subset(coarse_idx);
    for (double s : {0.0, 0.25, 0.5})
        for (double t : {0.5, 0.75, 1.0})
            for (double x = -1.5; x <= 1.5; x += 0.05) {
                if (t < s) continue;
                CHECK(dual_value_or_inf(fine_bundle, s, t, x) <= dual_value_or_inf(coarse, s, t, x));
            }
}
