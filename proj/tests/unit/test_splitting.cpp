#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "harris/splitting.hpp"

using namespace harris;

namespace {

SimConfig fine(double dt) {
    SimConfig c;
    c.dt_fine = dt;
    return c;
}

}  // namespace

TEST_CASE("partition construction") {
    const Partition u4 = make_uniform_partition(1.0, 4);
    CHECK(u4.knots == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(u4.delta_n == 0.25);
    CHECK(u4.blocks() == 4);
    CHECK(make_uniform_partition(1.0, 1).knots == std::vector<double>{0.0, 1.0});

    const Partition e = make_explicit_partition({0.0, 0.1, 1.0});
    CHECK(e.delta_n == doctest::Approx(0.9));
    CHECK_THROWS_AS(make_explicit_partition({0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_explicit_partition({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);

    const Partition g = make_geometric_partition(1.0, 3, 2.0);
    REQUIRE(g.knots.size() == 4);
    CHECK(g.knots[1] == doctest::Approx(1.0 / 7.0));
    CHECK(g.knots[2] == doctest::Approx(3.0 / 7.0));
    CHECK(g.knots.back() == 1.0);
    CHECK(g.delta_n == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("locators") {
    const Partition p = make_uniform_partition(1.0, 10);
    const Locator a = locate(p, 0.35);
    CHECK(a.d == doctest::Approx(0.3));
    CHECK(a.d_bar == doctest::Approx(0.4));
    CHECK(a.k == 3);
    const Locator z = locate(p, 0.0);
    CHECK(z.d == 0.0);
    CHECK(z.d_bar == doctest::Approx(0.1));
    CHECK(z.k == 0);
    const Locator end = locate(p, 1.0);
    CHECK(end.d == doctest::Approx(0.9));
    CHECK(end.d_bar == 1.0);
    CHECK(end.k == 9);
    const Locator knot = locate(p, 0.5);
    CHECK(knot.d == doctest::Approx(0.5));
    CHECK(knot.k == 5);
}

TEST_CASE("zero drift split is the driftless flow bitwise") {
    const std::vector<double> x0{0.0, 0.3, 0.35, 1.0};
    for (auto phi : {CovarianceSpec::exponential(1.0), CovarianceSpec::gaussian(), CovarianceSpec::indicator()}) {
        RandomStream a(31, 1), b(31, 1);
        const PathRecord ref = simulate(phi, DriftSpec::zero(), x0, 1.0, fine(1.0 / 128.0), a);
        const SplitPaths sp = split_simulate(phi, DriftSpec::zero(), x0, make_uniform_partition(1.0, 8),
                                             fine(1.0 / 128.0), b);
        REQUIRE(sp.times == ref.times);
        CHECK(sp.y_values == ref.values);
        for (double r : sp.r_values) CHECK(r == 0.0);

        for (CouplingMode mode : {CouplingMode::shared_field, CouplingMode::label_level}) {
            const CoupledPaths pair = coupled_pair(phi, DriftSpec::zero(), x0, make_uniform_partition(1.0, 8),
                                                   fine(1.0 / 128.0), 32, 3, mode);
            CHECK(pair.split.y_values == pair.reference.values);
            for (double e : pair.errors.sup_y) CHECK(e == 0.0);
        }
    }
}

TEST_CASE("zero drift u is constant on blocks and equals y at block starts") {
    RandomStream rng(33, 0);
    const Partition p = make_uniform_partition(1.0, 4);
    const SplitPaths sp = split_simulate(CovarianceSpec::gaussian(), DriftSpec::zero(), std::vector<double>{0.2}, p,
                                         fine(1.0 / 64.0), rng);
    for (std::size_t r = 0; r < sp.num_rows(); ++r) {
        const Locator loc = locate(p, sp.times[r]);
        const std::size_t start = static_cast<std::size_t>(std::lround(loc.d * 64.0));
        if (sp.times[r] < 1.0) CHECK(sp.u(r, 0) == sp.y(start, 0));
    }
}

TEST_CASE("decomposition identity holds") {
    for (auto a : {DriftSpec::affine(0.5, -1.0), DriftSpec::lipschitz("sin"), DriftSpec::one_sided("neg_sqrt")}) {
        RandomStream rng(34, 0);
        const SplitPaths sp = split_simulate(CovarianceSpec::exponential(1.0), a, std::vector<double>{-0.5, 0.0, 0.4},
                                             make_uniform_partition(1.0, 16), fine(1.0 / 256.0), rng);
        const DecompositionSummary d = decomposition_diagnostics(sp);
        CHECK(d.identity_residual <= 1e-9);
        CHECK(d.r_sup.size() == 3);
    }
}

TEST_CASE("noise-free split composes the deterministic flow") {
    SimConfig cfg = fine(1.0 / 64.0);
    cfg.zero_noise = true;
    for (std::size_t N : {1u, 4u, 16u}) {
        RandomStream rng(35, 0);
        const SplitPaths sp = split_simulate(CovarianceSpec::gaussian(), DriftSpec::lipschitz("sin"),
                                             std::vector<double>{0.5, 1.5}, make_uniform_partition(1.0, N), cfg, rng);
        const std::size_t last = sp.num_rows() - 1;
        CHECK(sp.y(last, 0) == doctest::Approx(ode_flow(DriftSpec::lipschitz("sin"), 0.5, 1.0)).epsilon(1e-10));
        CHECK(sp.y(last, 1) == doctest::Approx(ode_flow(DriftSpec::lipschitz("sin"), 1.5, 1.0)).epsilon(1e-10));
    }
}

TEST_CASE("affine drift keeps the exact mean") {
    // E y_T = F_T(x) because the driftless blocks are martingales and F is affine.
    const double expected = ode_flow(DriftSpec::affine(1.0, -1.0), 0.3, 1.0);
    std::vector<double> ends;
    for (std::uint32_t r = 0; r < 4000; ++r) {
        RandomStream rng(36, make_stream_id(Purpose::increments, 0, r));
        const SplitPaths sp = split_simulate(CovarianceSpec::gaussian(), DriftSpec::affine(1.0, -1.0),
                                             std::vector<double>{0.3}, make_uniform_partition(1.0, 4),
                                             fine(1.0 / 32.0), rng);
        ends.push_back(sp.y(sp.num_rows() - 1, 0));
    }
    const Estimate e = mean_se(ends);
    CHECK(std::abs(e.mean - expected) < 3.0 * e.se);
}

TEST_CASE("replay and pathwise order") {
    const std::vector<double> x0{-1.0, -0.2, 0.0, 0.1, 0.9};
    const Partition p = make_uniform_partition(1.0, 8);
    for (auto a : {DriftSpec::affine(0.0, -2.0), DriftSpec::one_sided("neg_sign")}) {
        RandomStream r1(37, 9), r2(37, 9);
        const SplitPaths s1 = split_simulate(CovarianceSpec::exponential(1.5), a, x0, p, fine(1.0 / 128.0), r1);
        const SplitPaths s2 = split_simulate(CovarianceSpec::exponential(1.5), a, x0, p, fine(1.0 / 128.0), r2);
        CHECK(s1.y_values == s2.y_values);
        CHECK(s1.u_values == s2.u_values);
        for (std::size_t r = 0; r < s1.num_rows(); ++r)
            for (std::size_t i = 0; i + 1 < x0.size(); ++i) {
                REQUIRE(s1.y(r, i) <= s1.y(r, i + 1));
                REQUIRE(s1.u(r, i) <= s1.u(r, i + 1));
            }
    }
}

TEST_CASE("online errors equal the recorded errors at stride one") {
    const CoupledPaths pair = coupled_pair(CovarianceSpec::gaussian(), DriftSpec::affine(0.0, -1.0),
                                           std::vector<double>{0.0, 0.5}, make_uniform_partition(1.0, 8),
                                           fine(1.0 / 256.0), 38);
    const StrongErrors rec = strong_errors(pair);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(rec.sup_y[i] == doctest::Approx(pair.errors.sup_y[i]).epsilon(1e-14));
        CHECK(rec.sup_u[i] == doctest::Approx(pair.errors.sup_u[i]).epsilon(1e-14));
        CHECK(pair.errors.sup_y[i] > 0.0);
    }

    SimConfig strided = fine(1.0 / 256.0);
    strided.record_stride = 16;
    const CoupledPaths sparse = coupled_pair(CovarianceSpec::gaussian(), DriftSpec::affine(0.0, -1.0),
                                             std::vector<double>{0.0, 0.5}, make_uniform_partition(1.0, 8), strided, 38);
    CHECK(sparse.errors.sup_y == pair.errors.sup_y);
    CHECK(strong_errors(sparse).sup_y[0] <= sparse.errors.sup_y[0]);
}

TEST_CASE("one block per fine step tracks the Euler reference") {
    const double dt = 1.0 / 256.0;
    const CoupledPaths pair = coupled_pair(CovarianceSpec::gaussian(), DriftSpec::affine(0.0, -1.0),
                                           std::vector<double>{1.0}, make_uniform_partition(1.0, 256), fine(dt), 39);
    // Per step F_h(x) - x - a(x) h = x (e^{-h} - 1 + h), about x h^2 / 2; n steps accumulate O(h).
    CHECK(std::sqrt(pair.errors.sup_y[0]) < 2.0 * dt);
}

TEST_CASE("zero drift u error is the maximum of chi-square block increments") {
    // With a = 0 and one fine step per block, sup (u - X)^2 is the largest squared increment,
    // i.e. (1/n) max of n iid chi-square(1).
    const std::size_t n = 64;
    std::vector<double> sup_u;
    for (std::uint32_t r = 0; r < 4000; ++r) {
        const CoupledPaths pair = coupled_pair(CovarianceSpec::gaussian(), DriftSpec::zero(), std::vector<double>{0.0},
                                               make_uniform_partition(1.0, n), fine(1.0 / n), 40, r);
        sup_u.push_back(pair.errors.sup_u[0]);
    }
    const Estimate e = mean_se(sup_u);
    CHECK(std::abs(e.mean - expected_max_chi2(n) / n) < 3.0 * e.se);
}

TEST_CASE("decomposition moments vanish for zero drift") {
    std::vector<SplitPaths> runs;
    for (std::uint32_t r = 0; r < 5; ++r) {
        RandomStream rng(41, r);
        runs.push_back(split_simulate(CovarianceSpec::gaussian(), DriftSpec::zero(), std::vector<double>{0.0},
                                      make_uniform_partition(1.0, 4), fine(1.0 / 32.0), rng));
    }
    const DecompositionMoments m = decomposition_moments(runs);
    CHECK(m.sup_r_sq.mean == 0.0);
    CHECK(m.sup_l_sq.mean > 0.0);
}

TEST_CASE("two-parameter scheme") {
    const Partition p = make_uniform_partition(1.0, 4);
    const SimConfig cfg = fine(1.0 / 64.0);
    const auto phi = CovarianceSpec::exponential(1.0);
    const auto a = DriftSpec::affine(0.0, -1.0);

    SUBCASE("a single start reproduces the one-parameter scheme") {
        RandomStream r1(42, 0), r2(42, 0);
        const std::vector<Start> one{{0.0, 0.3}};
        const TrajectoryBundle b = split_two_param(phi, a, one, p, cfg, r1);
        const SplitPaths sp = split_simulate(phi, a, std::vector<double>{0.3}, p, cfg, r2);
        REQUIRE(b.times == sp.times);
        CHECK(std::vector<double>(b.path(0).begin(), b.path(0).end()) == sp.y_values);
    }

    SUBCASE("a start on an existing trajectory follows it") {
        // y jumps at a knot, so the state a trajectory carries into the knot is u(t_1) = y(t_1-).
        RandomStream r1(43, 0);
        const SplitPaths sp = split_simulate(phi, a, std::vector<double>{0.3}, p, cfg, r1);
        const std::size_t k = 16;
        REQUIRE(sp.times[k] == 0.25);
        RandomStream r2(43, 0);
        const std::vector<Start> both{{0.0, 0.3}, {0.25, sp.u(k, 0)}};
        const TrajectoryBundle c = split_two_param(phi, a, both, p, cfg, r2);
        for (std::size_t j = k; j < c.num_times(); ++j) CHECK(c.value(0, j) == c.value(1, j));
        for (std::size_t j = 0; j < k; ++j) CHECK(c.value(1, j) == c.value(1, k));
    }

    SUBCASE("dyadic grid is ordered in x for each start time") {
        std::vector<Start> grid;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) grid.push_back({0.25 * i, -1.0 + 0.5 * j});
        RandomStream rng(44, 0);
        const TrajectoryBundle b = split_two_param(phi, a, grid, p, cfg, rng);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j + 1 < 4; ++j)
                for (std::size_t k = 0; k < b.num_times(); ++k)
                    REQUIRE(b.value(static_cast<std::size_t>(4 * i + j), k) <=
                            b.value(static_cast<std::size_t>(4 * i + j + 1), k));
    }

    SUBCASE("invalid requests") {
        RandomStream rng(45, 0);
        const std::vector<Start> off{{0.01, 0.0}};
        CHECK_THROWS_AS(split_two_param(phi, a, off, p, cfg, rng), std::invalid_argument);
        const std::vector<Start> ok{{0.0, 0.0}};
        CHECK_THROWS_AS(split_two_param(phi, DriftSpec::one_sided("neg_sqrt"), ok, p, cfg, rng),
                        std::invalid_argument);
    }
}
