#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "harris/experiments.hpp"
#include "harris/parallel.hpp"
#include "harris/splitting.hpp"

using namespace harris;

namespace {

ExperimentConfig small() {
    ExperimentConfig c;
    c.partitions = {2, 4, 8};
    c.dt_fine = 1.0 / 64.0;
    c.reps = 6;
    return c;
}

std::string csv(const ConvergenceReport& r) {
    std::ostringstream os;
    write_csv(r, os);
    return os.str();
}

}  // namespace

TEST_CASE("zero drift gives zero strong errors and a degenerate slope") {
    ExperimentConfig c = small();
    c.drift = "zero";
    const ConvergenceReport r = run_strong_rate(c);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) CHECK(row[r.column("sup_y_sq")] == 0.0);
    CHECK(r.summary_value("slope_y_degenerate") == 1.0);
}

TEST_CASE("reruns are byte-identical and seeds matter") {
    const ExperimentConfig c = small();
    const std::string a = csv(run_strong_rate(c)), b = csv(run_strong_rate(c));
    CHECK(a == b);
    ExperimentConfig d = c;
    d.seed += 1;
    CHECK(csv(run_strong_rate(d)) != a);
}

TEST_CASE("strong rate rows are ordered from coarse to fine") {
    ExperimentConfig c = small();
    c.partitions = {8, 2, 4};
    const ConvergenceReport r = run_strong_rate(c);
    CHECK(r.rows[0][r.column("N")] == 2.0);
    CHECK(r.rows[2][r.column("N")] == 8.0);
    CHECK(r.rows[0][r.column("delta_n")] == 0.5);
}

TEST_CASE("zero drift Wasserstein distances vanish") {
    ExperimentConfig c = small();
    c.drift = "zero";
    c.grid_points = 4;
    c.check_times = 8;
    const ConvergenceReport r = run_wasserstein_rate(c);
    for (const auto& row : r.rows) {
        CHECK(row[r.column("sup_E_W2_sq")] == 0.0);
        CHECK(row[r.column("sup_E_W2")] == 0.0);
    }
}

TEST_CASE("zero drift split and reference share their marginals exactly") {
    std::vector<double> split, ref;
    for (std::uint32_t r = 0; r < 50; ++r) {
        RandomStream a(81, make_stream_id(Purpose::increments, 0, r)), b(81, make_stream_id(Purpose::increments, 0, r));
        SimConfig cfg;
        cfg.dt_fine = 1.0 / 32.0;
        const SplitPaths sp = split_simulate(CovarianceSpec::gaussian(), DriftSpec::zero(), std::vector<double>{0.0},
                                             make_uniform_partition(1.0, 4), cfg, a);
        split.push_back(sp.y(sp.num_rows() - 1, 0));
        ref.push_back(evolve(CovarianceSpec::gaussian(), DriftSpec::zero(), std::vector<double>{0.0}, 1.0, cfg, b).reps[0]);
    }
    CHECK(ks_two_sample(split, ref) == 0.0);
}

TEST_CASE("small runs of every study") {
    ExperimentConfig c = small();

    ExperimentConfig sh = c;
    sh.partitions = {4, 8};
    const ConvergenceReport s = run_sharpness(sh);
    CHECK(s.rows.size() == 2);
    CHECK(s.summary_value("ratio_min") <= s.summary_value("ratio_max"));

    ExperimentConfig wk = c;
    wk.partitions = {2, 8};
    wk.trials = 2;
    wk.null_trials = 2;
    wk.reps = 20;
    wk.particles = {0.0, 0.5};
    const ConvergenceReport w = run_weak_convergence(wk);
    CHECK(w.rows.size() == 2);
    CHECK(std::isfinite(w.rows[0][w.column("median_ks_gap")]));

    ExperimentConfig cp = c;
    cp.phi = "exp:1";
    cp.drift = "zero";
    cp.partitions = {1};
    cp.dt_fine = 0.01;
    cp.reps = 100;
    const ConvergenceReport p = run_coalesce_prob(cp);
    CHECK(p.rows.size() == cp.gaps.size());
    for (const auto& row : p.rows) {
        CHECK(row[p.column("estimate")] >= 0.0);
        CHECK(row[p.column("estimate")] <= 1.0);
    }

    ExperimentConfig cc = cp;
    cc.n_grids = {1, 4};
    cc.reps = 10;
    const ConvergenceReport k = run_cluster_count(cc);
    CHECK(k.rows[0][k.column("mean_clusters")] == 1.0);

    ExperimentConfig du = c;
    du.partitions = {4};
    du.dyadic_level = 2;
    du.interval_lo = -1.0;
    du.interval_hi = 1.0;
    const DualRun d = run_dual(du);
    CHECK(d.forward.num_paths() == 16);
    CHECK(d.violations.empty());
    CHECK(d.report.summary_value("violations") == 0.0);
}

TEST_CASE("parallel_for matches a serial loop and forwards exceptions") {
    std::vector<double> serial(1000), threaded(1000);
    auto body = [](std::size_t i) { return std::sin(static_cast<double>(i)); };
    for (std::size_t i = 0; i < serial.size(); ++i) serial[i] = body(i);
    parallel_for(threaded.size(), [&](std::size_t i) { threaded[i] = body(i); }, 4);
    CHECK(serial == threaded);

    std::atomic<int> calls{0};
    CHECK_THROWS_AS(parallel_for(
                        100,
                        [&](std::size_t i) {
                            ++calls;
                            if (i == 17) throw std::runtime_error("boom");
                        },
                        3),
                    std::runtime_error);
    CHECK(calls.load() <= 100);
}
