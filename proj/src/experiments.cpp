#include "harris/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "harris/coalescence_theory.hpp"
#include "harris/measures.hpp"
#include "harris/parallel.hpp"
#include "harris/splitting.hpp"
#include "harris/stats.hpp"

namespace harris {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ConvergenceReport new_report(const std::string& name, const ExperimentConfig& cfg) {
    ConvergenceReport r;
    r.experiment = name;
    r.config_hash = config_hash(cfg);
    r.seed = cfg.seed;
    return r;
}

std::vector<std::size_t> sorted_partitions(const ExperimentConfig& cfg) {
    std::vector<std::size_t> ns = cfg.partitions;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    return ns;
}

double dlog(double delta) { return delta * std::log(1.0 / delta); }

double mean_of(const std::vector<double>& v) { return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size()); }

void add_slope(ConvergenceReport& r, const std::string& name, const std::vector<double>& delta,
               const std::vector<double>& metric, const std::vector<double>& se, std::uint64_t seed,
               std::uint16_t sub) {
    const SlopeFit f = loglog_slope(delta, metric, se, RandomStream(seed, make_stream_id(Purpose::bootstrap, sub, 0)));
    r.add_summary("slope_" + name, f.degenerate ? kNaN : f.slope);
    r.add_summary("slope_" + name + "_ci_low", f.degenerate ? kNaN : f.ci_low);
    r.add_summary("slope_" + name + "_ci_high", f.degenerate ? kNaN : f.ci_high);
    r.add_summary("slope_" + name + "_degenerate", f.degenerate ? 1.0 : 0.0);
}

// max ratio / ratio at the coarsest partition.
double growth_of(const std::vector<double>& ratio) {
    if (ratio.empty() || !(ratio.front() > 0.0)) return kNaN;
    return *std::max_element(ratio.begin(), ratio.end()) / ratio.front();
}

std::size_t row_at(const std::vector<double>& times, double t) {
    const double tol = 1e-9 * std::max(1.0, std::abs(times.back()));
    const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol) throw std::logic_error("time not recorded");
    return static_cast<std::size_t>(it - times.begin());
}

}  // namespace

ConvergenceReport run_strong_rate(const ExperimentConfig& cfg) {
    validate(cfg);
    const CovarianceSpec phi = parse_phi(cfg.phi);
    const DriftSpec a = parse_drift(cfg.drift);
    const CouplingMode mode = parse_coupling(cfg.coupling);
    const auto ns = sorted_partitions(cfg);
    SimConfig sim = sim_config(cfg);
    sim.record_stride = fine_steps(cfg.T, cfg.dt_fine);
    SplitOptions opts;
    opts.epsilon = cfg.epsilon;

    const std::size_t R = cfg.reps;
    const std::size_t m = cfg.particles.size();
    std::vector<double> sy(ns.size() * R), su(ns.size() * R), l2(ns.size() * R), r2(ns.size() * R);
    parallel_for(ns.size() * R, [&](std::size_t item) {
        const std::size_t i = item / R;
        const std::size_t rep = item % R;
        const Partition p = make_uniform_partition(cfg.T, ns[i]);
        const CoupledPaths cp = coupled_pair(phi, a, cfg.particles, p, sim, cfg.seed, static_cast<std::uint32_t>(rep),
                                             mode, opts);
        double a_y = 0, a_u = 0, a_l = 0, a_r = 0;
        for (std::size_t l = 0; l < m; ++l) {
            a_y += cp.errors.sup_y[l];
            a_u += cp.errors.sup_u[l];
            a_l += cp.split.l_sup[l] * cp.split.l_sup[l];
            a_r += cp.split.r_sup[l] * cp.split.r_sup[l];
        }
        const double w = 1.0 / static_cast<double>(m);
        sy[item] = a_y * w;
        su[item] = a_u * w;
        l2[item] = a_l * w;
        r2[item] = a_r * w;
    });

    ConvergenceReport rep = new_report("strong_rate", cfg);
    rep.columns = {"N",        "delta_n", "sup_y_sq", "sup_y_sq_se", "sup_u_sq", "sup_u_sq_se", "u_ratio",
                   "sup_l_sq", "sup_l_sq_se", "l_ratio", "sup_r_sq", "sup_r_sq_se", "r_ratio"};
    std::vector<double> delta, my, sey, mu, seu, ur, lr, rr;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double d = cfg.T / static_cast<double>(ns[i]);
        auto slice = [&](const std::vector<double>& v) {
            return mean_se(std::span<const double>(v).subspan(i * R, R));
        };
        const Estimate ey = slice(sy), eu = slice(su), el = slice(l2), er = slice(r2);
        const double u_ratio = eu.mean / dlog(d);
        const double l_ratio = el.mean / dlog(d);
        const double r_ratio = er.mean / d;
        rep.rows.push_back({static_cast<double>(ns[i]), d, ey.mean, ey.se, eu.mean, eu.se, u_ratio, el.mean, el.se,
                            l_ratio, er.mean, er.se, r_ratio});
        delta.push_back(d);
        my.push_back(ey.mean);
        sey.push_back(ey.se);
        mu.push_back(eu.mean);
        seu.push_back(eu.se);
        ur.push_back(u_ratio);
        lr.push_back(l_ratio);
        rr.push_back(r_ratio);
    }
    add_slope(rep, "y", delta, my, sey, cfg.seed, 0);
    add_slope(rep, "u", delta, mu, seu, cfg.seed, 1);
    rep.add_summary("u_ratio_growth", growth_of(ur));
    rep.add_summary("l_ratio_growth", growth_of(lr));
    rep.add_summary("r_ratio_growth", growth_of(rr));
    return rep;
}

ConvergenceReport run_sharpness(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.drift = "zero";
    validate(c);
    const CovarianceSpec phi = parse_phi(c.phi);
    const DriftSpec a = DriftSpec::zero();
    const auto ns = sorted_partitions(c);
    SimConfig sim = sim_config(c);
    sim.record_stride = fine_steps(c.T, c.dt_fine);
    const std::size_t R = c.reps;
    const double x0[1] = {c.particles.front()};
    std::vector<double> su(ns.size() * R);
    parallel_for(ns.size() * R, [&](std::size_t item) {
        const std::size_t i = item / R;
        const Partition p = make_uniform_partition(c.T, ns[i]);
        const CoupledPaths cp = coupled_pair(phi, a, x0, p, sim, c.seed, static_cast<std::uint32_t>(item % R));
        su[item] = cp.errors.sup_u[0];
    });

    ConvergenceReport rep = new_report("sharpness", c);
    rep.columns = {"n", "sup_u_sq", "sup_u_sq_se", "ratio", "ratio_se", "oracle_2n_max_chi2", "oracle_z"};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double n = static_cast<double>(ns[i]);
        const Estimate e = mean_se(std::span<const double>(su).subspan(i * R, R));
        const double oracle = 2.0 / n * expected_max_chi2(ns[i]);
        if (ns[i] < 2) {
            rep.rows.push_back({n, e.mean, e.se, kNaN, kNaN, oracle, (e.mean - oracle) / e.se});
            continue;
        }
        const double scale = 4.0 * std::log(n) / n;
        const double ratio = e.mean / scale;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        rep.rows.push_back({n, e.mean, e.se, ratio, e.se / scale, oracle, (e.mean - oracle) / e.se});
    }
    rep.add_summary("ratio_min", lo);
    rep.add_summary("ratio_max", hi);
    return rep;
}

ConvergenceReport run_wasserstein_rate(const ExperimentConfig& cfg) {
    validate(cfg);
    const CovarianceSpec phi = parse_phi(cfg.phi);
    const DriftSpec a = parse_drift(cfg.drift);
    const CouplingMode mode = parse_coupling(cfg.coupling);
    const auto ns = sorted_partitions(cfg);
    const std::size_t G = cfg.grid_points;
    const std::size_t K = cfg.check_times;
    if (G < 1 || K < 1) throw std::invalid_argument("wasserstein: grid_points and check_times must be positive");
    const std::size_t total = fine_steps(cfg.T, cfg.dt_fine);
    if (total % K != 0) throw std::invalid_argument("wasserstein: check_times must divide the number of fine steps");
    std::vector<double> grid(G);
    for (std::size_t i = 0; i < G; ++i) grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(G);
    SimConfig sim = sim_config(cfg);
    sim.record_stride = total / K;
    SplitOptions opts;
    opts.epsilon = cfg.epsilon;

    const std::size_t R = cfg.reps;
    std::vector<double> w(ns.size() * R * K), w2(ns.size() * R * K);
    parallel_for(ns.size() * R, [&](std::size_t item) {
        const std::size_t i = item / R;
        const Partition p = make_uniform_partition(cfg.T, ns[i]);
        const CoupledPaths cp =
            coupled_pair(phi, a, grid, p, sim, cfg.seed, static_cast<std::uint32_t>(item % R), mode, opts);
        std::vector<double> xs(G), ys(G);
        for (std::size_t c = 0; c < K; ++c) {
            const double t = cfg.T * static_cast<double>(c + 1) / static_cast<double>(K);
            const std::size_t rr = row_at(cp.reference.times, t);
            const std::size_t rs = row_at(cp.split.times, t);
            for (std::size_t l = 0; l < G; ++l) {
                xs[l] = cp.reference.value(rr, l);
                ys[l] = cp.split.y(rs, l);
            }
            const double d = wasserstein_p(pushforward(grid, xs), pushforward(grid, ys), 2.0);
            w[item * K + c] = d;
            w2[item * K + c] = d * d;
        }
    });

    ConvergenceReport rep = new_report("wasserstein_rate", cfg);
    rep.columns = {"N", "delta_n", "sup_E_W2_sq", "sup_E_W2_sq_se", "t_star", "sup_E_W2", "sup_E_W2_se"};
    std::vector<double> delta, m2, se2, m1, se1;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        Estimate best2{-1.0, 0.0, 0}, best1{-1.0, 0.0, 0};
        double t_star = 0.0;
        for (std::size_t c = 0; c < K; ++c) {
            std::vector<double> v2(R), v1(R);
            for (std::size_t r = 0; r < R; ++r) {
                v2[r] = w2[(i * R + r) * K + c];
                v1[r] = w[(i * R + r) * K + c];
            }
            const Estimate e2 = mean_se(v2), e1 = mean_se(v1);
            if (e2.mean > best2.mean) {
                best2 = e2;
                t_star = cfg.T * static_cast<double>(c + 1) / static_cast<double>(K);
            }
            if (e1.mean > best1.mean) best1 = e1;
        }
        const double d = cfg.T / static_cast<double>(ns[i]);
        rep.rows.push_back({static_cast<double>(ns[i]), d, best2.mean, best2.se, t_star, best1.mean, best1.se});
        delta.push_back(d);
        m2.push_back(best2.mean);
        se2.push_back(best2.se);
        m1.push_back(best1.mean);
        se1.push_back(best1.se);
    }
    add_slope(rep, "W2_sq", delta, m2, se2, cfg.seed, 2);
    add_slope(rep, "W2", delta, m1, se1, cfg.seed, 3);
    auto strictly_decreasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] < v[i - 1])) return 0.0;
        return 1.0;
    };
    rep.add_summary("W2_sq_strictly_decreasing", strictly_decreasing(m2));
    rep.add_summary("W2_strictly_decreasing", strictly_decreasing(m1));
    return rep;
}

ConvergenceReport run_weak_convergence(const ExperimentConfig& cfg) {
    validate(cfg);
    const CovarianceSpec phi = parse_phi(cfg.phi);
    const DriftSpec a = parse_drift(cfg.drift);
    const auto ns = sorted_partitions(cfg);
    if (cfg.particles.size() > 5) throw std::invalid_argument("weak: at most 5 particles");
    if (cfg.trials < 1) throw std::invalid_argument("weak: trials must be positive");
    const bool gaps = cfg.particles.size() >= 2;
    SimConfig sim = sim_config(cfg);
    sim.record_stride = fine_steps(cfg.T, cfg.dt_fine);
    SplitOptions opts;
    opts.epsilon = cfg.epsilon;
    const std::size_t R = cfg.reps;

    auto reference_sample = [&](Purpose purpose, std::uint16_t sub, std::vector<double>& x0, std::vector<double>& gap) {
        x0.assign(R, 0.0);
        gap.assign(R, 0.0);
        parallel_for(R, [&](std::size_t r) {
            RandomStream rng(cfg.seed, make_stream_id(purpose, sub, static_cast<std::uint32_t>(r)));
            const auto v = evolve(phi, a, cfg.particles, cfg.T, sim, rng).label_values();
            x0[r] = v[0];
            if (gaps) gap[r] = v[1] - v[0];
        });
    };

    std::vector<double> ks(ns.size() * cfg.trials), ks_gap(ns.size() * cfg.trials, 0.0);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        std::vector<double> rx, rg;
        reference_sample(Purpose::reference, static_cast<std::uint16_t>(t), rx, rg);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const Partition p = make_uniform_partition(cfg.T, ns[i]);
            std::vector<double> sx(R), sg(R);
            parallel_for(R, [&](std::size_t r) {
                RandomStream rng(cfg.seed,
                                 make_stream_id(Purpose::increments, static_cast<std::uint16_t>(t), static_cast<std::uint32_t>(r)));
                const SplitPaths sp = split_simulate(phi, a, cfg.particles, p, sim, rng, opts);
                const std::size_t last = sp.num_rows() - 1;
                sx[r] = sp.y(last, 0);
                if (gaps) sg[r] = sp.y(last, 1) - sp.y(last, 0);
            });
            ks[i * cfg.trials + t] = ks_two_sample(sx, rx);
            if (gaps) ks_gap[i * cfg.trials + t] = ks_two_sample(sg, rg);
        }
    }

    std::size_t null_pass = 0;
    for (std::size_t t = 0; t < cfg.null_trials; ++t) {
        std::vector<double> ax, ag, bx, bg;
        reference_sample(Purpose::auxiliary, static_cast<std::uint16_t>(2 * t), ax, ag);
        reference_sample(Purpose::auxiliary, static_cast<std::uint16_t>(2 * t + 1), bx, bg);
        if (ks_two_sample(ax, bx) < ks_threshold_95(R, R)) ++null_pass;
    }

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    const double threshold = ks_threshold_95(R, R);
    ConvergenceReport rep = new_report("weak_convergence", cfg);
    rep.columns = {"N", "delta_n", "median_ks", "mean_ks", "frac_below_threshold", "median_ks_gap"};
    std::vector<double> med;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        std::vector<double> v(ks.begin() + static_cast<std::ptrdiff_t>(i * cfg.trials),
                              ks.begin() + static_cast<std::ptrdiff_t>((i + 1) * cfg.trials));
        std::vector<double> g(ks_gap.begin() + static_cast<std::ptrdiff_t>(i * cfg.trials),
                              ks_gap.begin() + static_cast<std::ptrdiff_t>((i + 1) * cfg.trials));
        const double below =
            static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x < threshold; })) /
            static_cast<double>(v.size());
        med.push_back(median(v));
        rep.rows.push_back({static_cast<double>(ns[i]), cfg.T / static_cast<double>(ns[i]), med.back(), mean_of(v),
                            below, gaps ? median(g) : kNaN});
    }
    rep.add_summary("threshold_95", threshold);
    rep.add_summary("null_trials", static_cast<double>(cfg.null_trials));
    rep.add_summary("null_pass_rate",
                    cfg.null_trials ? static_cast<double>(null_pass) / static_cast<double>(cfg.null_trials) : kNaN);
    rep.add_summary("median_ks_coarsest", med.front());
    rep.add_summary("median_ks_finest", med.back());
    return rep;
}

ConvergenceReport run_coalesce_prob(const ExperimentConfig& cfg) {
    validate(cfg);
    const CovarianceSpec phi = parse_phi(cfg.phi);
    const DriftSpec a = parse_drift(cfg.drift);
    const SimConfig sim = sim_config(cfg);
    std::vector<double> gaps = cfg.gaps;
    std::sort(gaps.begin(), gaps.end());
    std::vector<double> est, se;
    for (double g : gaps) {
        const Estimate e = pair_noncoalescence_mc(phi, a, g, cfg.T, cfg.reps, sim, cfg.seed);
        est.push_back(e.mean);
        se.push_back(e.se);
    }
    LinearFit fit;
    const bool weighted = std::all_of(se.begin(), se.end(), [](double s) { return s > 0.0; });
    if (gaps.size() >= 2) fit = weighted ? weighted_linear_fit(gaps, est, se) : linear_fit(gaps, est);

    ConvergenceReport rep = new_report("coalesce_prob", cfg);
    rep.columns = {"gap", "estimate", "se", "linear_fit_slope", "intercept"};
    double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        rep.rows.push_back({gaps[i], est[i], se[i], fit.slope, fit.intercept});
        if (i > 0 && std::abs(gaps[i] - 2.0 * gaps[i - 1]) <= 1e-12 * gaps[i]) {
            const double ratio = est[i] / est[i - 1];
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
        }
    }
    rep.add_summary("slope", fit.slope);
    rep.add_summary("slope_se", fit.slope_se);
    rep.add_summary("intercept", fit.intercept);
    rep.add_summary("intercept_se", fit.intercept_se);
    rep.add_summary("doubling_ratio_min", rmin);
    rep.add_summary("doubling_ratio_max", rmax);
    return rep;
}

ConvergenceReport run_cluster_count(const ExperimentConfig& cfg) {
    validate(cfg);
    const CovarianceSpec phi = parse_phi(cfg.phi);
    const DriftSpec a = parse_drift(cfg.drift);
    const SimConfig sim = sim_config(cfg);
    ConvergenceReport rep = new_report("cluster_count", cfg);
    rep.columns = {"n_grid", "mean_clusters", "se"};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t n : cfg.n_grids) {
        const Estimate e = cluster_count_mc(phi, a, cfg.interval_lo, cfg.interval_hi, n, cfg.T, cfg.reps, sim, cfg.seed);
        rep.rows.push_back({static_cast<double>(n), e.mean, e.se});
        lo = std::min(lo, e.mean);
        hi = std::max(hi, e.mean);
    }
    rep.add_summary("relative_spread", (hi - lo) / lo);
    return rep;
}

DualRun run_dual(const ExperimentConfig& cfg) {
    validate(cfg);
    const CovarianceSpec phi = parse_phi(cfg.phi);
    const DriftSpec a = parse_drift(cfg.drift);
    if (cfg.dyadic_level < 1 || cfg.dyadic_level > 8) throw std::invalid_argument("dual: dyadic_level must lie in 1..8");
    const std::size_t D = std::size_t{1} << cfg.dyadic_level;
    const double H = cfg.T;
    const Partition p = make_uniform_partition(H, sorted_partitions(cfg).front());
    SimConfig sim = sim_config(cfg);

    std::vector<Start> starts;
    for (std::size_t k = 0; k < D; ++k)
        for (std::size_t i = 0; i < D; ++i)
            starts.push_back({H * static_cast<double>(k) / static_cast<double>(D),
                              cfg.interval_lo + (cfg.interval_hi - cfg.interval_lo) * (2.0 * static_cast<double>(i) + 1.0) /
                                                    (2.0 * static_cast<double>(D))});
    RandomStream rng(cfg.seed, make_stream_id(Purpose::increments, 0, 0));
    DualRun run;
    run.forward = split_two_param(phi, a, starts, p, sim, rng);

    // Dual starts between consecutive distinct values at the mirrored time of the paths born at 0.
    std::vector<Start> dual_starts;
    for (std::size_t k = 0; k < D; ++k) {
        const double s = H * static_cast<double>(k) / static_cast<double>(D);
        const std::size_t at = run.forward.time_index(H - s);
        std::vector<double> v;
        for (std::size_t j = 0; j < run.forward.num_paths(); ++j)
            if (run.forward.starts[j].s == 0.0) v.push_back(run.forward.value(j, at));
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        for (std::size_t i = 0; i + 1 < v.size(); ++i) dual_starts.push_back({s, 0.5 * (v[i] + v[i + 1])});
    }
    run.dual = dual_bundle(run.forward, dual_starts);
    run.violations = wedge_check(run.forward, run.dual);

    ConvergenceReport& rep = run.report;
    rep = new_report("dual", cfg);
    rep.columns = {"forward", "dual", "time", "magnitude"};
    double worst = 0.0;
    for (const auto& v : run.violations) {
        rep.rows.push_back({static_cast<double>(v.forward), static_cast<double>(v.dual), v.time, v.magnitude});
        worst = std::max(worst, v.magnitude);
    }
    rep.add_summary("forward_paths", static_cast<double>(run.forward.num_paths()));
    rep.add_summary("dual_paths", static_cast<double>(run.dual.num_paths()));
    rep.add_summary("violations", static_cast<double>(run.violations.size()));
    rep.add_summary("max_magnitude", worst);
    return run;
}

}  // namespace harris
