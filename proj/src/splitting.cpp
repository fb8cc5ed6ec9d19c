#include "harris/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace harris {

Partition make_uniform_partition(double T, std::size_t N) {
    if (!(T > 0.0) || N < 1) throw std::invalid_argument("uniform partition needs T > 0 and N >= 1");
    Partition p;
    p.kind = PartitionKind::uniform;
    p.knots.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k) p.knots[k] = T * static_cast<double>(k) / static_cast<double>(N);
    p.knots[N] = T;
    p.delta_n = T / static_cast<double>(N);
    return p;
}

Partition make_geometric_partition(double T, std::size_t N, double ratio) {
    if (!(T > 0.0) || N < 1 || !(ratio > 0.0))
        throw std::invalid_argument("geometric partition needs T > 0, N >= 1, ratio > 0");
    std::vector<double> len(N);
    double total = 0.0;
    for (std::size_t k = 0; k < N; ++k) total += (len[k] = std::pow(ratio, static_cast<double>(k)));
    std::vector<double> knots(N + 1, 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < N; ++k) knots[k + 1] = T * ((acc += len[k]) / total);
    knots[N] = T;
    Partition p = make_explicit_partition(std::move(knots));
    p.kind = PartitionKind::geometric;
    return p;
}

Partition make_explicit_partition(std::vector<double> knots) {
    if (knots.size() < 2 || knots.front() != 0.0)
        throw std::invalid_argument("explicit partition must start at 0 and have at least two knots");
    for (std::size_t k = 1; k < knots.size(); ++k)
        if (!(knots[k] > knots[k - 1])) throw std::invalid_argument("partition knots must be strictly increasing");
    Partition p;
    p.kind = PartitionKind::explicit_knots;
    p.knots = std::move(knots);
    for (std::size_t k = 1; k < p.knots.size(); ++k) p.delta_n = std::max(p.delta_n, p.knots[k] - p.knots[k - 1]);
    return p;
}

Locator locate(const Partition& p, double t) {
    const double T = p.horizon();
    if (!(t >= 0.0) || t > T) throw std::invalid_argument("locate: t outside [0, T]");
    const std::size_t N = p.blocks();
    if (t == T) return {p.knots[N - 1], T, N - 1};
    const auto it = std::upper_bound(p.knots.begin(), p.knots.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - p.knots.begin()) - 1;
    return {p.knots[k], p.knots[k + 1], k};
}

RandomStream sibling_stream(const RandomStream& s, Purpose purpose) {
    const std::uint64_t low = s.stream_id() & 0x0000FFFFFFFFFFFFull;
    return RandomStream(s.seed(), low | (static_cast<std::uint64_t>(purpose) << 48));
}

namespace {

struct FineGrid {
    std::vector<std::size_t> steps;
    std::vector<double> h;
};

FineGrid make_grid(const Partition& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt_fine must be positive");
    FineGrid g;
    for (std::size_t b = 0; b < p.blocks(); ++b) {
        const double len = p.knots[b + 1] - p.knots[b];
        double n = std::round(len / dt);
        if (n < 1.0 || std::abs(n * dt - len) > 1e-9 * p.horizon()) n = std::ceil(len / dt);
        g.steps.push_back(static_cast<std::size_t>(n));
        g.h.push_back(len / n);
    }
    return g;
}

// Driver points: union of two sorted lists, with points closer than tol sharing one driver.
void union_drivers(const std::vector<double>& a, const std::vector<double>& b, double tol, std::vector<double>& drivers,
                   std::vector<std::size_t>& map_a, std::vector<std::size_t>& map_b) {
    drivers.clear();
    map_a.resize(a.size());
    map_b.resize(b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        const bool take_a = j >= b.size() || (i < a.size() && a[i] <= b[j]);
        const double v = take_a ? a[i] : b[j];
        if (drivers.empty() || v - drivers.back() > tol) drivers.push_back(v);
        if (take_a) map_a[i++] = drivers.size() - 1;
        else map_b[j++] = drivers.size() - 1;
    }
}

SplitPaths run_split(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s, const Partition& p,
                     const SimConfig& cfg, RandomStream& rng, const SplitOptions& opts, PathRecord* ref,
                     StrongErrors* err, CouplingMode mode) {
    validate(a);
    const FineGrid grid = make_grid(p, cfg.dt_fine);
    const std::size_t N = p.blocks();
    const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
    const bool with_ref = ref != nullptr;
    const bool regularized = a.needs_regularization();
    const bool has_drift = a.kind != DriftKind::zero;
    const double eps = opts.epsilon.value_or(std::sqrt(p.delta_n));
    const int S = std::max(1, opts.regularizer_substeps);

    ClusterState ys = init_state(x0s);
    ClusterState xs = ys;
    const std::size_t m = ys.num_labels();

    SplitPaths sp;
    sp.num_labels = m;
    sp.partition = p;
    sp.r_sup.assign(m, 0.0);
    sp.l_sup.assign(m, 0.0);
    if (cfg.log_increments) sp.increments.emplace().num_labels = m;
    if (with_ref) {
        *ref = PathRecord{};
        ref->num_labels = m;
        err->sup_y.assign(m, 0.0);
        err->sup_u.assign(m, 0.0);
    }

    SimConfig ucfg = cfg;
    if (cfg.zero_noise) ucfg.bridge_crossing = false;
    NoiseSampler sampler_y(phi, cfg.jitter);
    NoiseSampler sampler_x(phi, cfg.jitter);
    ClusterUpdater upd_y(phi, ucfg);
    ClusterUpdater upd_x(phi, ucfg);
    RandomStream reg_rng = sibling_stream(rng, Purpose::regularizer);
    const CrossingKey key{rng.seed(), rng.stream_id()};

    std::vector<double> upath, uend(m), prev_uend(m), reg_normals;
    std::vector<std::size_t> mem_start;
    std::vector<double> inc_x, inc_y, inc_d, drivers, normals, nrm_x, nrm_y;
    std::vector<std::size_t> map_x, map_y;

    std::size_t g = 0;
    std::size_t c0 = 0;
    std::size_t b = 0;
    double tb = 0.0;
    double h = 0.0;

    auto observe = [&](std::size_t j, std::size_t nb, double t) {
        const bool rec = (g % stride == 0) || j == 0 || (b + 1 == N && j == nb);
        if (rec) sp.times.push_back(t);
        for (std::size_t l = 0; l < m; ++l) {
            const double yv = ys.reps[ys.membership[l]];
            const double uv = upath[j * c0 + mem_start[l]];
            const double rv = uend[l] - uv;
            const double lv = yv - uend[l];
            sp.r_sup[l] = std::max(sp.r_sup[l], std::abs(rv));
            sp.l_sup[l] = std::max(sp.l_sup[l], std::abs(lv));
            if (rec) {
                sp.u_values.push_back(uv);
                sp.y_values.push_back(yv);
                sp.r_values.push_back(rv);
                sp.l_values.push_back(lv);
            }
        }
        if (!with_ref) return;
        for (std::size_t l = 0; l < m; ++l) {
            const double x = xs.reps[xs.membership[l]];
            const double dy = ys.reps[ys.membership[l]] - x;
            const double du = upath[j * c0 + mem_start[l]] - x;
            double sy = dy * dy;
            double su = du * du;
            if (j == 0 && b > 0) {
                // y_{t_b-} equals u at t_b; u_{t_b-} is the previous block's end value.
                sy = std::max(sy, su);
                su = std::max(su, (prev_uend[l] - x) * (prev_uend[l] - x));
            }
            err->sup_y[l] = std::max(err->sup_y[l], sy);
            err->sup_u[l] = std::max(err->sup_u[l], su);
        }
        if (rec) {
            ref->times.push_back(t);
            for (std::size_t l = 0; l < m; ++l) ref->values.push_back(xs.reps[xs.membership[l]]);
        }
    };

    for (b = 0; b < N; ++b) {
        const std::size_t nb = grid.steps[b];
        h = grid.h[b];
        tb = p.knots[b];
        const double len = p.knots[b + 1] - tb;

        // Drift block: u on [t_b, t_{b+1}) from the clusters at t_b-.
        c0 = ys.reps.size();
        mem_start = ys.membership;
        upath.assign((nb + 1) * c0, 0.0);
        for (std::size_t c = 0; c < c0; ++c) upath[c] = ys.reps[c];
        if (regularized) {
            reg_normals.resize(nb * static_cast<std::size_t>(S));
            if (eps != 0.0) reg_rng.fill_normals(reg_normals);
            else std::fill(reg_normals.begin(), reg_normals.end(), 0.0);
            for (std::size_t j = 1; j <= nb; ++j)
                for (std::size_t c = 0; c < c0; ++c)
                    upath[j * c0 + c] = regularized_flow_step(
                        a, upath[(j - 1) * c0 + c], h, eps,
                        std::span<const double>(reg_normals).subspan((j - 1) * S, static_cast<std::size_t>(S)));
        } else {
            for (std::size_t j = 1; j <= nb; ++j) {
                const double dt = j == nb ? len : static_cast<double>(j) * h;
                for (std::size_t c = 0; c < c0; ++c)
                    upath[j * c0 + c] = has_drift ? ode_flow(a, upath[c], dt, opts.ode_tol) : upath[c];
            }
        }
        for (std::size_t l = 0; l < m; ++l) uend[l] = upath[nb * c0 + mem_start[l]];
        if (b > 0) {
            sp.knot_times.push_back(tb);
            sp.u_left.insert(sp.u_left.end(), prev_uend.begin(), prev_uend.end());
        }

        // The whole block's drift enters y at the block start.
        ys.time = tb;
        if (has_drift) {
            for (std::size_t c = 0; c < c0; ++c) ys.reps[c] = upath[nb * c0 + c];
            coalesce_in_place(ys, cfg.tol_merge, nullptr, &sp.merge_events);
        }

        for (std::size_t j = 0; j < nb; ++j) {
            const double t = tb + static_cast<double>(j) * h;
            observe(j, nb, t);

            if (with_ref && has_drift) {
                for (double& x : xs.reps) x += eval_drift(a, x) * h;
                xs.time = t;
                coalesce_in_place(xs, cfg.tol_merge, nullptr, &ref->merge_events);
            }

            const std::uint64_t step_key = rng.position();
            if (cfg.zero_noise) {
                inc_y.assign(ys.reps.size(), 0.0);
                inc_x.assign(xs.reps.size(), 0.0);
            } else if (!with_ref) {
                sampler_y.sample(ys.reps, h, rng, inc_y);
            } else if (mode == CouplingMode::shared_field) {
                union_drivers(xs.reps, ys.reps, cfg.tol_merge, drivers, map_x, map_y);
                sampler_y.sample(drivers, h, rng, inc_d);
                inc_x.resize(xs.reps.size());
                inc_y.resize(ys.reps.size());
                for (std::size_t c = 0; c < xs.reps.size(); ++c) inc_x[c] = inc_d[map_x[c]];
                for (std::size_t c = 0; c < ys.reps.size(); ++c) inc_y[c] = inc_d[map_y[c]];
            } else {
                normals.resize(m);
                rng.fill_normals(normals);
                const auto lead_x = xs.lead_labels();
                const auto lead_y = ys.lead_labels();
                nrm_x.resize(lead_x.size());
                nrm_y.resize(lead_y.size());
                for (std::size_t c = 0; c < lead_x.size(); ++c) nrm_x[c] = normals[lead_x[c]];
                for (std::size_t c = 0; c < lead_y.size(); ++c) nrm_y[c] = normals[lead_y[c]];
                sampler_x.transform(xs.reps, h, nrm_x, inc_x);
                sampler_y.transform(ys.reps, h, nrm_y, inc_y);
            }

            if (sp.increments) {
                auto& log = *sp.increments;
                log.step_h.push_back(h);
                for (std::size_t l = 0; l < m; ++l) {
                    log.increments.push_back(inc_y[ys.membership[l]]);
                    log.positions.push_back(ys.reps[ys.membership[l]]);
                }
            }

            ys.time = t;
            upd_y.apply(ys, inc_y, h, key, step_key, &sp.merge_events);
            if (with_ref) {
                xs.time = t;
                upd_x.apply(xs, inc_x, h, key, step_key, &ref->merge_events);
            }
            ++g;
        }
        prev_uend = uend;
    }
    b = N - 1;
    observe(grid.steps[N - 1], grid.steps[N - 1], p.horizon());
    return sp;
}

}  // namespace

SplitPaths split_simulate(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s,
                          const Partition& p, const SimConfig& cfg, RandomStream& rng, const SplitOptions& opts) {
    return run_split(phi, a, x0s, p, cfg, rng, opts, nullptr, nullptr, CouplingMode::shared_field);
}

CoupledPaths coupled_pair(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s,
                          const Partition& p, const SimConfig& cfg, std::uint64_t seed, std::uint32_t replicate,
                          CouplingMode mode, const SplitOptions& opts) {
    RandomStream rng(seed, make_stream_id(Purpose::increments, 0, replicate));
    CoupledPaths out;
    out.split = run_split(phi, a, x0s, p, cfg, rng, opts, &out.reference, &out.errors, mode);
    return out;
}

StrongErrors strong_errors(const CoupledPaths& pair) {
    const SplitPaths& sp = pair.split;
    const PathRecord& ref = pair.reference;
    const std::size_t m = sp.num_labels;
    StrongErrors e;
    e.sup_y.assign(m, 0.0);
    e.sup_u.assign(m, 0.0);
    for (std::size_t r = 0; r < sp.num_rows(); ++r)
        for (std::size_t l = 0; l < m; ++l) {
            const double x = ref.value(r, l);
            e.sup_y[l] = std::max(e.sup_y[l], (sp.y(r, l) - x) * (sp.y(r, l) - x));
            e.sup_u[l] = std::max(e.sup_u[l], (sp.u(r, l) - x) * (sp.u(r, l) - x));
        }
    // Left limits at interior knots: y_{t_k-} is the recorded u at t_k, u_{t_k-} is stored separately.
    for (std::size_t k = 0; k < sp.knot_times.size(); ++k) {
        const auto it = std::lower_bound(sp.times.begin(), sp.times.end(), sp.knot_times[k]);
        const std::size_t r = static_cast<std::size_t>(it - sp.times.begin());
        for (std::size_t l = 0; l < m; ++l) {
            const double x = ref.value(r, l);
            const double yl = sp.u(r, l) - x;
            const double ul = sp.u_left[k * m + l] - x;
            e.sup_y[l] = std::max(e.sup_y[l], yl * yl);
            e.sup_u[l] = std::max(e.sup_u[l], ul * ul);
        }
    }
    return e;
}

DecompositionSummary decomposition_diagnostics(const SplitPaths& sp) {
    if (sp.r_values.size() != sp.y_values.size()) throw std::invalid_argument("decomposition logs absent");
    DecompositionSummary d;
    d.r_sup = sp.r_sup;
    d.l_sup = sp.l_sup;
    for (std::size_t i = 0; i < sp.y_values.size(); ++i) {
        const double res = sp.y_values[i] - sp.u_values[i] - sp.l_values[i] - sp.r_values[i];
        d.identity_residual = std::max(d.identity_residual, std::abs(res));
    }
    return d;
}

DecompositionMoments decomposition_moments(std::span<const SplitPaths> ensemble, std::size_t label) {
    std::vector<double> r2, l2;
    for (const auto& sp : ensemble) {
        r2.push_back(sp.r_sup.at(label) * sp.r_sup.at(label));
        l2.push_back(sp.l_sup.at(label) * sp.l_sup.at(label));
    }
    return {mean_se(r2), mean_se(l2)};
}

namespace {

std::size_t insert_label(ClusterState& s, double v, double tol) {
    const auto it = std::lower_bound(s.reps.begin(), s.reps.end(), v);
    std::size_t pos = static_cast<std::size_t>(it - s.reps.begin());
    std::size_t cluster;
    if (pos < s.reps.size() && s.reps[pos] - v <= tol) {
        cluster = pos;
    } else if (pos > 0 && v - s.reps[pos - 1] <= tol) {
        cluster = pos - 1;
    } else {
        s.reps.insert(s.reps.begin() + static_cast<std::ptrdiff_t>(pos), v);
        for (auto& c : s.membership)
            if (c >= pos) ++c;
        cluster = pos;
    }
    s.membership.push_back(cluster);
    return s.membership.size() - 1;
}

}  // namespace

TrajectoryBundle split_two_param(const CovarianceSpec& phi, const DriftSpec& a, std::span<const Start> starts,
                                 const Partition& p, const SimConfig& cfg, RandomStream& rng, const SplitOptions& opts) {
    validate(a);
    if (a.needs_regularization())
        throw std::invalid_argument("split_two_param supports zero, affine and Lipschitz drifts only");
    if (starts.empty()) throw std::invalid_argument("split_two_param: no starts");
    const FineGrid grid = make_grid(p, cfg.dt_fine);
    const std::size_t N = p.blocks();
    const double T = p.horizon();
    const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
    const bool has_drift = a.kind != DriftKind::zero;

    std::vector<std::size_t> block_first(N + 1, 0);
    for (std::size_t b = 0; b < N; ++b) block_first[b + 1] = block_first[b] + grid.steps[b];
    const std::size_t total = block_first[N];

    // Birth step of each start on the fine grid.
    std::vector<std::size_t> birth(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const double s = starts[i].s;
        if (!(s >= 0.0) || !(s < T)) throw std::invalid_argument("split_two_param: start time outside [0, T)");
        const Locator loc = locate(p, s);
        const double j = std::round((s - loc.d) / grid.h[loc.k]);
        if (std::abs(loc.d + j * grid.h[loc.k] - s) > 1e-9 * T)
            throw std::invalid_argument("split_two_param: start time is not on the fine grid");
        birth[i] = block_first[loc.k] + static_cast<std::size_t>(j);
    }

    SimConfig ucfg = cfg;
    if (cfg.zero_noise) ucfg.bridge_crossing = false;
    NoiseSampler sampler(phi, cfg.jitter);
    ClusterUpdater updater(phi, ucfg);
    const CrossingKey key{rng.seed(), rng.stream_id()};

    ClusterState ys;
    std::vector<std::size_t> internal(starts.size(), std::numeric_limits<std::size_t>::max());
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_step;
    TrajectoryBundle out;
    out.starts.assign(starts.begin(), starts.end());
    out.shared_seed = rng.seed();
    std::vector<double> inc;

    std::size_t g = 0;
    for (std::size_t b = 0; b < N; ++b) {
        const std::size_t nb = grid.steps[b];
        const double h = grid.h[b];
        const double tb = p.knots[b];
        const double tnext = p.knots[b + 1];
        for (std::size_t j = 0; j <= nb; ++j) {
            const bool last = (b + 1 == N && j == nb);
            if (j == nb && !last) break;
            const double t = j == nb ? tnext : tb + static_cast<double>(j) * h;
            if (j == 0 && has_drift && !ys.reps.empty()) {
                for (double& r : ys.reps) r = ode_flow(a, r, tnext - tb, opts.ode_tol);
                ys.time = t;
                coalesce_in_place(ys, cfg.tol_merge);
            }
            bool born_now = false;
            if (!last) {
                for (std::size_t i = 0; i < starts.size(); ++i) {
                    if (birth[i] != g) continue;
                    const double v = has_drift ? ode_flow(a, starts[i].x, tnext - t, opts.ode_tol) : starts[i].x;
                    internal[i] = insert_label(ys, v, cfg.tol_merge);
                    born_now = true;
                }
                if (born_now) coalesce_in_place(ys, cfg.tol_merge);
            }
            if (g % stride == 0 || j == 0 || born_now || last) {
                out.times.push_back(t);
                row_step.push_back(g);
                std::vector<double> row(starts.size(), std::numeric_limits<double>::quiet_NaN());
                for (std::size_t i = 0; i < starts.size(); ++i)
                    if (internal[i] != std::numeric_limits<std::size_t>::max())
                        row[i] = ys.reps[ys.membership[internal[i]]];
                rows.push_back(std::move(row));
            }
            if (last) break;
            if (!ys.reps.empty()) {
                const std::uint64_t step_key = rng.position();
                if (cfg.zero_noise) inc.assign(ys.reps.size(), 0.0);
                else sampler.sample(ys.reps, h, rng, inc);
                ys.time = t;
                updater.apply(ys, inc, h, key, step_key, nullptr);
            }
            ++g;
        }
    }
    (void)total;

    const std::size_t K = out.times.size();
    out.values.assign(starts.size() * K, 0.0);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        std::size_t first = 0;
        while (first < K && std::isnan(rows[first][i])) ++first;
        for (std::size_t k = 0; k < K; ++k) out.values[i * K + k] = rows[std::max(k, first)][i];
    }
    return out;
}

}  // namespace harris
