#include "harris/flow_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace harris {

std::vector<std::size_t> ClusterState::lead_labels() const {
    std::vector<std::size_t> lead(reps.size(), membership.size());
    for (std::size_t l = membership.size(); l-- > 0;) lead[membership[l]] = l;
    return lead;
}

std::vector<std::vector<std::size_t>> ClusterState::cluster_labels() const {
    std::vector<std::vector<std::size_t>> out(reps.size());
    for (std::size_t l = 0; l < membership.size(); ++l) out[membership[l]].push_back(l);
    return out;
}

std::vector<double> ClusterState::label_values() const {
    std::vector<double> v(membership.size());
    for (std::size_t l = 0; l < membership.size(); ++l) v[l] = reps[membership[l]];
    return v;
}

ClusterState init_state(std::span<const double> x0s) {
    if (x0s.empty()) throw std::invalid_argument("init_state: no starting points");
    for (double x : x0s)
        if (!std::isfinite(x)) throw std::invalid_argument("init_state: non-finite starting point");
    std::vector<std::size_t> order(x0s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x0s[a] < x0s[b]; });
    ClusterState s;
    s.membership.resize(x0s.size());
    for (std::size_t idx : order) {
        if (s.reps.empty() || x0s[idx] != s.reps.back()) s.reps.push_back(x0s[idx]);
        s.membership[idx] = s.reps.size() - 1;
    }
    return s;
}

void coalesce_in_place(ClusterState& state, double tol_merge, const std::vector<char>* marks,
                       std::vector<MergeEvent>* events) {
    struct Group {
        double rep;
        std::size_t first;
        std::size_t last;
    };
    const std::size_t m = state.reps.size();
    if (m < 2) return;

    bool needed = false;
    for (std::size_t i = 0; i + 1 < m && !needed; ++i)
        needed = (marks && (*marks)[i]) || !(state.reps[i + 1] - state.reps[i] > tol_merge);
    if (!needed) return;

    std::vector<std::vector<std::size_t>> labels_of;
    if (events) labels_of = state.cluster_labels();

    std::vector<Group> stack;
    stack.reserve(m);
    for (std::size_t c = 0; c < m; ++c) {
        stack.push_back({state.reps[c], c, c});
        while (stack.size() >= 2) {
            Group& top = stack.back();
            Group& prev = stack[stack.size() - 2];
            const bool forced = marks && (*marks)[prev.last];
            if (!forced && top.rep - prev.rep > tol_merge) break;
            if (events) {
                MergeEvent ev;
                ev.time = state.time;
                for (std::size_t k = prev.first; k <= top.last; ++k)
                    ev.labels.insert(ev.labels.end(), labels_of[k].begin(), labels_of[k].end());
                std::sort(ev.labels.begin(), ev.labels.end());
                events->push_back(std::move(ev));
            }
            prev.rep = 0.5 * (prev.rep + top.rep);
            prev.last = top.last;
            stack.pop_back();
        }
    }

    std::vector<std::size_t> new_of(m);
    std::vector<double> reps(stack.size());
    for (std::size_t g = 0; g < stack.size(); ++g) {
        reps[g] = stack[g].rep;
        for (std::size_t k = stack[g].first; k <= stack[g].last; ++k) new_of[k] = g;
    }
    state.reps = std::move(reps);
    for (auto& c : state.membership) c = new_of[c];
}

ClusterState coalesce(const ClusterState& state, double tol_merge) {
    ClusterState out = state;
    coalesce_in_place(out, tol_merge);
    return out;
}

void NoiseSampler::sample(std::span<const double> points, double h, RandomStream& rng, std::vector<double>& out) {
    normals_.resize(points.size());
    rng.fill_normals(normals_);
    transform(points, h, normals_, out);
}

void NoiseSampler::transform(std::span<const double> points, double h, std::span<const double> normals,
                             std::vector<double>& out) {
    const std::size_t m = points.size();
    out.resize(m);
    const double sh = std::sqrt(h);
    if (m == 1) {
        last_jitter_ = jitter_;
        out[0] = sh * (std::sqrt(1.0 + jitter_) * normals[0]);
        return;
    }
    gram_into(phi_, points, gram_);
    last_jitter_ = cholesky_factor_into(gram_, m, jitter_, factor_);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = factor_.data() + i * m;
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += row[k] * normals[k];
        out[i] = sh * s;
    }
}

void ClusterUpdater::apply(ClusterState& state, std::span<const double> increments, double h, CrossingKey key,
                           std::uint64_t step, std::vector<MergeEvent>* events) {
    const std::size_t m = state.reps.size();
    pre_.assign(state.reps.begin(), state.reps.end());
    for (std::size_t c = 0; c < m; ++c) state.reps[c] += increments[c];
    state.time += h;
    if (m < 2) return;

    bool any_mark = false;
    if (cfg_.bridge_crossing && !cfg_.zero_noise) {
        marks_.assign(m - 1, 0);
        std::vector<std::size_t> lead;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            const double g1 = state.reps[i + 1] - state.reps[i];
            if (!(g1 > cfg_.tol_merge)) continue;
            const double g0 = pre_[i + 1] - pre_[i];
            const double om = 1.0 - eval_phi(phi_, g0);
            if (!(om > 0.0)) continue;
            // The difference of the two drivers over the step has variance 2 (1 - phi(g0)) h; the
            // bridge between g0 and g1 hits zero with probability exp(-2 g0 g1 / (2 (1 - phi) h)).
            const double expo = -g0 * g1 / (om * h);
            if (expo < -40.0) continue;
            if (lead.empty()) lead = state.lead_labels();
            const std::uint64_t pair = (static_cast<std::uint64_t>(lead[i]) << 32) | lead[i + 1];
            if (keyed_uniform(key.seed, key.stream, step, pair) < std::exp(expo)) {
                marks_[i] = 1;
                any_mark = true;
            }
        }
    }
    coalesce_in_place(state, cfg_.tol_merge, any_mark ? &marks_ : nullptr, events);
}

ClusterState driftless_substep(const ClusterState& state, double h, const CovarianceSpec& phi,
                               const SimConfig& cfg, RandomStream& rng) {
    if (!(h > 0.0)) throw std::invalid_argument("driftless_substep: h must be positive");
    ClusterState out = state;
    const std::uint64_t step = rng.position();
    std::vector<double> inc(out.reps.size(), 0.0);
    if (!cfg.zero_noise) {
        NoiseSampler sampler(phi, cfg.jitter);
        sampler.sample(out.reps, h, rng, inc);
    }
    ClusterUpdater updater(phi, cfg);
    updater.apply(out, inc, h, {rng.seed(), rng.stream_id()}, step, nullptr);
    return out;
}

std::size_t fine_steps(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("fine_steps: T and dt must be positive");
    const double r = T / dt;
    const double n = std::round(r);
    if (n < 1.0 || std::abs(n * dt - T) > 1e-9 * T)
        throw std::invalid_argument("dt_fine must divide the time horizon");
    return static_cast<std::size_t>(n);
}

PathRecord simulate(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s, double T,
                    const SimConfig& cfg, RandomStream& rng) {
    const std::size_t steps = fine_steps(T, cfg.dt_fine);
    const double h = T / static_cast<double>(steps);
    const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
    ClusterState state = init_state(x0s);
    const std::size_t m = state.num_labels();

    PathRecord rec;
    rec.num_labels = m;
    auto record = [&]() {
        rec.times.push_back(state.time);
        for (std::size_t l = 0; l < m; ++l) rec.values.push_back(state.reps[state.membership[l]]);
    };
    if (cfg.log_increments) rec.increments.emplace().num_labels = m;

    NoiseSampler sampler(phi, cfg.jitter);
    ClusterUpdater updater(phi, cfg);
    std::vector<double> inc;
    const CrossingKey key{rng.seed(), rng.stream_id()};
    const bool has_drift = a.kind != DriftKind::zero;

    record();
    for (std::size_t k = 0; k < steps; ++k) {
        if (has_drift) {
            for (double& r : state.reps) r += eval_drift(a, r) * h;
            coalesce_in_place(state, cfg.tol_merge, nullptr, &rec.merge_events);
        }
        const std::uint64_t step_key = rng.position();
        if (cfg.zero_noise) inc.assign(state.reps.size(), 0.0);
        else sampler.sample(state.reps, h, rng, inc);
        if (rec.increments) {
            auto& log = *rec.increments;
            log.step_h.push_back(h);
            for (std::size_t l = 0; l < m; ++l) {
                log.increments.push_back(inc[state.membership[l]]);
                log.positions.push_back(state.reps[state.membership[l]]);
            }
        }
        updater.apply(state, inc, h, key, step_key, &rec.merge_events);
        state.time = T * static_cast<double>(k + 1) / static_cast<double>(steps);
        if ((k + 1) % stride == 0 || k + 1 == steps) record();
    }
    return rec;
}

ClusterState evolve(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s, double T,
                    const SimConfig& cfg, RandomStream& rng, bool stop_when_single) {
    const std::size_t steps = fine_steps(T, cfg.dt_fine);
    const double h = T / static_cast<double>(steps);
    ClusterState state = init_state(x0s);
    NoiseSampler sampler(phi, cfg.jitter);
    ClusterUpdater updater(phi, cfg);
    std::vector<double> inc;
    const CrossingKey key{rng.seed(), rng.stream_id()};
    const bool has_drift = a.kind != DriftKind::zero;
    for (std::size_t k = 0; k < steps; ++k) {
        if (stop_when_single && state.reps.size() == 1) break;
        if (has_drift) {
            for (double& r : state.reps) r += eval_drift(a, r) * h;
            coalesce_in_place(state, cfg.tol_merge);
        }
        const std::uint64_t step_key = rng.position();
        if (cfg.zero_noise) inc.assign(state.reps.size(), 0.0);
        else sampler.sample(state.reps, h, rng, inc);
        updater.apply(state, inc, h, key, step_key, nullptr);
        state.time = T * static_cast<double>(k + 1) / static_cast<double>(steps);
    }
    return state;
}

double empirical_quadratic_covariation(const PathRecord& record, const CovarianceSpec& phi) {
    if (!record.increments) throw std::invalid_argument("empirical_quadratic_covariation: increment log missing");
    const auto& log = *record.increments;
    const std::size_t m = log.num_labels;
    const std::size_t steps = log.step_h.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            std::vector<double> cross(steps), pred(steps);
            for (std::size_t k = 0; k < steps; ++k) {
                cross[k] = log.increments[k * m + i] * log.increments[k * m + j];
                pred[k] = eval_phi(phi, log.positions[k * m + i] - log.positions[k * m + j]) * log.step_h[k];
            }
            worst = std::max(worst, std::abs(pairwise_sum(cross) - pairwise_sum(pred)));
        }
    return worst;
}

namespace {

std::size_t nearest_row(const PathRecord& r, double t) {
    const auto it = std::lower_bound(r.times.begin(), r.times.end(), t - 1e-12);
    if (it == r.times.end()) throw std::invalid_argument("martingale_residual: time outside record");
    return static_cast<std::size_t>(it - r.times.begin());
}

}  // namespace

Estimate martingale_residual(std::span<const PathRecord> ensemble, const TestFunction& f,
                             const CovarianceSpec& phi, const DriftSpec& a, double s, double t) {
    if (!(s < t)) throw std::invalid_argument("martingale_residual: need s < t");
    std::vector<double> samples;
    samples.reserve(ensemble.size());
    for (const PathRecord& rec : ensemble) {
        const std::size_t m = rec.num_labels;
        const std::size_t rs = nearest_row(rec, s);
        const std::size_t rt = nearest_row(rec, t);
        std::vector<double> grad(m), hess(m * m);
        double integral = 0.0;
        for (std::size_t r = rs; r < rt; ++r) {
            const auto x = rec.row(r);
            double gen = 0.0;
            if (f.hessian) {
                f.hessian(x, hess);
                for (std::size_t k = 0; k < m; ++k)
                    for (std::size_t j = 0; j < m; ++j) gen += 0.5 * eval_phi(phi, x[k] - x[j]) * hess[k * m + j];
            }
            if (f.gradient && a.kind != DriftKind::zero) {
                f.gradient(x, grad);
                for (std::size_t k = 0; k < m; ++k) gen += eval_drift(a, x[k]) * grad[k];
            }
            integral += gen * (rec.times[r + 1] - rec.times[r]);
        }
        samples.push_back(f.value(rec.row(rt)) - f.value(rec.row(rs)) - integral);
    }
    return mean_se(samples);
}

}  // namespace harris
