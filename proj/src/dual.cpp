#include "harris/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "harris/errors.hpp"

namespace harris {

std::size_t TrajectoryBundle::time_index(double t) const {
    if (times.empty()) throw std::invalid_argument("time_index: empty grid");
    const double tol = 1e-9 * std::max(1.0, std::abs(horizon()));
    const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol) throw std::invalid_argument("time_index: time not on the grid");
    return static_cast<std::size_t>(it - times.begin());
}

TrajectoryBundle TrajectoryBundle::subset(std::span<const std::size_t> indices) const {
    TrajectoryBundle out;
    out.times = times;
    out.shared_seed = shared_seed;
    out.reversed = reversed;
    for (std::size_t j : indices) {
        if (j >= num_paths()) throw std::out_of_range("subset: index out of range");
        out.starts.push_back(starts[j]);
        const auto p = path(j);
        out.values.insert(out.values.end(), p.begin(), p.end());
    }
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double grid_tol(const TrajectoryBundle& b) { return 1e-9 * std::max(1.0, std::abs(b.horizon())); }

// inf over paths born by time index `at` whose value at index `test` passes `pass`, of the value at `at`.
template <class Pass>
double constrained_inf(const TrajectoryBundle& b, std::size_t at, std::size_t test, Pass pass) {
    const double born_by = b.times[at] + grid_tol(b);
    double best = kInf;
    for (std::size_t i = 0; i < b.num_paths(); ++i) {
        if (b.starts[i].s > born_by) continue;
        if (!pass(b.value(i, test))) continue;
        best = std::min(best, b.value(i, at));
    }
    return best;
}

}  // namespace

double dual_value_or_inf(const TrajectoryBundle& bundle, double s, double t, double x) {
    const double H = bundle.horizon();
    if (!(s >= bundle.times.front() - grid_tol(bundle)) || !(s <= t) || t > H + grid_tol(bundle))
        throw std::invalid_argument("dual_value: need 0 <= s <= t <= horizon");
    const std::size_t at = bundle.time_index(H - t);
    const std::size_t test = bundle.time_index(H - s);
    return constrained_inf(bundle, at, test, [x](double v) { return v > x; });
}

double dual_value(const TrajectoryBundle& bundle, double s, double t, double x) {
    const double v = dual_value_or_inf(bundle, s, t, x);
    if (v == kInf) throw CoverageError("dual_value: no stored trajectory qualifies", s, t, x);
    return v;
}

TrajectoryBundle dual_bundle(const TrajectoryBundle& bundle, std::span<const Start> dual_starts) {
    const double H = bundle.horizon();
    const std::size_t K = bundle.num_times();
    TrajectoryBundle out;
    out.reversed = !bundle.reversed;
    out.shared_seed = bundle.shared_seed;
    out.starts.assign(dual_starts.begin(), dual_starts.end());
    out.times.resize(K);
    for (std::size_t k = 0; k < K; ++k) out.times[k] = H - bundle.times[K - 1 - k];
    out.times.front() = bundle.times.front();
    out.values.assign(out.starts.size() * K, 0.0);
    for (std::size_t j = 0; j < out.starts.size(); ++j) {
        const Start st = out.starts[j];
        const std::size_t k0 = out.time_index(st.s);
        const std::size_t test = K - 1 - k0;
        for (std::size_t k = k0; k < K; ++k) {
            const double v = constrained_inf(bundle, K - 1 - k, test, [&](double y) { return y > st.x; });
            if (v == kInf) throw CoverageError("dual_bundle: no stored trajectory qualifies", st.s, out.times[k], st.x);
            out.value(j, k) = v;
        }
        for (std::size_t k = 0; k < k0; ++k) out.value(j, k) = out.value(j, k0);
    }
    return out;
}

TrajectoryBundle mapping_I(const TrajectoryBundle& bundle, std::span<const Start> dual_starts) {
    const std::size_t K = bundle.num_times();
    TrajectoryBundle out;
    out.times = bundle.times;
    out.reversed = !bundle.reversed;
    out.shared_seed = bundle.shared_seed;
    out.starts.assign(dual_starts.begin(), dual_starts.end());
    out.values.assign(out.starts.size() * K, 0.0);
    for (std::size_t j = 0; j < out.starts.size(); ++j) {
        const Start st = out.starts[j];
        const std::size_t k0 = bundle.time_index(st.s);
        for (std::size_t k = k0; k < K; ++k) {
            const double v = constrained_inf(bundle, k, K - 1, [&](double y) { return y >= st.x; });
            if (v == kInf) throw CoverageError("mapping_I: no stored trajectory qualifies", st.s, bundle.times[k], st.x);
            out.value(j, k) = v;
        }
        for (std::size_t k = 0; k < k0; ++k) out.value(j, k) = out.value(j, k0);
    }
    return out;
}

TrajectoryBundle mapping_I(const TrajectoryBundle& bundle) { return mapping_I(bundle, bundle.starts); }

std::vector<WedgeViolation> wedge_check(const TrajectoryBundle& forward, const TrajectoryBundle& dual) {
    const std::size_t K = forward.num_times();
    if (dual.num_times() != K) throw std::invalid_argument("wedge_check: grids differ");
    const double H = forward.horizon();
    const double tol = grid_tol(forward);
    std::vector<std::size_t> mirror(K);
    for (std::size_t k = 0; k < K; ++k) mirror[k] = dual.time_index(H - forward.times[k]);

    std::vector<WedgeViolation> out;
    for (std::size_t i = 0; i < forward.num_paths(); ++i) {
        for (std::size_t j = 0; j < dual.num_paths(); ++j) {
            const double last_forward_time = H - dual.starts[j].s + tol;
            for (std::size_t k = 0; k + 1 < K; ++k) {
                if (forward.times[k] < forward.starts[i].s - tol) continue;
                if (forward.times[k + 1] > last_forward_time) break;
                const double d0 = forward.value(i, k) - dual.value(j, mirror[k]);
                const double d1 = forward.value(i, k + 1) - dual.value(j, mirror[k + 1]);
                if (d0 * d1 < 0.0) out.push_back({i, j, forward.times[k], std::min(std::abs(d0), std::abs(d1))});
            }
        }
    }
    return out;
}

TrajectoryBundle deterministic_bundle(std::span<const Start> starts, std::span<const double> times,
                                      const std::function<double(double, double, double)>& flow) {
    TrajectoryBundle b;
    b.starts.assign(starts.begin(), starts.end());
    b.times.assign(times.begin(), times.end());
    const std::size_t K = b.times.size();
    b.values.assign(b.starts.size() * K, 0.0);
    for (std::size_t j = 0; j < b.starts.size(); ++j) {
        const Start st = b.starts[j];
        for (std::size_t k = 0; k < K; ++k)
            b.value(j, k) = flow(st.s, std::max(st.s, b.times[k]), st.x);
    }
    return b;
}

}  // namespace harris
