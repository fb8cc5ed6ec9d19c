/// @file dual.hpp
/// @brief Dual (time-reversed) flows computed from stored forward trajectory bundles.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "harris/bundle.hpp"

namespace harris {

/// inf{ psi_i(H - t) : s_i <= H - t, psi_i(H - s) > x } over the stored trajectories, where H is
/// the bundle horizon. Throws CoverageError when no trajectory qualifies.
double dual_value(const TrajectoryBundle& bundle, double s, double t, double x);

/// As dual_value() but returns +infinity instead of throwing.
double dual_value_or_inf(const TrajectoryBundle& bundle, double s, double t, double x);

/// Dual trajectories for the given starts on the reversed clock H - times.
///
/// The result shares the grid of `bundle` read backwards, carries `reversed = !bundle.reversed`
/// and is constant before each start time. Throws CoverageError if any value has an empty
/// qualifying set.
TrajectoryBundle dual_bundle(const TrajectoryBundle& bundle, std::span<const Start> dual_starts);

/// The mapping Q_j I(psi)_r = inf{ psi_i(r) : psi_i(H) >= x_j, s_i <= r } for r >= s_j, constant on
/// [0, s_j). The first form uses the bundle's own starts as (s_j, x_j).
TrajectoryBundle mapping_I(const TrajectoryBundle& bundle);
TrajectoryBundle mapping_I(const TrajectoryBundle& bundle, std::span<const Start> dual_starts);

struct WedgeViolation {
    std::size_t forward = 0;
    std::size_t dual = 0;
    /// Forward-clock time at the left end of the offending grid interval.
    double time = 0.0;
    double magnitude = 0.0;
};

/// Strict sign changes of forward - dual between adjacent grid times where both are defined.
/// The dual is evaluated at the mirrored time H - t. magnitude = min(|d_k|, |d_{k+1}|).
std::vector<WedgeViolation> wedge_check(const TrajectoryBundle& forward, const TrajectoryBundle& dual);

/// Bundle of a deterministic two-parameter flow X_{s,t}(x) = flow(s, t, x) for t >= s,
/// constant left extension before s.
TrajectoryBundle deterministic_bundle(std::span<const Start> starts, std::span<const double> times,
                                      const std::function<double(double, double, double)>& flow);

}  // namespace harris
