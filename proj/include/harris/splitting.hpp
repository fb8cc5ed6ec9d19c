/// @file splitting.hpp
/// @brief Splitting of a Harris flow into drift blocks and driftless blocks, and its coupling
/// to the Euler reference on common noise.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "harris/bundle.hpp"
#include "harris/covariance.hpp"
#include "harris/drift.hpp"
#include "harris/flow_sim.hpp"
#include "harris/random.hpp"
#include "harris/stats.hpp"

namespace harris {

enum class PartitionKind { uniform, geometric, explicit_knots };

struct Partition {
    std::vector<double> knots;
    double delta_n = 0.0;
    PartitionKind kind = PartitionKind::uniform;

    double horizon() const noexcept { return knots.back(); }
    std::size_t blocks() const noexcept { return knots.size() - 1; }
};

/// Uniform blocks T / N.
Partition make_uniform_partition(double T, std::size_t N);
/// N blocks whose lengths grow by `ratio` from one block to the next.
Partition make_geometric_partition(double T, std::size_t N, double ratio);
/// Explicit knots 0 = t_0 < ... < t_N; throws std::invalid_argument unless strictly increasing from 0.
Partition make_explicit_partition(std::vector<double> knots);

struct Locator {
    double d = 0.0;
    double d_bar = 0.0;
    std::size_t k = 0;
};

/// d = max{t_k <= t}, d_bar = min{t_k > t}; at t = T the last block (t_{N-1}, T, N-1).
Locator locate(const Partition& p, double t);

struct SplitOptions {
    /// Noise level of the regularized block map; defaults to sqrt(delta_n).
    std::optional<double> epsilon;
    int regularizer_substeps = 16;
    double ode_tol = 1e-12;
};

/// Split trajectories on the fine grid.
///
/// u is right-continuous: at a knot t_k it equals y_{t_k-}. y jumps at each knot to
/// u_{t_{k+1}-}. r = u_{d_bar-} - u and l = y - u_{d_bar-}, so y - u = l + r.
/// u_left holds u_{t_k-} for k = 1..N-1 (one row per interior knot).
struct SplitPaths {
    std::vector<double> times;
    std::size_t num_labels = 0;
    std::vector<double> u_values;
    std::vector<double> y_values;
    std::vector<double> r_values;
    std::vector<double> l_values;
    std::vector<double> r_sup;
    std::vector<double> l_sup;
    std::vector<double> knot_times;
    std::vector<double> u_left;
    Partition partition;
    std::vector<MergeEvent> merge_events;
    std::optional<IncrementLog> increments;

    std::size_t num_rows() const noexcept { return times.size(); }
    double u(std::size_t row, std::size_t label) const { return u_values[row * num_labels + label]; }
    double y(std::size_t row, std::size_t label) const { return y_values[row * num_labels + label]; }
    double r(std::size_t row, std::size_t label) const { return r_values[row * num_labels + label]; }
    double l(std::size_t row, std::size_t label) const { return l_values[row * num_labels + label]; }
};

/// Runs the splitting scheme on its own. Drifts needing regularization use the
/// Euler-Maruyama block map with one scalar noise shared by all particles.
SplitPaths split_simulate(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s,
                          const Partition& p, const SimConfig& cfg, RandomStream& rng,
                          const SplitOptions& opts = {});

enum class CouplingMode {
    /// Both processes read the increments of one driving field sampled at the union of their positions.
    shared_field,
    /// Each process factors its own Gram matrix and a cluster reads the normal of its smallest label.
    label_level,
};


/// Per-label sup over [0,T] of (y - X)^2 and (u - X)^2, including the left limits at knots.
struct StrongErrors {
    std::vector<double> sup_y;
    std::vector<double> sup_u;
};

/// The errors are accumulated at every fine step, independently of the record stride.
struct CoupledPaths {
    PathRecord reference;
    SplitPaths split;
    StrongErrors errors;
};

/// Reference Euler flow and splitting scheme on identical driftless noise.
CoupledPaths coupled_pair(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s,
                          const Partition& p, const SimConfig& cfg, std::uint64_t seed,
                          std::uint32_t replicate = 0, CouplingMode mode = CouplingMode::shared_field,
                          const SplitOptions& opts = {});

/// Recomputes the errors from the recorded rows only (equal to pair.errors at record_stride 1).
StrongErrors strong_errors(const CoupledPaths& pair);

struct DecompositionSummary {
    std::vector<double> r_sup;
    std::vector<double> l_sup;
    /// Largest |y - u - l - r| over rows and labels.
    double identity_residual = 0.0;
};

/// Suprema of |r| and |l| per label and the residual of y - u = l + r.
DecompositionSummary decomposition_diagnostics(const SplitPaths& sp);

struct DecompositionMoments {
    Estimate sup_r_sq;
    Estimate sup_l_sq;
};

/// E sup r^2 and E sup l^2 of one label over an ensemble.
DecompositionMoments decomposition_moments(std::span<const SplitPaths> ensemble, std::size_t label = 0);

/// Two-parameter scheme: each start (s_j, x_j) launches a trajectory that follows the
/// drift block from s_j to the next knot and then the single shared driftless flow.
/// Start times are snapped to the fine grid. Drifts needing regularization are rejected.
TrajectoryBundle split_two_param(const CovarianceSpec& phi, const DriftSpec& a, std::span<const Start> starts,
                                 const Partition& p, const SimConfig& cfg, RandomStream& rng,
                                 const SplitOptions& opts = {});

/// The stream that shares seed and replicate with `s` but has a different purpose.
RandomStream sibling_stream(const RandomStream& s, Purpose purpose);

}  // namespace harris
