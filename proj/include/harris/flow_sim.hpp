/// @file flow_sim.hpp
/// @brief Euler simulation of finite-dimensional motions of Harris flows with sticky coalescence.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "harris/covariance.hpp"
#include "harris/drift.hpp"
#include "harris/random.hpp"
#include "harris/stats.hpp"

namespace harris {

/// Live clusters at one instant. reps is strictly increasing; membership maps an initial label
/// to the index of the cluster carrying it.
struct ClusterState {
    std::vector<double> reps;
    std::vector<std::size_t> membership;
    double time = 0.0;

    std::size_t num_clusters() const noexcept { return reps.size(); }
    std::size_t num_labels() const noexcept { return membership.size(); }

    /// Smallest label of each cluster.
    std::vector<std::size_t> lead_labels() const;
    /// Labels of each cluster in increasing order.
    std::vector<std::vector<std::size_t>> cluster_labels() const;
    /// Position of every label.
    std::vector<double> label_values() const;
};

/// Sorts the starts and merges exact duplicates. Throws std::invalid_argument on empty or
/// non-finite input.
ClusterState init_state(std::span<const double> x0s);

struct SimConfig {
    double dt_fine = 1e-3;
    double tol_merge = 1e-10;
    double jitter = 0.0;
    std::size_t record_stride = 1;
    /// Keep per-step increments and pre-step positions for covariation diagnostics.
    bool log_increments = false;
    /// Merge adjacent clusters whose Brownian-bridge interpolation between grid points meets.
    bool bridge_crossing = true;
    /// Replace the driftless block by the identity (deterministic dry run).
    bool zero_noise = false;
};

struct MergeEvent {
    double time = 0.0;
    std::vector<std::size_t> labels;
};

/// Per-step driftless increments by label, with the label positions the step started from.
struct IncrementLog {
    std::size_t num_labels = 0;
    std::vector<double> step_h;
    std::vector<double> increments;
    std::vector<double> positions;
};

struct PathRecord {
    std::vector<double> times;
    std::size_t num_labels = 0;
    /// Row-major (time x label).
    std::vector<double> values;
    std::vector<MergeEvent> merge_events;
    std::optional<IncrementLog> increments;

    std::size_t num_rows() const noexcept { return times.size(); }
    double value(std::size_t row, std::size_t label) const { return values[row * num_labels + label]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values).subspan(r * num_labels, num_labels);
    }
};

/// Merges adjacent clusters whose order inverted or whose gap is at most tol_merge, replacing
/// the pair by the mean of the two reps, until the reps are strictly sorted with larger gaps.
ClusterState coalesce(const ClusterState& state, double tol_merge);

/// In-place form. `marks[i]` (optional) forces the pair (i, i+1) to merge. Merge events are
/// appended to `events` when it is non-null.
void coalesce_in_place(ClusterState& state, double tol_merge, const std::vector<char>* marks = nullptr,
                       std::vector<MergeEvent>* events = nullptr);

/// Draws increments of the driving field at a sorted set of points: sqrt(h) L g with
/// L the guarded Cholesky factor of the Gram matrix and g iid standard normals.
class NoiseSampler {
public:
    NoiseSampler(const CovarianceSpec& phi, double jitter) : phi_(phi), jitter_(jitter) {}

    void sample(std::span<const double> points, double h, RandomStream& rng, std::vector<double>& out);

    /// Same as sample() with caller-provided normals (one per point).
    void transform(std::span<const double> points, double h, std::span<const double> normals,
                   std::vector<double>& out);

    double last_jitter() const noexcept { return last_jitter_; }
    const CovarianceSpec& phi() const noexcept { return phi_; }

private:
    CovarianceSpec phi_;
    double jitter_;
    double last_jitter_ = 0.0;
    std::vector<double> gram_;
    std::vector<double> factor_;
    std::vector<double> normals_;
};

/// Key of the keyed uniforms used by the bridge crossing test.
struct CrossingKey {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

/// Adds per-cluster increments, applies the crossing test and coalesces.
class ClusterUpdater {
public:
    ClusterUpdater(const CovarianceSpec& phi, const SimConfig& cfg) : phi_(phi), cfg_(cfg) {}

    void apply(ClusterState& state, std::span<const double> increments, double h, CrossingKey key,
               std::uint64_t step, std::vector<MergeEvent>* events);

private:
    CovarianceSpec phi_;
    SimConfig cfg_;
    std::vector<double> pre_;
    std::vector<char> marks_;
};

/// One driftless step of length h for all clusters, followed by coalescence.
ClusterState driftless_substep(const ClusterState& state, double h, const CovarianceSpec& phi,
                               const SimConfig& cfg, RandomStream& rng);

/// Euler simulation: per fine step the drift a(rep) h is added, then a driftless step follows.
PathRecord simulate(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s, double T,
                    const SimConfig& cfg, RandomStream& rng);

/// Final cluster state of the same Euler dynamics as simulate(), without recording. With
/// stop_when_single the run ends early once one cluster remains; the state time then tells when.
ClusterState evolve(const CovarianceSpec& phi, const DriftSpec& a, std::span<const double> x0s, double T,
                    const SimConfig& cfg, RandomStream& rng, bool stop_when_single = false);

/// Number of fine steps covering T; throws when dt does not divide T.
std::size_t fine_steps(double T, double dt);

/// Largest |sum dW_i dW_j - sum phi(X_i - X_j) h| over label pairs (i <= j).
double empirical_quadratic_covariation(const PathRecord& record, const CovarianceSpec& phi);

/// Smooth test function on R^m with first and second derivatives.
struct TestFunction {
    std::function<double(std::span<const double>)> value;
    /// Writes grad f into the second argument (size m).
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    /// Writes the Hessian, row-major m x m, into the second argument.
    std::function<void(std::span<const double>, std::span<double>)> hessian;
};

/// Monte Carlo mean of f(xi_t) - f(xi_s) - int_s^t A f(xi_r) dr over an ensemble, where
/// A = 1/2 sum phi(x_k - x_j) d^2/dx_k dx_j + sum a(x_k) d/dx_k. The time integral is a
/// left Riemann sum over recorded rows.
Estimate martingale_residual(std::span<const PathRecord> ensemble, const TestFunction& f,
                             const CovarianceSpec& phi, const DriftSpec& a, double s, double t);

}  // namespace harris
