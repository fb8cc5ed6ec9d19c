/// @file experiments.hpp
/// @brief Monte Carlo studies behind the command-line tool. Every study is a pure function of its
/// configuration: replicate r always reads the same random streams, whatever the thread count.
#pragma once

#include <vector>

#include "harris/config.hpp"
#include "harris/dual.hpp"
#include "harris/report.hpp"

namespace harris {

/// Per N: E sup (y - X)^2, E sup (u - X)^2 and the moments of sup |l|, sup |r|, with log-log slopes.
/// Rows run from the coarsest partition to the finest.
ConvergenceReport run_strong_rate(const ExperimentConfig& cfg);

/// Zero drift. Per n in cfg.partitions: E sup (X - u)^2, its ratio to 4 log(n) / n and the
/// iid chi-square maximum oracle (2/n) E max chi2.
ConvergenceReport run_sharpness(const ExperimentConfig& cfg);

/// Starts on the grid (i + 1/2) / grid_points. Per N: sup over check times of E W_2^2 and E W_2
/// between the reference and split pushforwards.
ConvergenceReport run_wasserstein_rate(const ExperimentConfig& cfg);

/// Per N: median over trials of the KS statistic between split y_T and independent reference X_T
/// samples of label 0 (and of the gap of labels 0 and 1 when present), plus a null calibration
/// of the reference against itself.
ConvergenceReport run_weak_convergence(const ExperimentConfig& cfg);

/// Non-coalescence frequency per gap at time T, with a weighted linear fit through the gaps.
ConvergenceReport run_coalesce_prob(const ExperimentConfig& cfg);

/// Mean cluster count at time T per n_grid on [interval_lo, interval_hi].
ConvergenceReport run_cluster_count(const ExperimentConfig& cfg);

struct DualRun {
    TrajectoryBundle forward;
    TrajectoryBundle dual;
    std::vector<WedgeViolation> violations;
    ConvergenceReport report;
};

/// Two-parameter split bundle on a dyadic start grid, its dual, and the wedge check between them.
DualRun run_dual(const ExperimentConfig& cfg);

}  // namespace harris
