/// @file measures.hpp
/// @brief Atomic measures on the line: pushforwards of Lebesgue measure on [0,1], quantile
/// functions, Wasserstein distances and vague discrepancies.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "harris/stats.hpp"

namespace harris {

/// Right-continuous quantile function of a probability measure with finitely many atoms.
///
/// values[i] is the quantile on [breakpoints[i], breakpoints[i+1]). breakpoints runs from 0 to 1,
/// values is strictly increasing (equal neighbours are merged into one atom).
struct QuantileMeasure {
    std::vector<double> breakpoints;
    std::vector<double> values;

    std::size_t num_atoms() const noexcept { return values.size(); }
    double mass(std::size_t i) const { return breakpoints[i + 1] - breakpoints[i]; }
    /// F^{-1}(u) for u in [0,1); u = 1 returns the largest atom.
    double quantile(double u) const;
};

/// Finite measure given by atoms at strictly increasing positions with positive masses.
struct AtomicMeasure {
    std::vector<double> positions;
    std::vector<double> masses;

    double total_mass() const;
};

/// Step CDF: F(x) = cdf[i] for positions[i] <= x < positions[i+1], 0 left of positions[0].
struct CdfStep {
    std::vector<double> positions;
    std::vector<double> cdf;

    double operator()(double x) const;
};

/// Pushforward of Leb[0,1] under a monotone map known at the grid starts.
///
/// Each start owns the part of [0,1] closer to it than to any other start; the cell's mass goes
/// to the start's end position. Throws std::invalid_argument when the starts are not strictly
/// increasing inside [0,1], the lengths differ, or the ends decrease.
QuantileMeasure pushforward(std::span<const double> grid_starts, std::span<const double> end_positions);

/// Weighted pushforward of atoms (weights need not sum to one) under a monotone map.
AtomicMeasure pushforward_atoms(std::span<const double> weights, std::span<const double> end_positions);

AtomicMeasure to_atomic(const QuantileMeasure& qm);

/// Builds the quantile function of a probability measure; throws unless the masses sum to one
/// within 1e-12.
QuantileMeasure to_quantile(const AtomicMeasure& am);

/// The CDF whose generalized inverse is `qm`.
CdfStep generalized_inverse(const QuantileMeasure& qm);

/// The quantile function of a step CDF ending at 1.
QuantileMeasure quantile_of(const CdfStep& cdf);

/// W_p(mu, nu) = (int_0^1 |F^{-1} - G^{-1}|^p du)^{1/p} by a sweep over merged breakpoints.
double wasserstein_p(const QuantileMeasure& mu, const QuantileMeasure& nu, double p);

/// Replicate mean of W_p over coupled pairs, and of W_p^p.
struct W1pEstimate {
    Estimate distance;
    Estimate powered;
};

/// Throws std::invalid_argument when the two ensembles differ in size or are empty.
W1pEstimate estimate_W1p(std::span<const QuantileMeasure> first, std::span<const QuantileMeasure> second, double p);

/// max_i |int f_i d(nu_n) - int f_i d(nu)| over n_test unit-height triangles with peaks
/// -M + i 2M/(n_test+1) and half-width 2M/(n_test+1).
double vague_discrepancy(const AtomicMeasure& nu_n, const AtomicMeasure& nu, double M, int n_test);

}  // namespace harris
