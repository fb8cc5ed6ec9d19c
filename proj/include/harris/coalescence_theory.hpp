/// @file coalescence_theory.hpp
/// @brief One-dimensional gap diffusion with generator (1 - phi) d^2/dx^2 + rho d/dx: scale function,
/// speed measure, boundary accessibility, squared Bessel survival and Monte Carlo coalescence checks.
#pragma once

#include <cstdint>
#include <functional>

#include "harris/covariance.hpp"
#include "harris/drift.hpp"
#include "harris/flow_sim.hpp"
#include "harris/stats.hpp"

namespace harris {

/// Coefficients of the gap diffusion.
///
/// one_minus_phi(z) behaves like C_phi z^alpha near zero, and rho(z) = C_rho z^beta. The
/// exponents must satisfy beta - alpha > -1 and alpha < 2.
struct DiffusionSpec {
    std::function<double(double)> one_minus_phi;
    double alpha = 1.0;
    double C_phi = 1.0;
    double beta = 1.0;
    double C_rho = 0.0;
    double C_tilde = 1.0;

    /// Uses the class constants of `phi`; C_tilde = min(C_tilde_rho, phi.C_tilde_phi).
    static DiffusionSpec from_covariance(const CovarianceSpec& phi, double beta, double C_rho, double C_tilde_rho);

    /// Exactly solvable coefficients 1 - phi(z) = C z^alpha.
    static DiffusionSpec synthetic(double C, double alpha, double beta, double C_rho, double C_tilde);

    double rho(double z) const;
};

/// Throws std::invalid_argument unless beta - alpha > -1, 0 <= alpha < 2, C_tilde > 0.
void validate(const DiffusionSpec& spec);

/// I(y) = int_0^y rho(z) / (1 - phi(z)) dz.
double drift_integral(const DiffusionSpec& spec, double y, double tol = 1e-12);

/// p(x) = int_0^x exp(-I(y)) dy. Throws ToleranceError when the quadrature cannot reach tol.
double scale_function(const DiffusionSpec& spec, double x, double tol = 1e-10);

/// Density exp(I(y)) / (1 - phi(y)) of the speed measure; y > 0.
double speed_density(const DiffusionSpec& spec, double y, double tol = 1e-12);

/// v(x) = int_{C_tilde}^x (p(x) - p(y)) m(dy), nonnegative for every x > 0.
double accessibility_v(const DiffusionSpec& spec, double x, double tol = 1e-10);

struct LimitEstimate {
    double value = 0.0;
    /// Last raw v(eps) evaluated.
    double last = 0.0;
    bool converged = false;
};

/// lim_{eps -> 0+} v(eps) from v(2^{-k}), k = k_min..k_max, with Aitken extrapolation.
LimitEstimate accessibility_limit(const DiffusionSpec& spec, int k_min = 4, int k_max = 24, double tol = 1e-8);

struct ScaleLimit {
    double value = 0.0;
    bool finite = false;
};

/// p(infinity) by doubling the upper limit; `finite` is false when the increments stop shrinking.
ScaleLimit scale_at_infinity(const DiffusionSpec& spec, double tol = 1e-9);

/// delta = 2 (1 - alpha) / (2 - alpha) for alpha in (0, 2).
double bessel_dimension(double alpha);

/// Regularized lower incomplete gamma P(a, x): series below x = a + 1, continued fraction above.
double regularized_gamma_p(double a, double x);

/// P(squared Bessel process of dimension delta(alpha) started at x0 has not hit 0 by t)
/// = P(1 / (2 - alpha), x0 / (2 t)).
double squared_bessel_survival(double x0, double t, double alpha);

/// Upper bound on the probability that the gap diffusion started at x is still positive at t:
/// S((2 / (2 - alpha))^2 p(x)^{2 - alpha}, gamma t, alpha) + p(x) / p(C_tilde),
/// with gamma = C_phi exp(-I(C_tilde)).
double pipeline_survival_bound(const DiffusionSpec& spec, double x, double t);

/// Frequency with which Euler paths of d xi = sqrt(2 (1 - phi(xi))) dW + rho(xi) dt started at x
/// stay above zero up to t.
Estimate simulate_gap_diffusion(const DiffusionSpec& spec, double x, double t, double dt, std::size_t reps,
                                std::uint64_t seed);

/// Frequency with which two labels started at 0 and gap have not merged by t.
Estimate pair_noncoalescence_mc(const CovarianceSpec& phi, const DriftSpec& a, double gap, double t,
                                std::size_t reps, const SimConfig& cfg, std::uint64_t seed);

/// Mean number of clusters at t from n_grid equally spaced starts on [l, r].
Estimate cluster_count_mc(const CovarianceSpec& phi, const DriftSpec& a, double l, double r, std::size_t n_grid,
                          double t, std::size_t reps, const SimConfig& cfg, std::uint64_t seed);

}  // namespace harris
