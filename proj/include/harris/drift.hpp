/// @file drift.hpp
/// @brief Drift functions, their deterministic flows and a noise-regularized step.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "harris/random.hpp"

namespace harris {

enum class DriftKind { zero, affine, lipschitz_custom, beta_modulus, one_sided_lipschitz };

/// Drift a together with the constants of its class.
///
/// lipschitz_custom understands the tags "sin" and "tanh"; one_sided_lipschitz understands
/// "neg_sqrt" (a(x) = -sign(x) sqrt|x|) and "neg_sign" (a(x) = -sign(x)).
/// beta_modulus is a(x) = -C_rho sign(x) |x|^beta, or -C_rho sign(x) when beta <= 0.
struct DriftSpec {
    DriftKind kind = DriftKind::zero;
    double c0 = 0.0;
    double c1 = 0.0;
    std::string tag;
    double C_a = 0.0;
    double beta = 1.0;
    double C_rho = 1.0;
    double C_tilde_rho = 1.0;
    double C_one_sided = 0.0;
    double growth = 1.0;

    static DriftSpec zero();
    static DriftSpec affine(double c0, double c1);
    static DriftSpec lipschitz(const std::string& tag);
    static DriftSpec modulus(double beta, double C_rho, double C_tilde_rho = 1.0);
    static DriftSpec one_sided(const std::string& tag);

    /// True when the block map should be the regularized SDE step rather than the ODE flow.
    bool needs_regularization() const {
        return kind == DriftKind::one_sided_lipschitz || kind == DriftKind::beta_modulus;
    }
};

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& name);

void validate(const DriftSpec& spec);

/// a(x).
double eval_drift(const DriftSpec& spec, double x);

/// F_dt(x) for dF/dt = a(F), F_0 = x.
///
/// Closed form for zero and affine drift. Otherwise classical RK4 starting from substeps no
/// longer than 1/(2 C_a), halving until two successive answers differ by less than
/// tol * max(1, |x|). Throws ToleranceError beyond 2^20 substeps.
double ode_flow(const DriftSpec& spec, double x, double dt, double tol = 1e-12);

/// One Euler-Maruyama step of dF = a(F) dt + epsilon dw split into `normals.size()` substeps.
/// The normals are supplied so that several particles can share one scalar noise w.
double regularized_flow_step(const DriftSpec& spec, double x, double dt, double epsilon,
                             std::span<const double> normals);

/// Same step drawing its own `substeps` normals from `rng`.
double regularized_flow_step(const DriftSpec& spec, double x, double dt, double epsilon, RandomStream& rng,
                             int substeps = 16);

struct DriftViolation {
    std::string property;
    double x;
    double y;
};

/// Samples pairs on [-radius, radius] and reports breaches of the class inequalities.
std::vector<DriftViolation> verify_drift(const DriftSpec& spec, double radius, int n);

}  // namespace harris
