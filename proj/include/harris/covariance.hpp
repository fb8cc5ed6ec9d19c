/// @file covariance.hpp
/// @brief Infinitesimal covariance functions, their class checks and Gram matrices.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "harris/matrix.hpp"

namespace harris {

enum class CovarianceKind { exponential_alpha, gaussian, indicator, cosine_series, custom_tabulated };

/// Description of phi together with the constants of the class it is claimed to belong to.
struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::gaussian;
    /// Exponent of exp(-|x|^alpha); used only by exponential_alpha.
    double alpha = 2.0;
    /// Claimed class exponent: 1 - phi(x) >= C_phi |x|^alpha_class on [-C_tilde_phi, C_tilde_phi].
    std::optional<double> alpha_class;
    double C_phi = 1.0;
    double C_tilde_phi = 1.0;
    double lipschitz_radius = 0.1;
    /// cosine_series weights and truncation.
    double C1 = 0.5;
    double C2 = 0.5;
    int n_terms = 200;
    /// custom_tabulated knots (nondecreasing, x >= 0) and values; phi is interpolated linearly in |x|.
    std::vector<double> grid;
    std::vector<double> values;

    static CovarianceSpec exponential(double alpha);
    static CovarianceSpec gaussian();
    static CovarianceSpec indicator();
    static CovarianceSpec cosine(double C1, double C2, int n_terms = 200);
    static CovarianceSpec tabulated(std::vector<double> grid, std::vector<double> values,
                                    std::optional<double> alpha_class, double C_phi, double C_tilde_phi);
};

std::string to_string(CovarianceKind kind);
CovarianceKind covariance_kind_from_string(const std::string& name);

/// Throws std::invalid_argument when the parameters are malformed.
void validate(const CovarianceSpec& spec);

/// phi(x). Exactly 1 at x = 0 and exactly symmetric.
double eval_phi(const CovarianceSpec& spec, double x);

/// Matrix of phi(positions_i - positions_j).
Matrix gram_matrix(const CovarianceSpec& spec, std::span<const double> positions);

/// Row-major Gram written into `out` (resized to n*n).
void gram_into(const CovarianceSpec& spec, std::span<const double> positions, std::vector<double>& out);

/// Upper bound on the cosine-series truncation error: sum over n > N of 1/n^2 is at most 1/N.
double cosine_truncation_bound(int n_terms);

/// Hoelder exponent of sqrt(1 - phi) assumed for rate predictions: alpha_class / 2.
double holder_beta_heuristic(const CovarianceSpec& spec);

struct ClassViolation {
    enum class Type { symmetry, bound, lower_bound, lipschitz } type;
    double x;
    double detail;
};

struct ClassReport {
    std::vector<ClassViolation> violations;
    std::size_t points_checked = 0;
    bool ok() const { return violations.empty(); }
};

/// Scans the grid {k * grid_step : |k * grid_step| <= radius} for symmetry, |phi| <= 1,
/// the class lower bound on [-C_tilde_phi, C_tilde_phi], and slope blow-up under refinement
/// outside lipschitz_radius.
ClassReport verify_class(const CovarianceSpec& spec, double grid_step, double radius);

/// The same checks restricted to an explicit set of points (lower bound and symmetry only).
ClassReport verify_class_at(const CovarianceSpec& spec, std::span<const double> points);

}  // namespace harris
