#include "harris/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace harris {

namespace {

double cosine_norm(int n_terms) {
    double s = 0.0;
    for (int n = n_terms; n >= 1; --n) s += 1.0 / (static_cast<double>(n) * n);
    return s;
}

double eval_abs(const CovarianceSpec& spec, double ax) {
    switch (spec.kind) {
        case CovarianceKind::exponential_alpha:
            return std::exp(-std::pow(ax, spec.alpha));
        case CovarianceKind::gaussian:
            return std::exp(-ax * ax);
        case CovarianceKind::indicator:
            return ax == 0.0 ? 1.0 : 0.0;
        case CovarianceKind::cosine_series: {
            double s = 0.0;
            for (int n = spec.n_terms; n >= 1; --n) {
                const double dn = n;
                s += std::cos(std::exp(dn / 2.0) * std::pow(dn, 1.5) * ax) / (dn * dn);
            }
            return spec.C1 * std::exp(-ax * ax / 2.0) + spec.C2 * s / cosine_norm(spec.n_terms);
        }
        case CovarianceKind::custom_tabulated: {
            const auto& g = spec.grid;
            const auto& v = spec.values;
            if (ax >= g.back()) return v.back();
            const auto it = std::upper_bound(g.begin(), g.end(), ax);
            const std::size_t j = static_cast<std::size_t>(it - g.begin());
            const double w = (ax - g[j - 1]) / (g[j] - g[j - 1]);
            return v[j - 1] + w * (v[j] - v[j - 1]);
        }
    }
    return 0.0;
}

}  // namespace

CovarianceSpec CovarianceSpec::exponential(double alpha) {
    CovarianceSpec s;
    s.kind = CovarianceKind::exponential_alpha;
    s.alpha = alpha;
    s.alpha_class = alpha;
    // (1 - e^{-u})/u is decreasing, so on |x| <= 1 the bound holds with its value at u = 1.
    s.C_phi = 1.0 - std::exp(-1.0);
    s.C_tilde_phi = 1.0;
    return s;
}

CovarianceSpec CovarianceSpec::gaussian() {
    CovarianceSpec s;
    s.kind = CovarianceKind::gaussian;
    s.alpha = 2.0;
    s.alpha_class = 2.0;
    s.C_phi = 1.0 - std::exp(-1.0);
    s.C_tilde_phi = 1.0;
    return s;
}

CovarianceSpec CovarianceSpec::indicator() {
    CovarianceSpec s;
    s.kind = CovarianceKind::indicator;
    s.alpha_class.reset();
    s.C_phi = 1.0;
    s.C_tilde_phi = 1.0;
    return s;
}

CovarianceSpec CovarianceSpec::cosine(double C1, double C2, int n_terms) {
    CovarianceSpec s;
    s.kind = CovarianceKind::cosine_series;
    s.C1 = C1;
    s.C2 = C2;
    s.n_terms = n_terms;
    s.alpha_class = 1.5;
    s.C_phi = C2 / (3.0 * std::exp(4.0) * cosine_norm(n_terms));
    s.C_tilde_phi = 1.0;
    return s;
}

CovarianceSpec CovarianceSpec::tabulated(std::vector<double> grid, std::vector<double> values,
                                         std::optional<double> alpha_class, double C_phi,
                                         double C_tilde_phi) {
    CovarianceSpec s;
    s.kind = CovarianceKind::custom_tabulated;
    s.grid = std::move(grid);
    s.values = std::move(values);
    s.alpha_class = alpha_class;
    s.C_phi = C_phi;
    s.C_tilde_phi = C_tilde_phi;
    validate(s);
    return s;
}

std::string to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::exponential_alpha: return "exponential_alpha";
        case CovarianceKind::gaussian: return "gaussian";
        case CovarianceKind::indicator: return "indicator";
        case CovarianceKind::cosine_series: return "cosine_series";
        case CovarianceKind::custom_tabulated: return "custom_tabulated";
    }
    return "unknown";
}

CovarianceKind covariance_kind_from_string(const std::string& name) {
    if (name == "exponential_alpha" || name == "exponential" || name == "exp") return CovarianceKind::exponential_alpha;
    if (name == "gaussian") return CovarianceKind::gaussian;
    if (name == "indicator" || name == "brownian_web") return CovarianceKind::indicator;
    if (name == "cosine_series" || name == "cosine") return CovarianceKind::cosine_series;
    if (name == "custom_tabulated" || name == "tabulated") return CovarianceKind::custom_tabulated;
    throw std::invalid_argument("unknown covariance kind '" + name + "'");
}

void validate(const CovarianceSpec& spec) {
    if (!(spec.C_phi > 0.0) || !(spec.C_tilde_phi > 0.0) || !(spec.lipschitz_radius > 0.0))
        throw std::invalid_argument("covariance constants C_phi, C_tilde_phi, lipschitz_radius must be positive");
    if (spec.alpha_class && !(*spec.alpha_class > 0.0 && *spec.alpha_class <= 2.0))
        throw std::invalid_argument("alpha_class must lie in (0, 2]");
    switch (spec.kind) {
        case CovarianceKind::exponential_alpha:
            if (!(spec.alpha > 0.0 && spec.alpha <= 2.0))
                throw std::invalid_argument("exponential_alpha requires alpha in (0, 2]");
            break;
        case CovarianceKind::cosine_series:
            if (spec.n_terms < 1) throw std::invalid_argument("cosine_series requires n_terms >= 1");
            if (!(spec.C1 > 0.0) || !(spec.C2 > 0.0) || std::abs(spec.C1 + spec.C2 - 1.0) > 1e-12)
                throw std::invalid_argument("cosine_series requires positive C1, C2 with C1 + C2 = 1");
            break;
        case CovarianceKind::custom_tabulated: {
            const auto& g = spec.grid;
            if (g.size() < 2 || g.size() != spec.values.size())
                throw std::invalid_argument("custom_tabulated needs at least two (grid, value) pairs");
            if (g.front() != 0.0 || spec.values.front() != 1.0)
                throw std::invalid_argument("custom_tabulated must start at (0, 1)");
            for (std::size_t i = 1; i < g.size(); ++i)
                if (!(g[i] > g[i - 1])) throw std::invalid_argument("custom_tabulated grid must be increasing");
            for (double v : spec.values)
                if (!(std::abs(v) <= 1.0)) throw std::invalid_argument("custom_tabulated values must lie in [-1, 1]");
            break;
        }
        default:
            break;
    }
}

double eval_phi(const CovarianceSpec& spec, double x) {
    if (!std::isfinite(x)) throw std::domain_error("eval_phi: non-finite argument");
    if (x == 0.0) return 1.0;
    return eval_abs(spec, std::abs(x));
}

void gram_into(const CovarianceSpec& spec, std::span<const double> positions, std::vector<double>& out) {
    const std::size_t m = positions.size();
    out.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i * m + i] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double v = eval_phi(spec, positions[i] - positions[j]);
            out[i * m + j] = v;
            out[j * m + i] = v;
        }
    }
}

Matrix gram_matrix(const CovarianceSpec& spec, std::span<const double> positions) {
    for (double p : positions)
        if (!std::isfinite(p)) throw std::domain_error("gram_matrix: non-finite position");
    std::vector<double> flat;
    gram_into(spec, positions, flat);
    Matrix g(positions.size());
    std::copy(flat.begin(), flat.end(), g.data());
    return g;
}

double cosine_truncation_bound(int n_terms) { return 1.0 / static_cast<double>(n_terms); }

double holder_beta_heuristic(const CovarianceSpec& spec) {
    if (!spec.alpha_class) return 0.5;
    return *spec.alpha_class / 2.0;
}

namespace {

void check_point(const CovarianceSpec& spec, double x, ClassReport& report) {
    const double v = eval_phi(spec, x);
    const double vm = eval_phi(spec, -x);
    if (v != vm) report.violations.push_back({ClassViolation::Type::symmetry, x, v - vm});
    if (!(std::abs(v) <= 1.0)) report.violations.push_back({ClassViolation::Type::bound, x, v});
    if (spec.alpha_class && std::abs(x) <= spec.C_tilde_phi) {
        const double need = spec.C_phi * std::pow(std::abs(x), *spec.alpha_class);
        if (1.0 - v < need) report.violations.push_back({ClassViolation::Type::lower_bound, x, (1.0 - v) - need});
    }
    ++report.points_checked;
}

}  // namespace

ClassReport verify_class(const CovarianceSpec& spec, double grid_step, double radius) {
    if (!(grid_step > 0.0) || !(grid_step < radius))
        throw std::invalid_argument("verify_class requires 0 < grid_step < radius");
    validate(spec);
    ClassReport report;
    const long n = static_cast<long>(std::floor(radius / grid_step));
    for (long k = -n; k <= n; ++k) check_point(spec, static_cast<double>(k) * grid_step, report);

    // Slopes of a Lipschitz function do not grow when the difference step shrinks;
    // a sixteen-fold refinement that raises the slope more than fourfold is flagged.
    double coarse_max = 0.0;
    for (long k = -n; k < n; ++k) {
        const double x = static_cast<double>(k) * grid_step;
        if (std::abs(x) < spec.lipschitz_radius || std::abs(x + grid_step) < spec.lipschitz_radius) continue;
        coarse_max = std::max(coarse_max, std::abs(eval_phi(spec, x + grid_step) - eval_phi(spec, x)) / grid_step);
    }
    const double fine = grid_step / 16.0;
    for (long k = -n; k < n; ++k) {
        const double x = static_cast<double>(k) * grid_step;
        if (std::abs(x) < spec.lipschitz_radius || std::abs(x + fine) < spec.lipschitz_radius) continue;
        const double s1 = std::abs(eval_phi(spec, x + grid_step) - eval_phi(spec, x)) / grid_step;
        const double s2 = std::abs(eval_phi(spec, x + fine) - eval_phi(spec, x)) / fine;
        const double ref = std::max(s1, coarse_max);
        if (s2 > 4.0 * ref + 1e-9) report.violations.push_back({ClassViolation::Type::lipschitz, x, s2});
    }
    return report;
}

ClassReport verify_class_at(const CovarianceSpec& spec, std::span<const double> points) {
    validate(spec);
    ClassReport report;
    for (double x : points) check_point(spec, x, report);
    return report;
}

}  // namespace harris
