#include "harris/drift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "harris/errors.hpp"

namespace harris {

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

DriftSpec DriftSpec::zero() {
    DriftSpec s;
    s.kind = DriftKind::zero;
    s.growth = 1.0;
    return s;
}

DriftSpec DriftSpec::affine(double c0, double c1) {
    DriftSpec s;
    s.kind = DriftKind::affine;
    s.c0 = c0;
    s.c1 = c1;
    s.C_a = std::abs(c1);
    s.growth = std::max({std::abs(c0), std::abs(c1), 1e-300});
    return s;
}

DriftSpec DriftSpec::lipschitz(const std::string& tag) {
    if (tag != "sin" && tag != "tanh") throw std::invalid_argument("unknown Lipschitz drift tag '" + tag + "'");
    DriftSpec s;
    s.kind = DriftKind::lipschitz_custom;
    s.tag = tag;
    s.C_a = 1.0;
    s.growth = 1.0;
    return s;
}

DriftSpec DriftSpec::modulus(double beta, double C_rho, double C_tilde_rho) {
    DriftSpec s;
    s.kind = DriftKind::beta_modulus;
    s.beta = beta;
    s.C_rho = C_rho;
    s.C_tilde_rho = C_tilde_rho;
    s.C_one_sided = 0.0;
    s.growth = C_rho;
    return s;
}

DriftSpec DriftSpec::one_sided(const std::string& tag) {
    if (tag != "neg_sqrt" && tag != "neg_sign")
        throw std::invalid_argument("unknown one-sided drift tag '" + tag + "'");
    DriftSpec s;
    s.kind = DriftKind::one_sided_lipschitz;
    s.tag = tag;
    s.C_one_sided = 0.0;
    s.growth = 1.0;
    return s;
}

std::string to_string(DriftKind kind) {
    switch (kind) {
        case DriftKind::zero: return "zero";
        case DriftKind::affine: return "affine";
        case DriftKind::lipschitz_custom: return "lipschitz_custom";
        case DriftKind::beta_modulus: return "beta_modulus";
        case DriftKind::one_sided_lipschitz: return "one_sided_lipschitz";
    }
    return "unknown";
}

DriftKind drift_kind_from_string(const std::string& name) {
    if (name == "zero") return DriftKind::zero;
    if (name == "affine") return DriftKind::affine;
    if (name == "lipschitz_custom" || name == "lipschitz") return DriftKind::lipschitz_custom;
    if (name == "beta_modulus") return DriftKind::beta_modulus;
    if (name == "one_sided_lipschitz" || name == "one_sided") return DriftKind::one_sided_lipschitz;
    throw std::invalid_argument("unknown drift kind '" + name + "'");
}

void validate(const DriftSpec& spec) {
    if (!(spec.growth > 0.0)) throw std::invalid_argument("drift growth constant must be positive");
    switch (spec.kind) {
        case DriftKind::lipschitz_custom:
            if (spec.tag != "sin" && spec.tag != "tanh")
                throw std::invalid_argument("unknown Lipschitz drift tag '" + spec.tag + "'");
            if (!(spec.C_a > 0.0)) throw std::invalid_argument("Lipschitz drift needs C_a > 0");
            break;
        case DriftKind::one_sided_lipschitz:
            if (spec.tag != "neg_sqrt" && spec.tag != "neg_sign")
                throw std::invalid_argument("unknown one-sided drift tag '" + spec.tag + "'");
            break;
        case DriftKind::beta_modulus:
            if (!(spec.C_rho > 0.0) || !(spec.C_tilde_rho > 0.0))
                throw std::invalid_argument("beta_modulus drift needs positive C_rho and C_tilde_rho");
            break;
        default:
            break;
    }
}

double eval_drift(const DriftSpec& spec, double x) {
    if (!std::isfinite(x)) throw std::domain_error("eval_drift: non-finite argument");
    switch (spec.kind) {
        case DriftKind::zero: return 0.0;
        case DriftKind::affine: return spec.c0 + spec.c1 * x;
        case DriftKind::lipschitz_custom: return spec.tag == "sin" ? std::sin(x) : std::tanh(x);
        case DriftKind::beta_modulus:
            if (spec.beta <= 0.0) return -spec.C_rho * sgn(x);
            return -spec.C_rho * sgn(x) * std::pow(std::abs(x), spec.beta);
        case DriftKind::one_sided_lipschitz:
            if (spec.tag == "neg_sqrt") return -sgn(x) * std::sqrt(std::abs(x));
            return -sgn(x);
    }
    return 0.0;
}

namespace {

double rk4(const DriftSpec& spec, double x, double dt, long steps) {
    const double h = dt / static_cast<double>(steps);
    for (long i = 0; i < steps; ++i) {
        const double k1 = eval_drift(spec, x);
        const double k2 = eval_drift(spec, x + 0.5 * h * k1);
        const double k3 = eval_drift(spec, x + 0.5 * h * k2);
        const double k4 = eval_drift(spec, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

}  // namespace

double ode_flow(const DriftSpec& spec, double x, double dt, double tol) {
    if (!(dt >= 0.0)) throw std::invalid_argument("ode_flow: dt must be nonnegative");
    if (!std::isfinite(x)) throw std::domain_error("ode_flow: non-finite start");
    if (dt == 0.0) return x;
    switch (spec.kind) {
        case DriftKind::zero:
            return x;
        case DriftKind::affine:
            if (spec.c1 == 0.0) return x + spec.c0 * dt;
            return x + (x + spec.c0 / spec.c1) * std::expm1(spec.c1 * dt);
        default:
            break;
    }
    constexpr long kMaxSteps = 1L << 20;
    long steps = 1;
    if (spec.C_a > 0.0) steps = std::max(1L, static_cast<long>(std::ceil(dt * 2.0 * spec.C_a)));
    double prev = rk4(spec, x, dt, steps);
    const double scale = std::max(1.0, std::abs(x));
    while (steps < kMaxSteps) {
        steps *= 2;
        const double cur = rk4(spec, x, dt, steps);
        if (std::abs(cur - prev) < tol * scale) return cur;
        prev = cur;
    }
    throw ToleranceError("ode_flow: no convergence within 2^20 substeps");
}

double regularized_flow_step(const DriftSpec& spec, double x, double dt, double epsilon,
                             std::span<const double> normals) {
    const std::size_t n = std::max<std::size_t>(1, normals.size());
    const double h = dt / static_cast<double>(n);
    const double sh = epsilon * std::sqrt(h);
    for (std::size_t i = 0; i < n; ++i) {
        x += eval_drift(spec, x) * h;
        if (i < normals.size()) x += sh * normals[i];
    }
    return x;
}

double regularized_flow_step(const DriftSpec& spec, double x, double dt, double epsilon, RandomStream& rng,
                             int substeps) {
    std::vector<double> z(static_cast<std::size_t>(std::max(1, substeps)));
    if (epsilon != 0.0) rng.fill_normals(z);
    else std::fill(z.begin(), z.end(), 0.0);
    return regularized_flow_step(spec, x, dt, epsilon, z);
}

std::vector<DriftViolation> verify_drift(const DriftSpec& spec, double radius, int n) {
    std::vector<DriftViolation> out;
    std::vector<double> xs;
    for (int i = 0; i <= n; ++i) xs.push_back(-radius + 2.0 * radius * i / n);
    for (double x : xs) {
        if (std::abs(eval_drift(spec, x)) > spec.growth * (1.0 + std::abs(x)) + 1e-12)
            out.push_back({"growth", x, x});
    }
    for (double x : xs)
        for (double y : xs) {
            if (y > x) continue;
            const double d = eval_drift(spec, x) - eval_drift(spec, y);
            if (spec.kind == DriftKind::affine || spec.kind == DriftKind::lipschitz_custom) {
                if (std::abs(d) > spec.C_a * (x - y) + 1e-12) out.push_back({"lipschitz", x, y});
            } else if (spec.kind == DriftKind::one_sided_lipschitz || spec.kind == DriftKind::beta_modulus) {
                if (d > spec.C_one_sided * (x - y) + 1e-12) out.push_back({"one_sided", x, y});
            }
        }
    return out;
}

}  // namespace harris
