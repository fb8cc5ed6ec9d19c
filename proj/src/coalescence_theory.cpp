#include "harris/coalescence_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "harris/errors.hpp"
#include "harris/parallel.hpp"
#include "harris/random.hpp"

namespace harris {

DiffusionSpec DiffusionSpec::from_covariance(const CovarianceSpec& phi, double beta, double C_rho, double C_tilde_rho) {
    validate(phi);
    DiffusionSpec d;
    d.alpha = phi.alpha_class.value_or(0.0);
    d.C_phi = phi.C_phi;
    d.beta = beta;
    d.C_rho = C_rho;
    d.C_tilde = std::min(C_tilde_rho, phi.C_tilde_phi);
    if (phi.kind == CovarianceKind::exponential_alpha) {
        const double a = phi.alpha;
        d.one_minus_phi = [a](double z) { return -std::expm1(-std::pow(std::abs(z), a)); };
    } else if (phi.kind == CovarianceKind::gaussian) {
        d.one_minus_phi = [](double z) { return -std::expm1(-z * z); };
    } else {
        d.one_minus_phi = [phi](double z) { return 1.0 - eval_phi(phi, z); };
    }
    validate(d);
    return d;
}

DiffusionSpec DiffusionSpec::synthetic(double C, double alpha, double beta, double C_rho, double C_tilde) {
    if (!(C > 0.0)) throw std::invalid_argument("synthetic diffusion needs C > 0");
    DiffusionSpec d;
    d.one_minus_phi = [C, alpha](double z) { return C * std::pow(z, alpha); };
    d.alpha = alpha;
    d.C_phi = C;
    d.beta = beta;
    d.C_rho = C_rho;
    d.C_tilde = C_tilde;
    validate(d);
    return d;
}

double DiffusionSpec::rho(double z) const { return C_rho == 0.0 ? 0.0 : C_rho * std::pow(z, beta); }

void validate(const DiffusionSpec& spec) {
    if (!spec.one_minus_phi) throw std::invalid_argument("diffusion: 1 - phi missing");
    if (!(spec.alpha >= 0.0 && spec.alpha < 2.0)) throw std::invalid_argument("diffusion: alpha must lie in [0, 2)");
    if (spec.C_rho != 0.0 && !(spec.beta - spec.alpha > -1.0))
        throw std::invalid_argument("diffusion: rho / (1 - phi) is not integrable at 0 (need beta - alpha > -1)");
    if (!(spec.C_tilde > 0.0)) throw std::invalid_argument("diffusion: C_tilde must be positive");
    if (!(spec.C_phi > 0.0)) throw std::invalid_argument("diffusion: C_phi must be positive");
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 20;

double nested(double tol) { return std::max(tol * 1e-2, 1e-14); }

template <class F>
double integrate_piece(F& f, double a, double b, double tol) {
    // Work on [0, 1] so that the error estimate does not depend on the interval length.
    const double len = b - a;
    double err = 0.0, l1 = 0.0;
    const double v = len * GK::integrate([&](double s) { return f(a + len * s); }, 0.0, 1.0, kMaxDepth, tol, &err, &l1);
    if (!std::isfinite(v) || err > std::max(10.0 * tol * l1, 1e-300))
        throw ToleranceError("quadrature did not reach the requested tolerance");
    return v;
}

/// Integrals starting at 0 are split into halving pieces [b/2^{k+1}, b/2^k], so fractional powers at
/// the origin never meet a single Kronrod panel. Once a piece is negligible the remainder, which is
/// about one more piece for an integrand that settles near 0, is added and the sweep stops.
template <class F>
double integrate(F f, double a, double b, double tol) {
    if (a == b) return 0.0;
    if (a != 0.0) return integrate_piece(f, a, b, tol);
    double total = 0.0, hi = b;
    for (int k = 0; k < 1100; ++k) {
        const double piece = integrate_piece(f, 0.5 * hi, hi, tol);
        total += piece;
        if (k >= 3 && std::abs(piece) <= 0.1 * tol * std::abs(total)) return total + piece;
        hi *= 0.5;
        if (hi == 0.0) return total;
    }
    throw ToleranceError("quadrature from the origin did not settle");
}

// p(b) - p(a) for 0 <= a <= b.
double scale_increment(const DiffusionSpec& spec, double a, double b, double tol) {
    if (spec.C_rho == 0.0) return b - a;
    return integrate([&](double y) { return std::exp(-drift_integral(spec, y, nested(tol))); }, a, b, tol);
}

}  // namespace

double drift_integral(const DiffusionSpec& spec, double y, double tol) {
    if (!(y >= 0.0)) throw std::invalid_argument("drift_integral: y must be nonnegative");
    if (spec.C_rho == 0.0 || y == 0.0) return 0.0;
    const double kappa = 1.0 + spec.beta - spec.alpha;
    const double inv = 1.0 / kappa;
    // z = u^{1/kappa} turns the z^{beta - alpha} endpoint singularity into a bounded integrand.
    auto f = [&](double u) {
        const double z = std::pow(u, inv);
        return spec.rho(z) / spec.one_minus_phi(z) * inv * std::pow(u, inv - 1.0);
    };
    return integrate_piece(f, 0.0, std::pow(y, kappa), tol);
}

double scale_function(const DiffusionSpec& spec, double x, double tol) {
    validate(spec);
    if (!(x >= 0.0)) throw std::invalid_argument("scale_function: x must be nonnegative");
    return scale_increment(spec, 0.0, x, tol);
}

double speed_density(const DiffusionSpec& spec, double y, double tol) {
    if (!(y > 0.0)) throw std::invalid_argument("speed_density: y must be positive");
    return std::exp(drift_integral(spec, y, tol)) / spec.one_minus_phi(y);
}

double accessibility_v(const DiffusionSpec& spec, double x, double tol) {
    validate(spec);
    if (!(x > 0.0)) throw std::invalid_argument("accessibility_v: x must be positive");
    const double C = spec.C_tilde;
    if (x == C) return 0.0;
    const double lo = std::min(x, C);
    const double hi = std::max(x, C);
    // y = e^s spreads the y^{-alpha} growth of the speed density near small x.
    auto f = [&](double s) {
        const double y = std::exp(s);
        const double dp = x < C ? scale_increment(spec, x, y, nested(tol)) : scale_increment(spec, y, x, nested(tol));
        return dp * speed_density(spec, y, nested(tol)) * y;
    };
    return integrate(f, std::log(lo), std::log(hi), tol);
}

LimitEstimate accessibility_limit(const DiffusionSpec& spec, int k_min, int k_max, double tol) {
    if (k_min < 0 || k_max < k_min + 2) throw std::invalid_argument("accessibility_limit: need k_max >= k_min + 2");
    std::vector<double> v;
    std::vector<double> acc;
    LimitEstimate out;
    for (int k = k_min; k <= k_max; ++k) {
        v.push_back(accessibility_v(spec, std::ldexp(1.0, -k), nested(tol)));
        out.last = v.back();
        out.value = v.back();
        if (v.size() < 3) continue;
        const double v0 = v[v.size() - 3], v1 = v[v.size() - 2], v2 = v.back();
        const double d1 = v1 - v0, d2 = v2 - v1;
        const double den = d2 - d1;
        const double a = (den != 0.0 && std::abs(d2) < std::abs(d1)) ? v2 - d2 * d2 / den : v2;
        acc.push_back(a);
        out.value = a;
        if (acc.size() >= 2 && std::abs(d2) < std::abs(d1) &&
            std::abs(acc.back() - acc[acc.size() - 2]) <= tol * std::max(1.0, std::abs(a))) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

ScaleLimit scale_at_infinity(const DiffusionSpec& spec, double tol) {
    validate(spec);
    ScaleLimit out;
    out.value = scale_function(spec, 1.0, nested(tol));
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 40; ++k) {
        const double inc = scale_increment(spec, std::ldexp(1.0, k), std::ldexp(1.0, k + 1), nested(tol));
        out.value += inc;
        if (k >= 2 && inc < prev && inc <= tol * out.value) {
            out.finite = true;
            return out;
        }
        prev = inc;
    }
    return out;
}

double bessel_dimension(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("bessel_dimension: alpha must lie in (0, 2)");
    return 2.0 * (1.0 - alpha) / (2.0 - alpha);
}

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) throw std::invalid_argument("regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
    constexpr double eps = 1e-16;
    constexpr int max_iter = 100000;
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < max_iter; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) return std::min(1.0, sum * std::exp(log_prefactor));
        }
        throw ToleranceError("regularized_gamma_p: series did not converge");
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return std::max(0.0, 1.0 - std::exp(log_prefactor) * h);
    }
    throw ToleranceError("regularized_gamma_p: continued fraction did not converge");
}

double squared_bessel_survival(double x0, double t, double alpha) {
    if (!(x0 >= 0.0) || !(t > 0.0)) throw std::invalid_argument("squared_bessel_survival: need x0 >= 0, t > 0");
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("squared_bessel_survival: alpha must lie in (0, 2)");
    return regularized_gamma_p(1.0 / (2.0 - alpha), x0 / (2.0 * t));
}

double pipeline_survival_bound(const DiffusionSpec& spec, double x, double t) {
    validate(spec);
    if (!(x > 0.0) || !(t > 0.0)) throw std::invalid_argument("pipeline_survival_bound: need x, t > 0");
    const double a = spec.alpha;
    const double px = scale_function(spec, x);
    const double pc = scale_function(spec, spec.C_tilde);
    const double gamma = spec.C_phi * std::exp(-drift_integral(spec, spec.C_tilde));
    const double c = 2.0 / (2.0 - a);
    return squared_bessel_survival(c * c * std::pow(px, 2.0 - a), gamma * t, a) + px / pc;
}

Estimate simulate_gap_diffusion(const DiffusionSpec& spec, double x, double t, double dt, std::size_t reps,
                                std::uint64_t seed) {
    validate(spec);
    const std::size_t steps = fine_steps(t, dt);
    const double h = t / static_cast<double>(steps);
    const double sh = std::sqrt(h);
    std::vector<double> alive(reps, 0.0);
    parallel_for(reps, [&](std::size_t r) {
        RandomStream rng(seed, make_stream_id(Purpose::auxiliary, 0, static_cast<std::uint32_t>(r)));
        double xi = x;
        for (std::size_t k = 0; k < steps; ++k) {
            const double var = 2.0 * spec.one_minus_phi(xi);
            const double next = xi + spec.rho(xi) * h + std::sqrt(var) * sh * rng.normal();
            if (!(next > 0.0)) return;
            if (rng.uniform() < std::exp(-2.0 * xi * next / (var * h))) return;
            xi = next;
        }
        alive[r] = 1.0;
    });
    return mean_se(alive);
}

Estimate pair_noncoalescence_mc(const CovarianceSpec& phi, const DriftSpec& a, double gap, double t,
                                std::size_t reps, const SimConfig& cfg, std::uint64_t seed) {
    if (!(gap >= 0.0)) throw std::invalid_argument("pair_noncoalescence_mc: gap must be nonnegative");
    if (gap == 0.0) return {0.0, 0.0, reps};
    const double starts[2] = {0.0, gap};
    std::vector<double> alive(reps, 0.0);
    parallel_for(reps, [&](std::size_t r) {
        RandomStream rng(seed, make_stream_id(Purpose::increments, 0, static_cast<std::uint32_t>(r)));
        const ClusterState s = evolve(phi, a, starts, t, cfg, rng, true);
        alive[r] = s.reps.size() == 2 ? 1.0 : 0.0;
    });
    return mean_se(alive);
}

Estimate cluster_count_mc(const CovarianceSpec& phi, const DriftSpec& a, double l, double r, std::size_t n_grid,
                          double t, std::size_t reps, const SimConfig& cfg, std::uint64_t seed) {
    if (n_grid == 0 || !(r > l)) throw std::invalid_argument("cluster_count_mc: need n_grid >= 1 and l < r");
    if (n_grid == 1) return {1.0, 0.0, reps};
    std::vector<double> starts(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i)
        starts[i] = l + (r - l) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    std::vector<double> count(reps, 0.0);
    parallel_for(reps, [&](std::size_t rep) {
        RandomStream rng(seed, make_stream_id(Purpose::increments, 1, static_cast<std::uint32_t>(rep)));
        count[rep] = static_cast<double>(evolve(phi, a, starts, t, cfg, rng, true).reps.size());
    });
    return mean_se(count);
}

}  // namespace harris
