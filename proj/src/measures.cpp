#include "harris/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace harris {

double QuantileMeasure::quantile(double u) const {
    if (!(u >= 0.0) || u > 1.0) throw std::invalid_argument("quantile: u outside [0,1]");
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end() - 1, u);
    const std::size_t i = static_cast<std::size_t>(it - breakpoints.begin());
    return values[std::min(i, values.size()) - 1];
}

double AtomicMeasure::total_mass() const { return pairwise_sum(masses); }

double CdfStep::operator()(double x) const {
    const auto it = std::upper_bound(positions.begin(), positions.end(), x);
    if (it == positions.begin()) return 0.0;
    return cdf[static_cast<std::size_t>(it - positions.begin()) - 1];
}

QuantileMeasure pushforward(std::span<const double> grid_starts, std::span<const double> end_positions) {
    const std::size_t n = grid_starts.size();
    if (n == 0 || end_positions.size() != n) throw std::invalid_argument("pushforward: length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(grid_starts[i] >= 0.0 && grid_starts[i] <= 1.0)) throw std::invalid_argument("pushforward: start outside [0,1]");
        if (i > 0 && !(grid_starts[i] > grid_starts[i - 1])) throw std::invalid_argument("pushforward: starts not increasing");
        if (i > 0 && end_positions[i] < end_positions[i - 1])
            throw std::invalid_argument("pushforward: end positions not monotone");
    }
    QuantileMeasure qm;
    qm.breakpoints.push_back(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!qm.values.empty() && end_positions[i] == qm.values.back()) qm.breakpoints.pop_back();
        else qm.values.push_back(end_positions[i]);
        qm.breakpoints.push_back(i + 1 < n ? 0.5 * (grid_starts[i] + grid_starts[i + 1]) : 1.0);
    }
    return qm;
}

AtomicMeasure pushforward_atoms(std::span<const double> weights, std::span<const double> end_positions) {
    if (weights.size() != end_positions.size()) throw std::invalid_argument("pushforward_atoms: length mismatch");
    AtomicMeasure am;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) throw std::invalid_argument("pushforward_atoms: negative weight");
        if (i > 0 && end_positions[i] < end_positions[i - 1])
            throw std::invalid_argument("pushforward_atoms: end positions not monotone");
        if (!am.positions.empty() && end_positions[i] == am.positions.back()) {
            am.masses.back() += weights[i];
        } else {
            am.positions.push_back(end_positions[i]);
            am.masses.push_back(weights[i]);
        }
    }
    return am;
}

AtomicMeasure to_atomic(const QuantileMeasure& qm) {
    AtomicMeasure am;
    am.positions = qm.values;
    for (std::size_t i = 0; i < qm.num_atoms(); ++i) am.masses.push_back(qm.mass(i));
    return am;
}

QuantileMeasure to_quantile(const AtomicMeasure& am) {
    if (am.positions.empty() || am.positions.size() != am.masses.size())
        throw std::invalid_argument("to_quantile: malformed measure");
    QuantileMeasure qm;
    qm.breakpoints.push_back(0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < am.positions.size(); ++i) {
        if (i > 0 && !(am.positions[i] > am.positions[i - 1]))
            throw std::invalid_argument("to_quantile: positions not increasing");
        acc += am.masses[i];
        qm.values.push_back(am.positions[i]);
        qm.breakpoints.push_back(acc);
    }
    if (std::abs(acc - 1.0) > 1e-12) throw std::invalid_argument("to_quantile: masses do not sum to one");
    qm.breakpoints.back() = 1.0;
    return qm;
}

CdfStep generalized_inverse(const QuantileMeasure& qm) {
    CdfStep c;
    c.positions = qm.values;
    c.cdf.assign(qm.breakpoints.begin() + 1, qm.breakpoints.end());
    return c;
}

QuantileMeasure quantile_of(const CdfStep& cdf) {
    if (cdf.positions.empty() || cdf.cdf.size() != cdf.positions.size() || cdf.cdf.back() != 1.0)
        throw std::invalid_argument("quantile_of: CDF must end at 1");
    QuantileMeasure qm;
    qm.breakpoints.push_back(0.0);
    for (std::size_t i = 0; i < cdf.positions.size(); ++i) {
        if (!(cdf.cdf[i] > qm.breakpoints.back())) continue;
        qm.values.push_back(cdf.positions[i]);
        qm.breakpoints.push_back(cdf.cdf[i]);
    }
    return qm;
}

double wasserstein_p(const QuantileMeasure& mu, const QuantileMeasure& nu, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_p: p must be at least 1");
    std::size_t i = 0, j = 0;
    double u = 0.0;
    double total = 0.0;
    while (i < mu.num_atoms() && j < nu.num_atoms()) {
        const double a = mu.breakpoints[i + 1];
        const double b = nu.breakpoints[j + 1];
        const double next = std::min(a, b);
        const double d = std::abs(mu.values[i] - nu.values[j]);
        if (next > u && d > 0.0) total += (next - u) * (p == 1.0 ? d : p == 2.0 ? d * d : std::pow(d, p));
        u = next;
        if (a <= next) ++i;
        if (b <= next) ++j;
    }
    return p == 1.0 ? total : p == 2.0 ? std::sqrt(total) : std::pow(total, 1.0 / p);
}

W1pEstimate estimate_W1p(std::span<const QuantileMeasure> first, std::span<const QuantileMeasure> second, double p) {
    if (first.empty() || first.size() != second.size())
        throw std::invalid_argument("estimate_W1p: ensembles must be non-empty and of equal size");
    std::vector<double> d(first.size()), dp(first.size());
    for (std::size_t r = 0; r < first.size(); ++r) {
        d[r] = wasserstein_p(first[r], second[r], p);
        dp[r] = std::pow(d[r], p);
    }
    return {mean_se(d), mean_se(dp)};
}

namespace {

double triangle_integral(const AtomicMeasure& m, double c, double w) {
    double s = 0.0;
    const auto lo = std::lower_bound(m.positions.begin(), m.positions.end(), c - w);
    for (auto it = lo; it != m.positions.end() && *it <= c + w; ++it) {
        const double f = 1.0 - std::abs(*it - c) / w;
        if (f > 0.0) s += f * m.masses[static_cast<std::size_t>(it - m.positions.begin())];
    }
    return s;
}

}  // namespace

double vague_discrepancy(const AtomicMeasure& nu_n, const AtomicMeasure& nu, double M, int n_test) {
    if (!(M > 0.0) || n_test < 1) throw std::invalid_argument("vague_discrepancy: need M > 0 and n_test >= 1");
    const double w = 2.0 * M / static_cast<double>(n_test + 1);
    double worst = 0.0;
    for (int i = 1; i <= n_test; ++i) {
        const double c = -M + static_cast<double>(i) * w;
        worst = std::max(worst, std::abs(triangle_integral(nu_n, c, w) - triangle_integral(nu, c, w)));
    }
    return worst;
}

}  // namespace harris
