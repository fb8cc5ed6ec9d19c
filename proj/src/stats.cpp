#include "harris/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace harris {

double pairwise_sum(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

Estimate mean_se(std::span<const double> x) {
    Estimate e;
    e.n = x.size();
    if (x.empty()) return e;
    e.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2) return e;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - e.mean) * (x[i] - e.mean);
    const double var = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
    e.se = std::sqrt(var / static_cast<double>(x.size()));
    return e;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_threshold_95(std::size_t n, std::size_t m) {
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return 1.3581 * std::sqrt((dn + dm) / (dn * dm));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::vector<double> ones(n, 1.0);
    LinearFit f = weighted_linear_fit(x, y, ones);
    if (n < 3) {
        f.slope_se = f.intercept_se = std::numeric_limits<double>::quiet_NaN();
        return f;
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        rss += e * e;
    }
    const double sigma = std::sqrt(rss / static_cast<double>(n - 2));
    f.slope_se *= sigma;
    f.intercept_se *= sigma;
    return f;
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> se) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n || se.size() != n) throw std::invalid_argument("weighted_linear_fit: bad sizes");
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(se[i] > 0.0)) throw std::invalid_argument("weighted_linear_fit: nonpositive standard error");
        const double w = 1.0 / (se[i] * se[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    LinearFit f;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    f.slope_se = std::sqrt(sw / det);
    f.intercept_se = std::sqrt(sxx / det);
    return f;
}

SlopeFit loglog_slope(std::span<const double> delta, std::span<const double> metric,
                      std::span<const double> metric_se, RandomStream rng, int bootstrap) {
    SlopeFit out;
    const std::size_t n = delta.size();
    if (n < 3 || metric.size() != n) {
        out.degenerate = true;
        return out;
    }
    std::vector<double> lx(n), ly(n), lse(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(metric[i] > 0.0) || !(delta[i] > 0.0)) {
            out.degenerate = true;
            return out;
        }
        lx[i] = std::log(delta[i]);
        ly[i] = std::log(metric[i]);
        lse[i] = metric_se.size() == n ? metric_se[i] / metric[i] : 0.0;
    }
    const LinearFit fit = linear_fit(lx, ly);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(bootstrap));
    std::vector<double> yb(n);
    for (int b = 0; b < bootstrap; ++b) {
        for (std::size_t i = 0; i < n; ++i) yb[i] = ly[i] + lse[i] * rng.normal();
        slopes.push_back(linear_fit(lx, yb).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    if (!slopes.empty()) {
        out.ci_low = slopes[static_cast<std::size_t>(0.025 * (slopes.size() - 1))];
        out.ci_high = slopes[static_cast<std::size_t>(0.975 * (slopes.size() - 1))];
    }
    return out;
}

double expected_max_chi2(std::size_t n) {
    // E max = integral over x > 0 of 1 - P(chi2 <= x)^n, with P(chi2 <= x) = erf(sqrt(x/2)).
    const double dn = static_cast<double>(n);
    auto integrand = [dn](double x) {
        const double c = std::erf(std::sqrt(x / 2.0));
        return -std::expm1(dn * std::log(c));
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-12, &err);
}

}  // namespace harris
