#include "harris/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harris/errors.hpp"

namespace harris {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::multiply_transpose() const {
    Matrix out(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += (*this)(i, k) * (*this)(j, k);
            out(i, j) = s;
            out(j, i) = s;
        }
    return out;
}

double Matrix::max_abs_diff(const Matrix& other) const {
    double m = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - other.a_[i]));
    return m;
}

bool cholesky_in_place(double* a, std::size_t n, double jitter) noexcept {
    for (std::size_t j = 0; j < n; ++j) {
        double* rj = a + j * n;
        double d = rj[j] + jitter;
        for (std::size_t k = 0; k < j; ++k) d -= rj[k] * rj[k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        rj[j] = ljj;
        const double inv = 1.0 / ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double* ri = a + i * n;
            double s = ri[j];
            for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
            ri[j] = s * inv;
        }
        for (std::size_t k = j + 1; k < n; ++k) rj[k] = 0.0;
    }
    return true;
}

double cholesky_factor_into(std::span<const double> gram, std::size_t n, double jitter,
                            std::vector<double>& work) {
    work.assign(gram.begin(), gram.begin() + static_cast<std::ptrdiff_t>(n * n));
    if (cholesky_in_place(work.data(), n, jitter)) return jitter;
    for (double level : kJitterLadder) {
        if (level <= jitter) continue;
        work.assign(gram.begin(), gram.begin() + static_cast<std::ptrdiff_t>(n * n));
        if (cholesky_in_place(work.data(), n, level)) return level;
    }
    throw SingularityError("Gram matrix of size " + std::to_string(n) +
                           " is not factorizable with jitter up to 1e-6; merge near-coincident clusters");
}

Matrix cholesky_factor(const Matrix& gram, double jitter, double* jitter_used) {
    const std::size_t n = gram.size();
    std::vector<double> work;
    const double used = cholesky_factor_into(std::span<const double>(gram.data(), n * n), n, jitter, work);
    if (jitter_used) *jitter_used = used;
    Matrix out(n);
    std::copy(work.begin(), work.end(), out.data());
    return out;
}

}  // namespace harris
