/// @file matrix.hpp
/// @brief Dense square matrix and a guarded Cholesky factorization.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace harris {

/// Row-major square matrix.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
    double* data() noexcept { return a_.data(); }
    const double* data() const noexcept { return a_.data(); }

    void resize(std::size_t n) {
        n_ = n;
        a_.assign(n * n, 0.0);
    }

    /// L * L^T.
    Matrix multiply_transpose() const;

    /// Largest entrywise absolute difference.
    double max_abs_diff(const Matrix& other) const;

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

/// Jitter levels tried after the caller's own jitter, in order.
inline constexpr double kJitterLadder[] = {1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

/// Attempts an unpivoted Cholesky of `a + jitter*I` in place (lower triangle, upper zeroed).
/// Returns false when a pivot is not strictly positive.
bool cholesky_in_place(double* a, std::size_t n, double jitter) noexcept;

/// Cholesky factor of `gram + jitter*I`, escalating the jitter along kJitterLadder on failure.
///
/// Throws SingularityError when even 1e-6 does not make the matrix factorizable.
/// When `jitter_used` is non-null it receives the jitter of the successful attempt.
Matrix cholesky_factor(const Matrix& gram, double jitter, double* jitter_used = nullptr);

/// Same as cholesky_factor but writes the factor into caller-owned storage `work`,
/// which is reused between calls. Returns the jitter that succeeded.
double cholesky_factor_into(std::span<const double> gram, std::size_t n, double jitter,
                            std::vector<double>& work);

}  // namespace harris
