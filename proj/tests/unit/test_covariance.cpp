#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "harris/covariance.hpp"

using namespace harris;

TEST_CASE("phi point values") {
    CHECK(eval_phi(CovarianceSpec::exponential(2.0), 0.0) == 1.0);
    CHECK(eval_phi(CovarianceSpec::indicator(), 0.5) == 0.0);
    CHECK(eval_phi(CovarianceSpec::indicator(), 0.0) == 1.0);
    CHECK(eval_phi(CovarianceSpec::exponential(1.0), 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK(eval_phi(CovarianceSpec::gaussian(), 0.5) == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));
    CHECK(eval_phi(CovarianceSpec::cosine(0.5, 0.5), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("phi is exactly symmetric and bounded") {
    const std::vector<CovarianceSpec> specs{CovarianceSpec::exponential(1.5), CovarianceSpec::gaussian(),
                                            CovarianceSpec::indicator(), CovarianceSpec::cosine(0.3, 0.7, 50)};
    for (const auto& s : specs)
        for (double x = -3.0; x <= 3.0; x += 0.0137) {
            CHECK(eval_phi(s, x) == eval_phi(s, -x));
            CHECK(std::abs(eval_phi(s, x)) <= 1.0);
        }
}

TEST_CASE("tabulated phi interpolates linearly in |x|") {
    const auto s = CovarianceSpec::tabulated({0.0, 1.0, 2.0}, {1.0, 0.5, 0.0}, 1.0, 0.4, 1.0);
    CHECK(eval_phi(s, 0.5) == doctest::Approx(0.75));
    CHECK(eval_phi(s, -1.5) == doctest::Approx(0.25));
    CHECK(eval_phi(s, 10.0) == 0.0);
    CHECK_THROWS_AS(validate(CovarianceSpec::tabulated({0.0, 1.0}, {0.9, 0.0}, 1.0, 0.4, 1.0)),
                    std::invalid_argument);
}

TEST_CASE("malformed specs are rejected") {
    CHECK_THROWS_AS(validate(CovarianceSpec::exponential(2.5)), std::invalid_argument);
    CHECK_THROWS_AS(validate(CovarianceSpec::cosine(0.5, 0.6)), std::invalid_argument);
    CHECK_THROWS_AS(validate(CovarianceSpec::cosine(0.5, 0.5, 0)), std::invalid_argument);
}

TEST_CASE("gram matrices") {
    const std::vector<double> same{0.3, 0.3, 0.3};
    const Matrix ones = gram_matrix(CovarianceSpec::gaussian(), same);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(ones(i, j) == 1.0);

    const std::vector<double> far{0.0, 1e6};
    const Matrix g = gram_matrix(CovarianceSpec::gaussian(), far);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == 0.0);

    const std::vector<double> unit{0.0, 1.0};
    const Matrix e = gram_matrix(CovarianceSpec::exponential(1.0), unit);
    CHECK(e(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(e(1, 0) == e(0, 1));

    std::vector<double> flat;
    gram_into(CovarianceSpec::exponential(1.0), unit, flat);
    REQUIRE(flat.size() == 4);
    CHECK(flat[1] == e(0, 1));
}

TEST_CASE("class checks") {
    auto g = CovarianceSpec::gaussian();
    g.C_phi = 0.3;
    CHECK(verify_class(g, 1.0 / 64.0, 1.0).ok());

    auto too_strong = CovarianceSpec::gaussian();
    too_strong.C_phi = 1.5;
    const ClassReport bad = verify_class(too_strong, 1.0 / 64.0, 1.0);
    CHECK_FALSE(bad.ok());
    CHECK(bad.violations.front().type == ClassViolation::Type::lower_bound);

    CHECK(verify_class(CovarianceSpec::indicator(), 0.01, 2.0).ok());
    CHECK(verify_class(CovarianceSpec::exponential(1.0), 1.0 / 128.0, 2.0).ok());

    std::vector<double> dyadic;
    for (int m = 1; m <= 12; ++m) dyadic.push_back(std::exp(-2.0 * m));
    const ClassReport c = verify_class_at(CovarianceSpec::cosine(0.5, 0.5, 200), dyadic);
    CHECK(c.ok());
    CHECK(c.points_checked == dyadic.size());
}

TEST_CASE("cosine truncation bound dominates the tail sum") {
    for (int N : {1, 10, 100}) {
        double tail = 0.0;
        for (int n = 100000; n > N; --n) tail += 1.0 / (static_cast<double>(n) * n);
        CHECK(tail <= cosine_truncation_bound(N));
    }
}

TEST_CASE("truncated cosine series stays within its bound of a longer series") {
    const auto short_series = CovarianceSpec::cosine(0.5, 0.5, 20);
    const auto long_series = CovarianceSpec::cosine(0.5, 0.5, 400);
    for (double x = 0.0; x < 1.0; x += 0.01) {
        // Both normalizations differ by at most the tail mass, so the gap is bounded by twice it.
        CHECK(std::abs(eval_phi(short_series, x) - eval_phi(long_series, x)) <=
              2.0 * 0.5 * cosine_truncation_bound(20) + 1e-12);
    }
}

TEST_CASE("holder exponent heuristic") {
    CHECK(holder_beta_heuristic(CovarianceSpec::exponential(1.5)) == 0.75);
    CHECK(holder_beta_heuristic(CovarianceSpec::indicator()) == 0.5);
}
