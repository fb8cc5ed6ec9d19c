#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "harris/drift.hpp"
#include "harris/stats.hpp"

using namespace harris;

TEST_CASE("drift point values") {
    CHECK(eval_drift(DriftSpec::zero(), 3.7) == 0.0);
    CHECK(eval_drift(DriftSpec::affine(0.0, -1.0), 2.0) == -2.0);
    CHECK(eval_drift(DriftSpec::one_sided("neg_sqrt"), 4.0) == -2.0);
    CHECK(eval_drift(DriftSpec::one_sided("neg_sqrt"), -9.0) == 3.0);
    CHECK(eval_drift(DriftSpec::modulus(0.5, 2.0), 4.0) == -4.0);
}

TEST_CASE("deterministic flows") {
    CHECK(ode_flow(DriftSpec::zero(), 3.0, 1.0) == 3.0);
    CHECK(ode_flow(DriftSpec::affine(0.0, -1.0), 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    // dF = (1 + F) dt: F_t = (x + 1) e^t - 1.
    CHECK(ode_flow(DriftSpec::affine(1.0, 1.0), 0.5, 0.7) ==
          doctest::Approx(1.5 * std::exp(0.7) - 1.0).epsilon(1e-14));
    // dF = c0 dt.
    CHECK(ode_flow(DriftSpec::affine(2.0, 0.0), 0.5, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sin drift matches the separable solution") {
    const DriftSpec s = DriftSpec::lipschitz("sin");
    for (double x : {0.5, -1.2, 2.5}) {
        for (double t : {0.1, 1.0}) {
            const double exact = 2.0 * std::atan(std::tan(x / 2.0) * std::exp(t));
            CHECK(std::abs(ode_flow(s, x, t) - exact) < 1e-10);
        }
    }
}

TEST_CASE("tanh drift is monotone in the initial point") {
    const DriftSpec s = DriftSpec::lipschitz("tanh");
    double prev = -1e300;
    for (double x = -3.0; x <= 3.0; x += 0.01) {
        const double v = ode_flow(s, x, 0.8);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("regularized step") {
    std::vector<double> normals(16, 0.0);
    CHECK(regularized_flow_step(DriftSpec::zero(), 1.0, 0.5, 0.0, normals) == 1.0);
    CHECK(std::abs(regularized_flow_step(DriftSpec::affine(0.0, -1.0), 1.0, 0.01, 0.0, normals) - std::exp(-0.01)) <
          1e-4);

    RandomStream rng(3, make_stream_id(Purpose::regularizer, 0, 0));
    std::vector<double> x(100000);
    for (auto& v : x) v = regularized_flow_step(DriftSpec::zero(), 0.0, 1.0, 1.0, rng);
    const Estimate m = mean_se(x);
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
    const Estimate v = mean_se(sq);
    CHECK(std::abs(m.mean) < 3.0 * m.se);
    CHECK(std::abs(v.mean - 1.0) < 3.0 * v.se);
}

TEST_CASE("regularized step with shared noise preserves order") {
    const DriftSpec s = DriftSpec::one_sided("neg_sqrt");
    RandomStream rng(4, 0);
    std::vector<double> normals(16);
    for (int trial = 0; trial < 200; ++trial) {
        rng.fill_normals(normals);
        double prev = -1e300;
        for (double x = -2.0; x <= 2.0; x += 0.05) {
            const double v = regularized_flow_step(s, x, 0.01, 0.1, normals);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("class verification") {
    CHECK(verify_drift(DriftSpec::affine(0.0, -1.0), 5.0, 50).empty());
    CHECK(verify_drift(DriftSpec::lipschitz("sin"), 5.0, 50).empty());
    CHECK(verify_drift(DriftSpec::one_sided("neg_sqrt"), 5.0, 50).empty());
    CHECK(verify_drift(DriftSpec::modulus(0.5, 1.0), 5.0, 50).empty());
    DriftSpec bad = DriftSpec::affine(0.0, 3.0);
    bad.C_a = 1.0;
    CHECK_FALSE(verify_drift(bad, 1.0, 10).empty());
}

TEST_CASE("unknown tags are rejected") {
    CHECK_THROWS_AS(validate(DriftSpec::lipschitz("cos")), std::invalid_argument);
    CHECK_THROWS_AS(validate(DriftSpec::one_sided("abs")), std::invalid_argument);
}
