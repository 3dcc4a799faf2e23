#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "abcd/delays.hpp"
#include "abcd/policy.hpp"

using namespace abcd;

// Closed forms for the geometric tail q = 1/2, p_j = 2^{-(j+1)}:
//   s_l = (l+1) 2^{-l},  c_l = (2l+4) 2^{-l},  c_0 = 4.
TEST_CASE("tail moments: geometric closed forms") {
    auto tm = tail_moments([](int j) { return std::pow(0.5, j + 1); });
    CHECK(tm.c0 == doctest::Approx(4.0).epsilon(1e-12));
    for (int l = 0; l <= 20; ++l) {
        CHECK(tail_s(tm, l) == doctest::Approx((l + 1.0) * std::pow(2.0, -l)).epsilon(1e-10));
        CHECK(tail_c(tm, l) == doctest::Approx((2.0 * l + 4.0) * std::pow(2.0, -l)).epsilon(1e-10));
    }
    // far tail lookups are zero
    CHECK(tail_c(tm, 100000) == 0.0);
}

TEST_CASE("tail moments: finite pmf by direct summation") {
    // delays in {0, 2, 5} with probs .5/.3/.2:
    // s_l and c_i computed by hand from j*p_j = {0, .6, 1.0}
    std::vector<double> p = {0.5, 0.0, 0.3, 0.0, 0.0, 0.2};
    auto tm = tail_moments(p);
    CHECK(tail_s(tm, 0) == doctest::Approx(1.6));
    CHECK(tail_s(tm, 1) == doctest::Approx(1.6));
    CHECK(tail_s(tm, 2) == doctest::Approx(1.6));
    CHECK(tail_s(tm, 3) == doctest::Approx(1.0));
    CHECK(tail_s(tm, 5) == doctest::Approx(1.0));
    CHECK(tail_s(tm, 6) == doctest::Approx(0.0));
    // c_0 = 3*1.6 + 3*1.0 = 7.8
    CHECK(tm.c0 == doctest::Approx(7.8));
    CHECK(tail_c(tm, 3) == doctest::Approx(3.0));
    CHECK(tail_c(tm, 5) == doctest::Approx(1.0));
}

TEST_CASE("tail moments: divergent tails rejected") {
    // p_j ~ 1/j^2: mean already infinite -> c0 diverges
    double z = 0.0;
    for (int j = 1; j <= 100000; ++j) z += 1.0 / (static_cast<double>(j) * j);
    CHECK_THROWS_AS(tail_moments([z](int j) { return j >= 1 ? 1.0 / (static_cast<double>(j) * j) / z : 0.0; }),
                    DivergentTail);
    // non-normalized pmf rejected
    CHECK_THROWS_AS(tail_moments(std::vector<double>{0.5, 0.2}), std::invalid_argument);
}

TEST_CASE("geometric pmf helper") {
    auto p = geometric_delay_pmf(0.5, 64);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[3] == doctest::Approx(0.0625));
    double mass = 0.0;
    for (double v : p) mass += v;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(geometric_delay_pmf(1.0, 8), std::invalid_argument);
}

TEST_CASE("delay spec validation") {
    CHECK_NOTHROW(validate(DelaySpec{BoundedDelay{3}}));
    CHECK_THROWS_AS(validate(DelaySpec{BoundedDelay{-1}}), std::invalid_argument);
    CHECK_NOTHROW(validate(DelaySpec{StochasticTailDelay{geometric_delay_pmf(0.5, 64), 64}}));
    CHECK_THROWS_AS(validate(DelaySpec{StochasticTailDelay{{0.5, 0.2}, 2}}), std::invalid_argument);
    CHECK_NOTHROW(validate(DelaySpec{DeterministicDelay{{0, 1, 5}, true}}));
    CHECK_THROWS_AS(validate(DelaySpec{DeterministicDelay{{}, true}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(DelaySpec{DeterministicDelay{{0, -2}, true}}), std::invalid_argument);
}

TEST_CASE("fixed step sizes") {
    CHECK(gamma_bounded(2, 0.5) == doctest::Approx(0.2));
    CHECK(gamma_bounded(1, 0.9) == doctest::Approx(0.6));
    CHECK(gamma_stochastic_unbounded(4.0, 0.5) == doctest::Approx(0.2));
    CHECK_THROWS_AS(gamma_bounded(0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(gamma_bounded(2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_stochastic_unbounded(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("epsilon sequences and kappa") {
    auto inv = EpsilonSpec::inverse_square();
    CHECK(inv.epsilon(3) == doctest::Approx(1.0 / 9.0));
    // kappa_1 = pi^2/6; kappa_i by brute force
    CHECK(inv.kappa(1) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
    for (int i : {2, 5, 17}) {
        double brute = 0.0;
        for (int j = 2000000; j >= i; --j) brute += 1.0 / (static_cast<double>(j) * j);
        CHECK(inv.kappa(i) == doctest::Approx(brute).epsilon(1e-6));
    }

    auto geo = EpsilonSpec::geometric(0.5);
    CHECK(geo.epsilon(4) == doctest::Approx(0.0625));
    CHECK(geo.kappa(1) == doctest::Approx(1.0));  // 1/2 + 1/4 + ... = 1
    CHECK(geo.kappa(3) == doctest::Approx(0.25));

    auto fin = EpsilonSpec::finite({0.5, 0.25});
    CHECK(fin.epsilon(1) == doctest::Approx(0.5));
    CHECK(fin.epsilon(3) == 0.0);
    CHECK(fin.kappa(1) == doctest::Approx(0.75));
    CHECK(fin.kappa(2) == doctest::Approx(0.25));
    CHECK_THROWS_AS(EpsilonSpec::finite({}), std::invalid_argument);
    CHECK_THROWS_AS(EpsilonSpec::geometric(1.5), std::invalid_argument);
}

TEST_CASE("D_j sequence: geometric eps gives powers of two") {
    // eps_i = 2^{-i}: kappa_1 = 1, D_j = 1/2 + 1/2 + sum_{i<=j} 2^{i-1} = 2^j
    auto geo = EpsilonSpec::geometric(0.5);
    for (int j = 0; j <= 10; ++j)
        CHECK(d_sequence(geo, j) == doctest::Approx(std::pow(2.0, j)).epsilon(1e-12));
}

TEST_CASE("D_j sequence: inverse-square eps") {
    auto inv = EpsilonSpec::inverse_square();
    double k1 = M_PI * M_PI / 6.0;
    CHECK(d_sequence(inv, 0) == doctest::Approx(0.5 + k1 / 2.0).epsilon(1e-12));
    // D_1 = 1/2 + kappa_1/2 + 1/2
    CHECK(d_sequence(inv, 1) == doctest::Approx(1.0 + k1 / 2.0).epsilon(1e-12));
    // D_2 = D_1 + 1/(2 * 1/4) = D_1 + 2
    CHECK(d_sequence(inv, 2) == doctest::Approx(3.0 + k1 / 2.0).epsilon(1e-12));
    CHECK(d_sequence(inv, 2) == doctest::Approx(3.8224670334241132).epsilon(1e-12));
}

TEST_CASE("step size policies") {
    StepPolicy b = BoundedFixedPolicy{2, 0.5};
    CHECK(step_size(b, 0) == doctest::Approx(0.2));
    CHECK(step_size(b, 2) == doctest::Approx(0.2));  // fixed: ignores the delay

    StepPolicy u = StochasticUnboundedFixedPolicy{4.0, 0.5};
    CHECK(step_size(u, 7) == doctest::Approx(0.2));

    StepPolicy a = DelayAdaptivePolicy{EpsilonSpec::geometric(0.5), 0.5};
    CHECK(step_size(a, 0) == doctest::Approx(0.5));
    CHECK(step_size(a, 3) == doctest::Approx(0.5 / 8.0));
    // spikes shrink the step but never invalidate it
    CHECK(step_size(a, 20) > 0.0);

    StepPolicy bad = DelayAdaptivePolicy{EpsilonSpec::finite({0.5}), 0.5};
    CHECK_THROWS_AS(step_size(bad, 2), std::invalid_argument);  // eps exhausted
}
