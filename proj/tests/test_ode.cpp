#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abcd/ode.hpp"

using namespace abcd;

TEST_CASE("zero delay reduces to plain gradient flow with monotone f") {
    auto problem = make_quadratic(Matrix::Identity(3, 3), Vector::Zero(3), 3);
    Vector x0 = Vector::Constant(3, 2.0);
    auto res = integrate_delayed_flow(problem, x0, 0.5, 1.0, 5.0, 1e-3, constant_delay(0.0));
    CHECK(res.monotone);
    for (std::size_t n = 1; n < res.f_values.size(); ++n)
        CHECK(res.f_values[n] <= res.f_values[n - 1] + 1e-12);
    // contraction toward the minimum
    CHECK(res.f_values.back() < 1e-2 * res.f_values.front());
}

TEST_CASE("1-D quadratic with full constant delay keeps the energy nonincreasing") {
    auto problem = make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1), 1);
    Vector x0 = Vector::Constant(1, 1.0);
    auto res = integrate_delayed_flow(problem, x0, 0.5, 1.0, 10.0, 1e-3, constant_delay(1.0));
    CHECK(res.monotone);
    CHECK(res.max_increase <= 10.0 * 1e-3);
    // energy weight sits strictly inside the feasible interval
    CHECK(res.energy_weight > 0.5 * 1.0 * 1.0 / 2.0);
    CHECK(res.energy_weight < 1.0 / (2.0 * 0.5));
}

TEST_CASE("10-D quadratic with sawtooth delay keeps the energy nonincreasing") {
    auto problem = make_quadratic(Matrix::Identity(10, 10), Vector::Zero(10), 10);
    Vector x0 = Vector::LinSpaced(10, -2.0, 2.0);
    auto res = integrate_delayed_flow(problem, x0, 0.5, 1.0, 8.0, 1e-3, sawtooth_delay(1.0, 2.5));
    CHECK(res.monotone);
}

TEST_CASE("infeasible eta is rejected up front") {
    auto problem = make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1), 1);
    Vector x0 = Vector::Constant(1, 1.0);
    // eta >= 1/(L c) = 1
    CHECK_THROWS_AS(integrate_delayed_flow(problem, x0, 1.0, 1.0, 2.0, 1e-3, constant_delay(1.0)),
                    std::invalid_argument);
    // dt too coarse for the delay window
    CHECK_THROWS_AS(integrate_delayed_flow(problem, x0, 0.5, 1.0, 2.0, 0.5, constant_delay(1.0)),
                    std::invalid_argument);
    // profile escaping [0, c]
    CHECK_THROWS_AS(integrate_delayed_flow(problem, x0, 0.5, 1.0, 2.0, 1e-3, constant_delay(2.0)),
                    std::invalid_argument);
}
