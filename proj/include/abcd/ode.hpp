#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "abcd/problem.hpp"

namespace abcd {

// Delay profile d(t) for the continuous-time model, with values in [0, c].
using DelayProfile = std::function<double(double)>;

inline DelayProfile constant_delay(double d) {
    return [d](double) { return d; };
}

// Ramps 0 -> amplitude over each period, then drops back.
inline DelayProfile sawtooth_delay(double amplitude, double period) {
    if (period <= 0) throw std::invalid_argument("sawtooth_delay: period > 0");
    return [amplitude, period](double t) { return amplitude * std::fmod(t, period) / period; };
}

struct FlowResult {
    std::vector<Vector> trajectory;  // x(t_n), n = 0..T/dt
    std::vector<double> xi;          // discretized energy at t_n
    std::vector<double> f_values;
    bool monotone = true;        // xi nonincreasing up to 10*dt per step
    double max_increase = 0.0;   // worst per-step energy increase observed
    double energy_weight = 0.0;  // gamma weighting the velocity history
};

// Explicit Euler on dx/dt = -eta grad f(x(t - d(t))), pre-history frozen at
// x0. Energy: f(x(t)) + gamma int_{t-c}^{t} (s - (t-c)) ||dx/dt(s)||^2 ds,
// gamma the midpoint of (eta c L^2 / 2, 1/(2 eta)); requires eta < 1/(L c).
inline FlowResult integrate_delayed_flow(const ProblemInstance& problem, const Vector& x0, double eta,
                                         double c_delay, double T, double dt,
                                         const DelayProfile& delay) {
    const double L = problem.lipschitz_L;
    if (eta <= 0 || c_delay < 0 || dt <= 0 || T <= 0)
        throw std::invalid_argument("integrate_delayed_flow: eta, T, dt > 0 and c_delay >= 0");
    if (c_delay > 0 && eta >= 1.0 / (L * c_delay))
        throw std::invalid_argument("integrate_delayed_flow: need eta < 1/(L c)");
    if (c_delay > 0 && dt > 0.1 * c_delay)
        throw std::invalid_argument("integrate_delayed_flow: dt must resolve the delay window");
    if (x0.size() != problem.dim()) throw std::invalid_argument("integrate_delayed_flow: x0 dimension");

    const double lo = eta * c_delay * L * L / 2.0;
    const double hi = 1.0 / (2.0 * eta);
    FlowResult out;
    out.energy_weight = (lo + hi) / 2.0;

    const std::int64_t steps = static_cast<std::int64_t>(std::llround(T / dt));
    const std::int64_t window = c_delay > 0 ? static_cast<std::int64_t>(std::llround(c_delay / dt)) : 0;

    out.trajectory.reserve(steps + 1);
    out.trajectory.push_back(x0);
    std::vector<Vector> velocity;  // dx/dt on [t_n, t_{n+1})
    velocity.reserve(steps);

    auto energy_at = [&](std::int64_t n) {
        double f = eval(problem, out.trajectory[n]);
        if (window == 0) return f;
        double acc = 0.0;
        // integral over [t_n - c, t_n): velocity is 0 before t = 0
        for (std::int64_t m = n - window; m < n; ++m) {
            if (m < 0) continue;
            double s_weight = (static_cast<double>(m - (n - window)) + 0.5) * dt;  // s - (t - c), midpoint
            acc += s_weight * velocity[m].squaredNorm() * dt;
        }
        return f + out.energy_weight * acc;
    };

    for (std::int64_t n = 0; n < steps; ++n) {
        double t = n * dt;
        double d = delay(t);
        if (d < 0 || d > c_delay + 1e-12)
            throw std::invalid_argument("integrate_delayed_flow: delay profile outside [0, c]");
        std::int64_t src = n - static_cast<std::int64_t>(std::llround(d / dt));
        if (src < 0) src = 0;
        Vector g = full_grad(problem, out.trajectory[src]);
        velocity.push_back(-eta * g);
        out.trajectory.push_back(out.trajectory[n] + dt * velocity.back());
    }

    out.xi.resize(steps + 1);
    out.f_values.resize(steps + 1);
    for (std::int64_t n = 0; n <= steps; ++n) {
        out.xi[n] = energy_at(n);
        out.f_values[n] = eval(problem, out.trajectory[n]);
    }
    const double tol = 10.0 * dt;
    for (std::int64_t n = 0; n < steps; ++n) {
        double inc = out.xi[n + 1] - out.xi[n];
        out.max_increase = std::max(out.max_increase, inc);
        if (inc > tol) out.monotone = false;
    }
    return out;
}

}  // namespace abcd
