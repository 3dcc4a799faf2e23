// Acceptance gate: one pass/fail line per criterion.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <vector>

#include "abcd/abcd.hpp"

using namespace abcd;

namespace {

int g_failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> uniform_blocks(int N, std::int64_t K, std::mt19937_64& rng) {
    BlockSampler sampler(N);
    std::vector<int> seq(K);
    for (auto& b : seq) b = sampler.sample(rng);
    return seq;
}

Vector constant_x0(int dim, double v) { return Vector::Constant(dim, v); }

// --- 1: pathwise xi-descent across problems, delays, step sizes, seeds ------
void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<ProblemInstance> problems;
    {
        ProblemSpec ps;
        ps.kind = "quadratic";
        ps.dim = 2;
        ps.num_blocks = 2;
        ps.seed = 11;
        problems.push_back(build_problem(ps));
        ps.dim = 50;
        ps.num_blocks = 10;
        ps.seed = 12;
        problems.push_back(build_problem(ps));
        ps.kind = "logistic";
        ps.dim = 10;
        ps.num_blocks = 5;
        ps.samples = 200;
        ps.lambda = 0.1;
        ps.seed = 13;
        problems.push_back(build_problem(ps));
    }
    const std::int64_t K = 10000;
    bool ok = true;
    std::string detail;
    for (const auto& problem : problems) {
        for (int tau : {1, 2, 5}) {
            for (double c : {0.5, 0.9}) {
                double gamma = gamma_bounded(tau, c);
                double eps = epsilon_bounded(gamma, tau);
                for (std::uint64_t seed = 1; seed <= 10 && ok; ++seed) {
                    std::mt19937_64 rng(seed);
                    auto seq = uniform_blocks(problem.num_blocks(), K, rng);
                    EventTrace trace = inject_delays(seq, problem.num_blocks(), BoundedDelay{tau}, rng);
                    RunRecord rec = run(problem, trace, BoundedFixedPolicy{tau, c},
                                        constant_x0(problem.dim(), 1.5), -1, false);
                    auto rep = lyapunov_xi(rec, tau, eps, gamma, problem.lipschitz_L);
                    for (std::size_t k = 0; k < rep.slack.size(); ++k) {
                        if (rep.slack[k] < -1e-9 * (1.0 + std::abs(rep.series[k]))) {
                            ok = false;
                            detail = problem.name + " tau=" + std::to_string(tau) + " c=" + std::to_string(c) +
                                     " seed=" + std::to_string(seed) + " k=" + std::to_string(k);
                            break;
                        }
                    }
                }
            }
        }
    }
    double dt = seconds_since(t0);
    bool in_time = dt < 60.0;
    if (!in_time) detail = "runtime " + std::to_string(dt) + "s";
    report(1, "xi-descent pathwise, 3 problems x tau{1,2,5} x c{0.5,0.9} x 10 seeds, 1e4 steps",
           ok && in_time, detail);
}

// --- 2: pathwise H-descent under delay spikes up to 50 ----------------------
void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    ProblemSpec ps;
    ps.kind = "quadratic";
    ps.dim = 8;
    ps.num_blocks = 4;
    ps.seed = 21;
    auto problem = build_problem(ps);
    std::mt19937_64 rng(2);
    const std::int64_t K = 10000;
    auto seq = uniform_blocks(4, K, rng);
    EventTrace trace =
        inject_delays(seq, 4, DeterministicDelay{{0, 1, 2, 0, 3, 1, 50, 0, 2, 1}, true}, rng);
    EpsilonSpec eps = EpsilonSpec::inverse_square();
    RunRecord rec = run(problem, trace, DelayAdaptivePolicy{eps, 0.5}, constant_x0(8, 2.0), -1, false);
    auto rep = lyapunov_H(rec, eps, problem.lipschitz_L);
    bool ok = rep.min_slack >= -1e-9;
    bool in_time = seconds_since(t0) < 60.0;
    report(2, "H-descent pathwise, deterministic spikes to 50, adaptive step, 1e4 steps", ok && in_time,
           "min slack " + std::to_string(rep.min_slack));
}

// --- 3: ensemble G-descent, geometric tail q=1/2, gamma=0.2 -----------------
void criterion_3() {
    auto t0 = std::chrono::steady_clock::now();
    auto pmf = geometric_delay_pmf(0.5, 64);
    auto tail = tail_moments(pmf);
    bool c0_ok = std::abs(tail.c0 - 4.0) < 1e-9;

    auto problem = make_quadratic(Matrix::Identity(4, 4), Vector::Zero(4), 2);
    const double c = 0.5;  // gamma = 2c/(2 sqrt(4)+1) = 0.2
    double gamma = gamma_stochastic_unbounded(tail.c0, c);
    auto co = unbounded_coefficients(2, problem.lipschitz_L, tail.c0, gamma);
    const std::int64_t K = 1000;
    const int n_seeds = 100;
    std::vector<std::vector<double>> slacks;
    for (int s = 1; s <= n_seeds; ++s) {
        std::mt19937_64 rng(s);
        auto seq = uniform_blocks(2, K, rng);
        EventTrace trace = inject_delays(seq, 2, StochasticTailDelay{pmf, 64}, rng);
        RunRecord rec =
            run(problem, trace, StochasticUnboundedFixedPolicy{tail.c0, c}, constant_x0(4, 1.0), -1, false);
        slacks.push_back(lyapunov_G(rec, tail, co).slack);
    }
    std::int64_t violations = 0;
    std::int64_t first_bad = -1;
    for (std::int64_t k = 0; k < K; ++k) {
        double m = 0.0;
        for (const auto& s : slacks) m += s[k];
        m /= n_seeds;
        double var = 0.0;
        for (const auto& s : slacks) var += (s[k] - m) * (s[k] - m);
        double se = std::sqrt(var / (n_seeds - 1.0) / n_seeds);
        if (m < -3.0 * se) {
            ++violations;
            if (first_bad < 0) first_bad = k;
        }
    }
    bool ok = c0_ok && violations == 0;
    bool in_time = seconds_since(t0) < 300.0;
    report(3, "G-descent ensemble mean >= 0.625 R(k) - 3 SE, 100 seeds, k <= 1e3", ok && in_time,
           "c0 err " + std::to_string(std::abs(tail.c0 - 4.0)) + ", " + std::to_string(violations) +
               " of 1000 k violated (first k=" + std::to_string(first_bad) + ")");
}

// --- 4: sublinear rate on a convex coercive problem -------------------------
ProblemInstance quartic_problem(int dim, int blocks) {
    // f(x) = sum_j x_j^4 / 4: convex, coercive, not strongly convex at 0.
    // Gradient Lipschitz with L = 3 on the invariant region |x_j| <= 1.
    ProblemInstance p;
    p.partition = BlockPartition::equal_blocks(dim, blocks);
    p.lipschitz_L = 3.0;
    p.convexity_class = Convexity::convex;
    p.optimal_value = 0.0;
    p.objective = [](const Vector& x) {
        double s = 0.0;
        for (int j = 0; j < x.size(); ++j) s += 0.25 * x[j] * x[j] * x[j] * x[j];
        return s;
    };
    p.gradient = [](const Vector& x) {
        Vector g(x.size());
        for (int j = 0; j < x.size(); ++j) g[j] = x[j] * x[j] * x[j];
        return g;
    };
    p.name = "quartic";
    return p;
}

void criterion_4() {
    auto problem = quartic_problem(8, 4);
    const std::int64_t K = 10000;
    const int n_seeds = 20;
    std::vector<double> mean_gap(K, 0.0);
    for (int s = 1; s <= n_seeds; ++s) {
        std::mt19937_64 rng(100 + s);
        auto seq = uniform_blocks(4, K, rng);
        EventTrace trace = inject_delays(seq, 4, BoundedDelay{2}, rng);
        std::uniform_real_distribution<double> u(0.5, 1.0);
        Vector x0(8);
        for (int i = 0; i < 8; ++i) x0[i] = u(rng);
        RunRecord rec = run(problem, trace, BoundedFixedPolicy{2, 0.5}, x0, -1, false);
        for (std::int64_t k = 0; k < K; ++k) mean_gap[k] += rec.rows[k].f / n_seeds;
    }
    RateFit fit = fit_rates(mean_gap, 1000, K);
    report(4, "sublinear rate: convex coercive, tau=2, 20 seeds, log-log slope on [1e3,1e4] <= -0.9",
           fit.loglog_slope <= -0.9, "slope " + std::to_string(fit.loglog_slope));
}

// --- 5: linear rate on a nu=1 quadratic, bounded and geometric delays -------
void criterion_5() {
    auto problem = make_quadratic(Matrix::Identity(8, 8), Vector::Zero(8), 8);
    const std::int64_t K = 2000;
    const int n_seeds = 20;
    auto ensemble_gap = [&](const std::function<EventTrace(std::mt19937_64&)>& mk_trace,
                            const StepPolicy& pol) {
        std::vector<double> gap(K, 0.0);
        for (int s = 1; s <= n_seeds; ++s) {
            std::mt19937_64 rng(500 + s);
            EventTrace trace = mk_trace(rng);
            RunRecord rec = run(problem, trace, pol, constant_x0(8, 1.0), -1, false);
            for (std::int64_t k = 0; k < K; ++k) gap[k] += rec.rows[k].f / n_seeds;
        }
        return fit_rates(gap, 50, 500);
    };
    RateFit bounded = ensemble_gap(
        [&](std::mt19937_64& rng) {
            auto seq = uniform_blocks(8, K, rng);
            return inject_delays(seq, 8, BoundedDelay{2}, rng);
        },
        BoundedFixedPolicy{2, 0.5});
    auto pmf = geometric_delay_pmf(0.5, 64);
    RateFit geo = ensemble_gap(
        [&](std::mt19937_64& rng) {
            auto seq = uniform_blocks(8, K, rng);
            return inject_delays(seq, 8, StochasticTailDelay{pmf, 64}, rng);
        },
        StochasticUnboundedFixedPolicy{4.0, 0.5});
    bool ok = bounded.r_squared >= 0.99 && bounded.linear_factor < 1.0 && geo.r_squared >= 0.99 &&
              geo.linear_factor < 1.0;
    report(5, "linear rate: nu=1 quadratic, exponential fit r2 >= 0.99, factor < 1 (bounded & geometric)",
           ok,
           "bounded r2=" + std::to_string(bounded.r_squared) + " f=" + std::to_string(bounded.linear_factor) +
               "; geometric r2=" + std::to_string(geo.r_squared) + " f=" + std::to_string(geo.linear_factor));
}

// --- 6: nonconvex gradient vanishing under both block rules -----------------
void criterion_6() {
    auto problem = make_nonconvex_test(8, 8);
    const std::int64_t K = 100000;
    bool ok = true;
    std::string detail;
    for (const std::string rule : {"stochastic", "cyclic"}) {
        std::mt19937_64 rng(61);
        std::vector<int> seq(K);
        if (rule == "cyclic")
            for (std::int64_t k = 0; k < K; ++k) seq[k] = static_cast<int>(k % 8);
        else
            seq = uniform_blocks(8, K, rng);
        EventTrace trace = inject_delays(seq, 8, BoundedDelay{1}, rng);
        RunRecord rec = run(problem, trace, BoundedFixedPolicy{1, 0.9}, constant_x0(8, 1.0));
        double initial = rec.rows[0].grad_norm;
        double trailing = 0.0;
        const std::int64_t W = 1000;
        for (std::int64_t k = K - W; k < K; ++k) trailing += rec.rows[k].grad_norm / W;
        bool vanish = trailing <= 1e-4 * initial;

        std::vector<double> gnorm(K);
        for (std::int64_t k = 0; k < K; ++k) gnorm[k] = rec.rows[k].grad_norm;
        auto rb = running_best_series(gnorm);
        bool monotone_tail = true;
        for (std::int64_t k = K / 10 + 1; k < K; ++k)
            if (rb[k] > rb[k - 1] + 1e-15) monotone_tail = false;
        if (!(vanish && monotone_tail)) {
            ok = false;
            detail = rule + ": trailing/initial " + std::to_string(trailing / initial);
        }
    }
    report(6, "nonconvex gradient vanishing at 1e5 steps, both block rules, running-best o(1/sqrt k)", ok,
           detail);
}

// --- 7: Example-1 reachability, enumeration + randomized simulation ---------
void criterion_7() {
    Example1Report rep = enumerate_example1();
    bool enum_ok = !rep.reachable_pair(1, 0);
    bool sim_ok = true;
    AgentModel m;
    m.num_agents = 2;
    m.num_blocks = 3;
    m.block_cost = {2.0, 3.0, 4.0};
    for (std::uint64_t seed = 1; seed <= 1000 && sim_ok; ++seed) {
        EventTrace tr = simulate(m, 2, seed);
        if (tr.records[0].block == 1 && tr.records[1].block == 0) sim_ok = false;
        if (!rep.reachable_pair(tr.records[0].block, tr.records[1].block)) sim_ok = false;
    }
    report(7, "middle-cost-then-cheapest first pair unreachable (enumeration + 1e3 simulations)",
           enum_ok && sim_ok);
}

// --- 8: measured delay grows with block cost --------------------------------
void criterion_8() {
    auto problem = make_quadratic(Matrix::Identity(8, 8), Vector::Zero(8), 2);
    RuntimeConfig cfg;
    cfg.n_workers = 4;
    cfg.policy = BoundedFixedPolicy{8, 0.5};
    cfg.update_budget = 8000;
    cfg.cost_multiplier = {1.0, 10.0};
    cfg.spin_iters = 3000;
    int wins = 0;
    std::string means;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.seed = seed;
        MeasuredRun mr = run_shared(problem, cfg, constant_x0(8, 2.0));
        auto stats = delay_stats(mr.trace);
        if (stats[1].mean > stats[0].mean) ++wins;
        means += "(" + std::to_string(stats[0].mean) + "," + std::to_string(stats[1].mean) + ") ";
    }
    report(8, "parallel runtime: expensive block's mean delay exceeds cheap block's in 5/5 runs", wins == 5,
           means);
}

// --- 9: delayed ODE energy nonincreasing ------------------------------------
void criterion_9() {
    bool ok = true;
    std::string detail;
    for (int dim : {1, 10}) {
        auto problem = make_quadratic(Matrix::Identity(dim, dim), Vector::Zero(dim), dim);
        Vector x0 = Vector::Constant(dim, 1.5);
        const double L = 1.0, c = 1.0;
        const double eta = 0.5 / (L * c);
        for (int profile = 0; profile < 2; ++profile) {
            DelayProfile d = profile == 0 ? constant_delay(c) : sawtooth_delay(c, 2.5);
            auto res = integrate_delayed_flow(problem, x0, eta, c, 8.0, 1e-3, d);
            if (!res.monotone) {
                ok = false;
                detail = "dim " + std::to_string(dim) + (profile == 0 ? " constant" : " sawtooth") +
                         " max increase " + std::to_string(res.max_increase);
            }
        }
    }
    report(9, "delayed ODE energy nonincreasing (1-D & 10-D, constant & sawtooth, dt=1e-3)", ok, detail);
}

// --- 10: oracle suites ------------------------------------------------------
double bisect(double lo, double hi, const std::function<double(double)>& g) {
    double flo = g(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = g(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void criterion_10() {
    std::mt19937_64 rng(1010);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> upos(0.05, 20.0);
    auto rand_vec = [&](int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        return v;
    };
    bool ineq_ok = true;
    for (int t = 0; t < 10000 && ineq_ok; ++t) {
        int n = 1 + static_cast<int>(rng() % 10);
        Vector a = rand_vec(n), b = rand_vec(n);
        double e = upos(rng);
        if (a.dot(b) > e * a.squaredNorm() + (1.0 / e) * b.squaredNorm() + 1e-12) ineq_ok = false;
        if (a.dot(b) > a.norm() * b.norm() + 1e-12) ineq_ok = false;
        int M = 1 + static_cast<int>(rng() % 6);
        Vector sum = Vector::Zero(n);
        double sq = 0.0;
        for (int i = 0; i < M; ++i) {
            Vector x = rand_vec(n);
            sum += x;
            sq += x.squaredNorm();
        }
        if (sum.squaredNorm() > M * sq + 1e-12) ineq_ok = false;
        // ||d^k|| <= sum of step norms over the delay window
        int jk = static_cast<int>(rng() % 6);
        Vector d = Vector::Zero(n);
        double norms = 0.0;
        for (int i = 0; i < jk; ++i) {
            Vector step = rand_vec(n);
            d += step;
            norms += step.norm();
        }
        if (d.norm() > norms + 1e-12) ineq_ok = false;
    }

    bool formula_ok = true;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)); };
    for (int tau : {1, 2, 5})
        for (double c : {0.3, 0.5, 0.9}) {
            double gamma = gamma_bounded(tau, c);
            if (!close(gamma, 2.0 * c / (2.0 * tau + 1.0))) formula_ok = false;
            double B = 1.0 + (1.0 / tau) * (1.0 / gamma - 0.5);
            double eps_oracle = bisect(1e-12, 1.0, [B](double e) { return e + 1.0 / e - B; });
            auto co = bounded_coefficients(4, 2.0, tau, gamma);
            if (!close(co.eps, eps_oracle)) formula_ok = false;
            double margin = 1.0 / gamma - 0.5 - tau;
            double delta = (1.0 + (eps_oracle / (2.0 * tau)) * margin) * 2.0 / (2.0 * eps_oracle);
            double beta = std::max(8.0 * 4 * 4.0 / (gamma * gamma), (12.0 * 4 + 2.0) * 4.0 * tau + delta * tau);
            if (!close(co.delta, delta)) formula_ok = false;
            if (!close(co.beta, beta)) formula_ok = false;
            if (!close(co.alpha, beta / ((2.0 / (4.0 * tau)) * margin))) formula_ok = false;
        }
    for (double c0 : {1.0, 4.0})
        for (double c : {0.2, 0.5}) {
            double gamma = gamma_stochastic_unbounded(c0, c);
            double r = 1.0 / gamma - 0.5;
            double eps_oracle = bisect(1e-12, std::sqrt(c0), [r, c0](double e) { return 0.5 * (e + c0 / e) - r; });
            auto co = unbounded_coefficients(4, 2.0, c0, gamma);
            if (!close(co.eps, eps_oracle)) formula_ok = false;
            double dbar = 2.0 / (2.0 * eps_oracle) + r * 2.0 / c0 - 2.0 / std::sqrt(c0);
            if (!close(co.delta_bar, dbar)) formula_ok = false;
        }
    // D_j against brute-force kappa_1 + partial sums
    {
        EpsilonSpec inv = EpsilonSpec::inverse_square();
        double kappa1 = 0.0;
        for (int j = 3000000; j >= 1; --j) kappa1 += 1.0 / (static_cast<double>(j) * j);
        for (int j = 0; j <= 6; ++j) {
            double d = 0.5 + kappa1 / 2.0;
            for (int i = 1; i <= j; ++i) d += 0.5 * static_cast<double>(i) * i;
            if (std::abs(d_sequence(inv, j) - d) > 1e-6) formula_ok = false;
        }
        EpsilonSpec geo = EpsilonSpec::geometric(0.5);
        for (int j = 0; j <= 10; ++j)
            if (!close(d_sequence(geo, j), std::pow(2.0, j))) formula_ok = false;
    }

    bool grad_ok = true;
    {
        ProblemSpec ps;
        ps.kind = "quadratic";
        ps.dim = 8;
        ps.num_blocks = 4;
        ps.seed = 14;
        std::vector<ProblemInstance> problems;
        problems.push_back(build_problem(ps));
        ps.kind = "logistic";
        ps.samples = 100;
        ps.lambda = 0.1;
        problems.push_back(build_problem(ps));
        ps.kind = "nonconvex";
        problems.push_back(build_problem(ps));
        problems.push_back(quartic_problem(8, 4));
        for (const auto& p : problems)
            for (int t = 0; t < 25; ++t) {
                Vector x = rand_vec(p.dim());
                Vector ex = full_grad(p, x), fd = finite_difference_grad(p, x);
                if ((ex - fd).norm() > 1e-5 * std::max(1.0, ex.norm())) grad_ok = false;
            }
    }
    report(10, "oracle suites: tool inequalities (1e4 instances), formula oracles to 1e-10, finite diffs",
           ineq_ok && formula_ok && grad_ok,
           std::string(ineq_ok ? "" : "inequalities ") + (formula_ok ? "" : "formulas ") +
               (grad_ok ? "" : "gradients"));
}

// --- 11: no-concurrency equivalence -----------------------------------------
void criterion_11() {
    bool ok = true;
    std::string detail;
    {
        auto problem = make_quadratic(Matrix::Identity(6, 6), Vector::Ones(6), 3);
        RuntimeConfig cfg;
        cfg.n_workers = 1;
        cfg.policy = BoundedFixedPolicy{2, 0.5};
        cfg.update_budget = 2000;
        cfg.seed = 3;
        Vector x0 = constant_x0(6, 2.0);
        MeasuredRun mr = run_shared(problem, cfg, x0);
        RunRecord rec = run(problem, mr.trace, cfg.policy, x0, -1, false);
        for (int i = 0; i < 6; ++i)
            if (rec.x_final[i] != mr.x_final[i]) ok = false;
        if (!ok) detail = "solver vs single-worker runtime differ";
    }
    {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> g(0.0, 1.0);
        Matrix A(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) A(i, j) = g(rng);
        Matrix M = A.transpose() * A;
        Matrix Q = 0.5 * (M + Matrix(M.transpose()));
        Vector b(5);
        for (int i = 0; i < 5; ++i) b[i] = g(rng);
        auto problem = make_quadratic(Q, b, 1);
        const std::int64_t K = 200;
        std::mt19937_64 rng2(1);
        EventTrace trace = inject_delays(std::vector<int>(K, 0), 1, DeterministicDelay{{0}, true}, rng2);
        RunRecord rec = run(problem, trace, BoundedFixedPolicy{1, 0.5}, Vector::Ones(5), -1, false);
        // reference synchronous gradient descent
        const double scale = (1.0 / 3.0) / problem.lipschitz_L;
        Vector x = Vector::Ones(5);
        for (std::int64_t k = 0; k < K; ++k) {
            Vector grad = Q * x - b;
            for (int i = 0; i < 5; ++i) x[i] += -scale * grad[i];
        }
        for (int i = 0; i < 5; ++i)
            if (rec.x_final[i] != x[i]) ok = false;
        if (!ok && detail.empty()) detail = "zero-delay run vs synchronous reference differ";
    }
    report(11, "no-concurrency equivalence: runtime/solver and zero-delay/synchronous, bitwise", ok, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("%d of 11 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
