// Experiment runner: simulate / solve / parallel / report / selftest.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "abcd/abcd.hpp"

namespace fs = std::filesystem;
using namespace abcd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInvariant = 3;

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out;
    std::string seeds_csv;
};

ExperimentConfig load_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.preset.empty()) {
        cfg = preset_config(opts.preset);
    } else if (!opts.config_path.empty()) {
        std::ifstream f(opts.config_path);
        if (!f) throw ConfigError(opts.config_path, "cannot open");
        Json j;
        try {
            f >> j;
        } catch (const Json::parse_error& e) {
            throw ConfigError(opts.config_path, e.what());
        }
        cfg = parse_config(j);
    } else {
        throw ConfigError("", "need --config or --preset");
    }
    if (!opts.out.empty()) cfg.out = opts.out;
    if (!opts.seeds_csv.empty()) {
        cfg.seeds.clear();
        std::istringstream ss(opts.seeds_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.seeds.push_back(std::stoull(tok));
        if (cfg.seeds.empty()) throw ConfigError("seeds", "must be nonempty");
    }
    return cfg;
}

std::vector<int> make_block_sequence(const ExperimentConfig& cfg, int num_blocks, std::mt19937_64& rng) {
    std::vector<int> seq(cfg.horizon);
    if (cfg.schedule.block_rule == "cyclic") {
        for (std::int64_t k = 0; k < cfg.horizon; ++k) seq[k] = static_cast<int>(k % num_blocks);
    } else {
        BlockSampler sampler(num_blocks);
        for (std::int64_t k = 0; k < cfg.horizon; ++k) seq[k] = sampler.sample(rng);
    }
    return seq;
}

EventTrace make_trace(const ExperimentConfig& cfg, const ProblemInstance& problem, std::uint64_t seed) {
    if (cfg.schedule.kind == "simulate") {
        AgentModel agents = cfg.schedule.agents;
        if (agents.num_blocks != problem.num_blocks())
            throw ConfigError("schedule.block_cost", "block count must match the problem");
        return simulate(agents, cfg.horizon, seed);
    }
    if (cfg.schedule.kind == "inject") {
        std::mt19937_64 rng(seed);
        auto seq = make_block_sequence(cfg, problem.num_blocks(), rng);
        return inject_delays(seq, problem.num_blocks(), build_delay_spec(cfg.schedule), rng);
    }
    throw ConfigError("schedule.kind", "parallel schedules use the `parallel` subcommand");
}

Vector default_x0(const ProblemInstance& problem, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5deece66dull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector x0(problem.dim());
    for (int i = 0; i < problem.dim(); ++i) x0[i] = 2.0 * gauss(rng);
    return x0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out);
    ProblemInstance problem = build_problem(cfg.problem);
    for (std::uint64_t seed : cfg.seeds) {
        EventTrace trace = make_trace(cfg, problem, seed);
        write_trace_csv_file(trace, cfg.out + "/trace_" + std::to_string(seed) + ".csv");
    }
    // Example-1 companion report when the schedule matches that instance
    if (cfg.schedule.kind == "simulate" && cfg.schedule.agents.num_agents == 2 &&
        cfg.schedule.agents.block_cost == std::vector<double>{2.0, 3.0, 4.0}) {
        Example1Report rep = enumerate_example1();
        Json j;
        j["reachable_first_two"] = Json::array();
        for (auto [a, b] : rep.reachable) j["reachable_first_two"].push_back({a, b});
        j["pair_1_then_0_reachable"] = rep.reachable_pair(1, 0);
        std::ofstream f(cfg.out + "/example1_report.json");
        f << j.dump(2) << "\n";
    }
    std::cout << "simulate: wrote " << cfg.seeds.size() << " trace(s) to " << cfg.out << "\n";
    return kExitOk;
}

int cmd_solve(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out);
    ProblemInstance problem = build_problem(cfg.problem);
    StepPolicy policy = build_policy(cfg.policy);

    bool pathwise_ok = true;
    std::vector<LyapunovReport> g_reports;
    Json summary;
    summary["runs"] = Json::array();

    TailMoments tail;
    UnboundedCoefficients g_co;
    const bool want_g = std::count(cfg.analysis.lyapunov.begin(), cfg.analysis.lyapunov.end(), "G") > 0;
    if (want_g) {
        tail = tail_moments(geometric_delay_pmf(cfg.schedule.q, cfg.schedule.truncation));
        double gamma = gamma_stochastic_unbounded(cfg.policy.c0, cfg.policy.c);
        g_co = unbounded_coefficients(problem.num_blocks(), problem.lipschitz_L, tail.c0, gamma);
    }

    for (std::uint64_t seed : cfg.seeds) {
        EventTrace trace = make_trace(cfg, problem, seed);
        Vector x0 = default_x0(problem, seed);
        RunRecord rec = run(problem, trace, policy, x0);
        std::string tag = std::to_string(seed);
        write_run_csv_file(rec, cfg.out + "/run_" + tag + ".csv");

        Json run_summary;
        run_summary["seed"] = seed;
        run_summary["f_final"] = rec.f_final;
        run_summary["grad_norm_final"] = rec.grad_norm_final;

        for (const auto& name : cfg.analysis.lyapunov) {
            if (name == "xi") {
                double gamma = gamma_bounded(cfg.policy.tau, cfg.policy.c);
                double eps = epsilon_bounded(gamma, cfg.policy.tau);
                auto rep = lyapunov_xi(rec, cfg.policy.tau, eps, gamma, problem.lipschitz_L);
                write_lyapunov_csv_file(rep, cfg.out + "/lyap_xi_" + tag + ".csv");
                run_summary["xi_min_slack"] = rep.min_slack;
                double scale = 1.0;
                for (double v : rep.series) scale = std::max(scale, 1.0 + std::abs(v));
                if (rep.min_slack < -1e-9 * scale) pathwise_ok = false;
            } else if (name == "F") {
                double gamma = gamma_bounded(cfg.policy.tau, cfg.policy.c);
                auto co = bounded_coefficients(problem.num_blocks(), problem.lipschitz_L, cfg.policy.tau, gamma);
                auto rep = lyapunov_F(rec, cfg.policy.tau, co, problem.lipschitz_L);
                write_lyapunov_csv_file(rep, cfg.out + "/lyap_F_" + tag + ".csv");
                run_summary["F_min_slack"] = rep.min_slack;
                double scale = 1.0;
                for (double v : rep.series) scale = std::max(scale, 1.0 + std::abs(v));
                if (rep.min_slack < -1e-9 * scale) pathwise_ok = false;
            } else if (name == "G") {
                auto rep = lyapunov_G(rec, tail, g_co);
                write_lyapunov_csv_file(rep, cfg.out + "/lyap_G_" + tag + ".csv");
                g_reports.push_back(std::move(rep));
            } else if (name == "H") {
                EpsilonSpec eps = build_epsilon(cfg.policy);
                auto rep = lyapunov_H(rec, eps, problem.lipschitz_L);
                write_lyapunov_csv_file(rep, cfg.out + "/lyap_H_" + tag + ".csv");
                run_summary["H_min_slack"] = rep.min_slack;
                double scale = 1.0;
                for (double v : rep.series) scale = std::max(scale, 1.0 + std::abs(v));
                if (rep.min_slack < -1e-9 * scale) pathwise_ok = false;
            }
        }
        summary["runs"].push_back(run_summary);
    }

    // ensemble-mean G descent, reported with its standard error per k
    if (!g_reports.empty()) {
        std::size_t K = g_reports.front().slack.size();
        std::ofstream f(cfg.out + "/lyap_G_ensemble.csv");
        f << "k,mean_slack,stderr\n" << std::setprecision(17);
        std::int64_t violations = 0;
        for (std::size_t k = 0; k < K; ++k) {
            double m = 0.0;
            for (const auto& r : g_reports) m += r.slack[k];
            m /= g_reports.size();
            double var = 0.0;
            for (const auto& r : g_reports) var += (r.slack[k] - m) * (r.slack[k] - m);
            double se = g_reports.size() > 1 ? std::sqrt(var / (g_reports.size() - 1.0) / g_reports.size()) : 0.0;
            if (m < -3.0 * se) ++violations;
            f << k << ',' << m << ',' << se << "\n";
        }
        summary["G_ensemble_violations"] = violations;
    }
    summary["pathwise_descent_ok"] = pathwise_ok;
    std::ofstream f(cfg.out + "/summary.json");
    f << summary.dump(2) << "\n";
    std::cout << "solve: " << cfg.seeds.size() << " run(s), pathwise descent "
              << (pathwise_ok ? "ok" : "VIOLATED") << ", results in " << cfg.out << "\n";
    return pathwise_ok ? kExitOk : kExitInvariant;
}

int cmd_parallel(const ExperimentConfig& cfg) {
    if (cfg.schedule.kind != "parallel")
        throw ConfigError("schedule.kind", "`parallel` needs a parallel schedule");
    fs::create_directories(cfg.out);
    ProblemInstance problem = build_problem(cfg.problem);
    Json summary;
    summary["runs"] = Json::array();
    for (std::uint64_t seed : cfg.seeds) {
        RuntimeConfig rt = cfg.schedule.runtime;
        rt.policy = build_policy(cfg.policy);
        rt.seed = seed;
        Vector x0 = default_x0(problem, seed);
        MeasuredRun mr = run_shared(problem, rt, x0);
        std::string tag = std::to_string(seed);
        write_trace_csv_file(mr.trace, cfg.out + "/measured_" + tag + ".csv", /*measured=*/true);

        double gap = update_integrity_gap(problem, x0, mr);
        if (gap > 1e-12) throw InvariantViolation("lost updates detected, gap " + std::to_string(gap));

        auto stats = delay_stats(mr.trace);
        Json jstats = Json::array();
        for (int b = 0; b < static_cast<int>(stats.size()); ++b) {
            Json h = Json::object();
            for (const auto& [d, n] : stats[b].histogram) h[std::to_string(d)] = n;
            jstats.push_back({{"block", b},
                              {"count", stats[b].count},
                              {"mean_delay", stats[b].mean},
                              {"max_delay", stats[b].max},
                              {"histogram", h}});
        }
        summary["runs"].push_back({{"seed", seed},
                                   {"f_final", eval(problem, mr.x_final)},
                                   {"updates", mr.trace.horizon()},
                                   {"wall_seconds", mr.wall_seconds},
                                   {"delay_stats", jstats}});
    }
    std::ofstream f(cfg.out + "/summary.json");
    f << summary.dump(2) << "\n";
    std::cout << "parallel: " << cfg.seeds.size() << " run(s), results in " << cfg.out << "\n";
    return kExitOk;
}

std::vector<double> read_f_column(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("report: cannot open " + path);
    std::string line;
    std::getline(f, line);  // header
    std::vector<double> vals;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        for (int i = 0; i <= 4; ++i) std::getline(ls, cell, ',');  // f is column 4
        vals.push_back(std::stod(cell));
    }
    return vals;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out) {
    if (dirs.empty()) throw ConfigError("report", "need at least one run directory");
    fs::create_directories(out);
    Json report;
    report["sections"] = Json::array();
    for (const auto& dir : dirs) {
        std::vector<std::vector<double>> curves;
        for (const auto& entry : fs::directory_iterator(dir)) {
            std::string name = entry.path().filename().string();
            if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".csv")
                curves.push_back(read_f_column(entry.path().string()));
        }
        if (curves.empty()) throw std::runtime_error("report: no run_*.csv in " + dir);
        std::size_t K = curves.front().size();
        for (const auto& c : curves)
            if (c.size() != K) throw std::runtime_error("report: inconsistent horizons in " + dir);

        std::vector<double> mean_f(K, 0.0);
        double fstar = std::numeric_limits<double>::infinity();
        for (const auto& c : curves)
            for (std::size_t k = 0; k < K; ++k) {
                mean_f[k] += c[k] / curves.size();
                fstar = std::min(fstar, c[k]);
            }
        // objective value floor from the summary when the problem declares one
        std::ifstream sf(dir + "/summary.json");
        if (sf) {
            Json s;
            sf >> s;
            if (s.contains("optimal_value")) fstar = s["optimal_value"].get<double>();
        }
        std::vector<double> gap(K);
        for (std::size_t k = 0; k < K; ++k) gap[k] = mean_f[k] - fstar;

        {
            std::ofstream gf(out + "/mean_gap_" + fs::path(dir).filename().string() + ".csv");
            gf << "k,mean_f,gap\n" << std::setprecision(17);
            for (std::size_t k = 0; k < K; ++k) gf << k << ',' << mean_f[k] << ',' << gap[k] << "\n";
        }

        Json section;
        section["dir"] = dir;
        section["runs"] = curves.size();
        section["final_mean_gap"] = gap.back();
        try {
            RateFit fit = fit_rates(gap);
            section["loglog_slope"] = fit.loglog_slope;
            section["linear_factor"] = fit.linear_factor;
            section["linear_r2"] = fit.r_squared;
            section["checks"] = {{"sublinear_slope_le_-0.9", fit.loglog_slope <= -0.9},
                                 {"linear_r2_ge_0.99_factor_lt_1",
                                  fit.r_squared >= 0.99 && fit.linear_factor < 1.0}};
        } catch (const std::exception& e) {
            section["fit_error"] = e.what();
        }
        report["sections"].push_back(section);
    }
    std::ofstream f(out + "/report.json");
    f << report.dump(2) << "\n";
    std::cout << "report: " << dirs.size() << " section(s) written to " << out << "/report.json\n";
    return kExitOk;
}

// Quick formula / inequality self-checks; the full suites live in the tests.
int cmd_selftest() {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto rand_vec = [&](int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        return v;
    };
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            std::cout << "selftest FAIL: " << what << "\n";
        }
    };

    std::uniform_real_distribution<double> upos(0.1, 10.0);
    for (int t = 0; t < 10000; ++t) {
        int n = 1 + static_cast<int>(rng() % 8);
        Vector a = rand_vec(n), b = rand_vec(n);
        double e = upos(rng);
        check(a.dot(b) <= e * a.squaredNorm() + (1.0 / e) * b.squaredNorm() + 1e-12, "young");
        check(std::abs(a.dot(b)) <= a.norm() * b.norm() + 1e-12, "cauchy-schwarz");
        int M = 1 + static_cast<int>(rng() % 5);
        Vector sum = Vector::Zero(n);
        double sq = 0.0;
        for (int i = 0; i < M; ++i) {
            Vector x = rand_vec(n);
            sum += x;
            sq += x.squaredNorm();
        }
        check(sum.squaredNorm() <= M * sq + 1e-12, "sum-of-squares");
    }

    // step-size / coefficient formulas against direct substitution
    for (int tau : {1, 2, 5})
        for (double c : {0.3, 0.5, 0.9}) {
            double g = gamma_bounded(tau, c);
            double e = epsilon_bounded(g, tau);
            check(std::abs(e + 1.0 / e - (1.0 + (1.0 / tau) * (1.0 / g - 0.5))) < 1e-10, "eps bounded");
        }
    for (double c0 : {1.0, 4.0})
        for (double c : {0.2, 0.5}) {
            double g = gamma_stochastic_unbounded(c0, c);
            double e = epsilon_unbounded(g, c0);
            check(std::abs(0.5 * (e + c0 / e) - (1.0 / g - 0.5)) < 1e-10, "eps unbounded");
        }
    auto tm = tail_moments(geometric_delay_pmf(0.5, 64));
    check(std::abs(tm.c0 - 4.0) < 1e-9, "geometric c0");

    // gradient oracles agree with finite differences
    for (const std::string kind : {"quadratic", "logistic", "nonconvex"}) {
        ProblemSpec ps;
        ps.kind = kind;
        ps.dim = 6;
        ps.num_blocks = 3;
        ps.samples = 50;
        ps.lambda = 0.1;
        ProblemInstance p = build_problem(ps);
        Vector x = rand_vec(p.dim());
        Vector g = full_grad(p, x), fd = finite_difference_grad(p, x);
        check((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()), kind + " gradient vs finite differences");
    }

    std::cout << (failures == 0 ? "selftest: all checks passed\n"
                                : "selftest: " + std::to_string(failures) + " failure(s)\n");
    return failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"async block coordinate descent experiment runner"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::string> report_dirs;
    std::string report_out = "report";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON experiment config");
        sub->add_option("--preset", opts.preset,
                        "named preset: example1, bounded, geometric, adaptive-spiky, parallel-hetero");
        sub->add_option("--out", opts.out, "output directory (overrides config)");
        sub->add_option("--seeds", opts.seeds_csv, "comma-separated seed list (overrides config)");
    };
    auto* sim = app.add_subcommand("simulate", "generate event traces");
    add_common(sim);
    auto* sol = app.add_subcommand("solve", "replay traces through the solver and analyze");
    add_common(sol);
    auto* par = app.add_subcommand("parallel", "run the shared-memory runtime and measure delays");
    add_common(par);
    auto* rep = app.add_subcommand("report", "consolidate run directories");
    rep->add_option("dirs", report_dirs, "run directories");
    rep->add_option("--out", report_out, "report output directory");
    auto* self = app.add_subcommand("selftest", "formula and inequality self-checks");
    (void)self;

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(load_config(opts));
        if (sol->parsed()) return cmd_solve(load_config(opts));
        if (par->parsed()) return cmd_parallel(load_config(opts));
        if (rep->parsed()) return cmd_report(report_dirs, report_out);
        return cmd_selftest();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InfeasibleStepSize& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InvariantViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
