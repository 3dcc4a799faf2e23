#pragma once

#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcd/delays.hpp"
#include "abcd/parallel.hpp"
#include "abcd/policy.hpp"
#include "abcd/problem.hpp"
#include "abcd/simulator.hpp"

namespace abcd {

using Json = nlohmann::json;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error("config: " + path + ": " + what) {}
};

namespace detail {
inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError(path + "." + key, "missing field");
    return j.at(key);
}
template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}
}  // namespace detail

// ---- problem ----------------------------------------------------------------

struct ProblemSpec {
    std::string kind = "quadratic";  // quadratic | logistic | nonconvex
    int dim = 2;
    int num_blocks = 2;
    std::uint64_t seed = 1;         // generator seed for random instances
    double condition = 10.0;        // quadratic: lambda_max / lambda_min
    bool singular = false;          // quadratic: zero out half the spectrum
    int samples = 200;              // logistic
    double lambda = 0.0;            // logistic ridge term
};

inline void to_json(Json& j, const ProblemSpec& s) {
    j = Json{{"kind", s.kind},     {"dim", s.dim},           {"num_blocks", s.num_blocks},
             {"seed", s.seed},     {"condition", s.condition}, {"singular", s.singular},
             {"samples", s.samples}, {"lambda", s.lambda}};
}

inline void from_json(const Json& j, ProblemSpec& s) {
    s.kind = detail::require(j, "kind", "problem").get<std::string>();
    s.dim = detail::require(j, "dim", "problem").get<int>();
    s.num_blocks = detail::get_or(j, "num_blocks", s.dim);
    s.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
    s.condition = detail::get_or(j, "condition", 10.0);
    s.singular = detail::get_or(j, "singular", false);
    s.samples = detail::get_or(j, "samples", 200);
    s.lambda = detail::get_or(j, "lambda", 0.0);
    if (s.kind != "quadratic" && s.kind != "logistic" && s.kind != "nonconvex")
        throw ConfigError("problem.kind", "unknown kind '" + s.kind + "'");
    if (s.dim < 1) throw ConfigError("problem.dim", "must be >= 1");
    if (s.num_blocks < 1 || s.num_blocks > s.dim) throw ConfigError("problem.num_blocks", "must be in [1, dim]");
}

// Random instance construction, fully determined by the spec.
inline ProblemInstance build_problem(const ProblemSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (spec.kind == "nonconvex") return make_nonconvex_test(spec.dim, spec.num_blocks);
    if (spec.kind == "quadratic") {
        const int n = spec.dim;
        Matrix G(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
        Eigen::HouseholderQR<Matrix> qr(G);
        Matrix U = qr.householderQ();
        Vector evals(n);
        for (int i = 0; i < n; ++i) {
            double t = n > 1 ? static_cast<double>(i) / (n - 1) : 1.0;
            evals[i] = 1.0 / spec.condition + t * (1.0 - 1.0 / spec.condition);
        }
        if (spec.singular)
            for (int i = 0; i < n / 2; ++i) evals[i] = 0.0;
        Matrix Q = U * evals.asDiagonal() * U.transpose();
        Q = 0.5 * (Q + Q.transpose());  // exact symmetry after float products
        // b in the range of Q so argmin is attained with finite gap
        Vector ones = Vector::Ones(n);
        Vector b = Q * ones;
        return make_quadratic(Q, b, spec.num_blocks);
    }
    // logistic: gaussian features, labels from a noisy linear teacher
    Matrix A(spec.samples, spec.dim);
    for (int m = 0; m < spec.samples; ++m)
        for (int j = 0; j < spec.dim; ++j) A(m, j) = gauss(rng) / std::sqrt(static_cast<double>(spec.dim));
    Vector teacher(spec.dim);
    for (int j = 0; j < spec.dim; ++j) teacher[j] = gauss(rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector y(spec.samples);
    for (int m = 0; m < spec.samples; ++m) {
        double margin = A.row(m).dot(teacher);
        y[m] = (margin + 0.3 * gauss(rng)) >= 0 ? 1.0 : -1.0;
        if (unif(rng) < 0.02) y[m] = -y[m];  // small label noise
    }
    return make_logistic(A, y, spec.lambda, spec.num_blocks);
}

// ---- schedule ---------------------------------------------------------------

struct ScheduleSpec {
    std::string kind = "inject";  // simulate | inject | parallel

    // simulate
    AgentModel agents;

    // inject
    std::string delay_kind = "bounded";  // bounded | geometric | deterministic
    int tau = 1;
    double q = 0.5;  // geometric ratio
    int truncation = 64;
    std::vector<int> j_of_k;  // deterministic sequence, cycled
    std::string block_rule = "uniform";  // uniform | cyclic

    // parallel
    RuntimeConfig runtime;
};

inline void to_json(Json& j, const ScheduleSpec& s) {
    j = Json{{"kind", s.kind}};
    if (s.kind == "simulate") {
        j["num_agents"] = s.agents.num_agents;
        j["block_cost"] = s.agents.block_cost;
        j["cost_jitter"] = s.agents.cost_jitter;
        j["read_duration"] = s.agents.read_duration;
        if (!s.agents.assignment.empty()) j["assignment"] = s.agents.assignment;
    } else if (s.kind == "inject") {
        j["delay_kind"] = s.delay_kind;
        j["block_rule"] = s.block_rule;
        if (s.delay_kind == "bounded") j["tau"] = s.tau;
        if (s.delay_kind == "geometric") {
            j["q"] = s.q;
            j["truncation"] = s.truncation;
        }
        if (s.delay_kind == "deterministic") j["j_of_k"] = s.j_of_k;
    } else {
        j["n_workers"] = s.runtime.n_workers;
        j["update_budget"] = s.runtime.update_budget;
        j["spin_iters"] = s.runtime.spin_iters;
        if (!s.runtime.cost_multiplier.empty()) j["cost_multiplier"] = s.runtime.cost_multiplier;
        if (!s.runtime.assignment.empty()) j["assignment"] = s.runtime.assignment;
    }
}

inline void from_json(const Json& j, ScheduleSpec& s) {
    s.kind = detail::require(j, "kind", "schedule").get<std::string>();
    if (s.kind == "simulate") {
        s.agents.num_agents = detail::require(j, "num_agents", "schedule").get<int>();
        s.agents.block_cost = detail::require(j, "block_cost", "schedule").get<std::vector<double>>();
        s.agents.num_blocks = static_cast<int>(s.agents.block_cost.size());
        s.agents.cost_jitter = detail::get_or(j, "cost_jitter", 0.0);
        s.agents.read_duration = detail::get_or(j, "read_duration", 0.0);
        s.agents.assignment = detail::get_or(j, "assignment", std::vector<std::vector<int>>{});
        s.agents.validate();
    } else if (s.kind == "inject") {
        s.delay_kind = detail::get_or<std::string>(j, "delay_kind", "bounded");
        s.block_rule = detail::get_or<std::string>(j, "block_rule", "uniform");
        if (s.block_rule != "uniform" && s.block_rule != "cyclic")
            throw ConfigError("schedule.block_rule", "unknown rule '" + s.block_rule + "'");
        if (s.delay_kind == "bounded") {
            s.tau = detail::require(j, "tau", "schedule").get<int>();
            if (s.tau < 0) throw ConfigError("schedule.tau", "must be >= 0");
        } else if (s.delay_kind == "geometric") {
            s.q = detail::get_or(j, "q", 0.5);
            s.truncation = detail::get_or(j, "truncation", 64);
            if (s.q <= 0 || s.q >= 1) throw ConfigError("schedule.q", "must be in (0,1)");
        } else if (s.delay_kind == "deterministic") {
            s.j_of_k = detail::require(j, "j_of_k", "schedule").get<std::vector<int>>();
            if (s.j_of_k.empty()) throw ConfigError("schedule.j_of_k", "must be nonempty");
        } else {
            throw ConfigError("schedule.delay_kind", "unknown kind '" + s.delay_kind + "'");
        }
    } else if (s.kind == "parallel") {
        s.runtime.n_workers = detail::require(j, "n_workers", "schedule").get<int>();
        s.runtime.update_budget = detail::require(j, "update_budget", "schedule").get<std::int64_t>();
        s.runtime.spin_iters = detail::get_or<std::int64_t>(j, "spin_iters", 2000);
        s.runtime.cost_multiplier = detail::get_or(j, "cost_multiplier", std::vector<double>{});
        s.runtime.assignment = detail::get_or(j, "assignment", std::vector<std::vector<int>>{});
        if (s.runtime.update_budget < 1) throw ConfigError("schedule.update_budget", "must be positive");
    } else {
        throw ConfigError("schedule.kind", "unknown kind '" + s.kind + "'");
    }
}

inline DelaySpec build_delay_spec(const ScheduleSpec& s) {
    if (s.delay_kind == "bounded") return BoundedDelay{s.tau};
    if (s.delay_kind == "geometric")
        return StochasticTailDelay{geometric_delay_pmf(s.q, s.truncation), s.truncation};
    return DeterministicDelay{s.j_of_k, true};
}

// ---- policy -----------------------------------------------------------------

struct PolicySpec {
    std::string kind = "bounded";  // bounded | unbounded | adaptive
    int tau = 1;
    double c = 0.5;
    double c0 = 1.0;
    std::string eps_kind = "inverse_square";  // inverse_square | geometric | finite
    double eps_ratio = 0.5;
    std::vector<double> eps_values;
};

inline void to_json(Json& j, const PolicySpec& s) {
    j = Json{{"kind", s.kind}, {"c", s.c}};
    if (s.kind == "bounded") j["tau"] = s.tau;
    if (s.kind == "unbounded") j["c0"] = s.c0;
    if (s.kind == "adaptive") {
        j["eps_kind"] = s.eps_kind;
        if (s.eps_kind == "geometric") j["eps_ratio"] = s.eps_ratio;
        if (s.eps_kind == "finite") j["eps_values"] = s.eps_values;
    }
}

inline void from_json(const Json& j, PolicySpec& s) {
    s.kind = detail::require(j, "kind", "policy").get<std::string>();
    s.c = detail::get_or(j, "c", 0.5);
    if (s.c <= 0 || s.c >= 1) throw ConfigError("policy.c", "must be in (0,1)");
    if (s.kind == "bounded") {
        s.tau = detail::require(j, "tau", "policy").get<int>();
        if (s.tau < 1) throw ConfigError("policy.tau", "must be >= 1");
    } else if (s.kind == "unbounded") {
        s.c0 = detail::require(j, "c0", "policy").get<double>();
        if (s.c0 <= 0) throw ConfigError("policy.c0", "must be > 0");
    } else if (s.kind == "adaptive") {
        s.eps_kind = detail::get_or<std::string>(j, "eps_kind", "inverse_square");
        s.eps_ratio = detail::get_or(j, "eps_ratio", 0.5);
        s.eps_values = detail::get_or(j, "eps_values", std::vector<double>{});
        if (s.eps_kind != "inverse_square" && s.eps_kind != "geometric" && s.eps_kind != "finite")
            throw ConfigError("policy.eps_kind", "unknown kind '" + s.eps_kind + "'");
        if (s.eps_kind == "finite" && s.eps_values.empty())
            throw ConfigError("policy.eps_values", "finite eps sequence must be nonempty");
    } else {
        throw ConfigError("policy.kind", "unknown kind '" + s.kind + "'");
    }
}

inline EpsilonSpec build_epsilon(const PolicySpec& s) {
    if (s.eps_kind == "inverse_square") return EpsilonSpec::inverse_square();
    if (s.eps_kind == "geometric") return EpsilonSpec::geometric(s.eps_ratio);
    return EpsilonSpec::finite(s.eps_values);
}

inline StepPolicy build_policy(const PolicySpec& s) {
    if (s.kind == "bounded") return BoundedFixedPolicy{s.tau, s.c};
    if (s.kind == "unbounded") return StochasticUnboundedFixedPolicy{s.c0, s.c};
    return DelayAdaptivePolicy{build_epsilon(s), s.c};
}

// ---- analysis + top level ---------------------------------------------------

struct AnalysisSpec {
    std::vector<std::string> lyapunov;  // subset of {"xi","F","G","H"}
    bool fit_loglog = false;
    bool fit_linear = false;
};

inline void to_json(Json& j, const AnalysisSpec& s) {
    j = Json{{"lyapunov", s.lyapunov}, {"fit_loglog", s.fit_loglog}, {"fit_linear", s.fit_linear}};
}

inline void from_json(const Json& j, AnalysisSpec& s) {
    s.lyapunov = detail::get_or(j, "lyapunov", std::vector<std::string>{});
    s.fit_loglog = detail::get_or(j, "fit_loglog", false);
    s.fit_linear = detail::get_or(j, "fit_linear", false);
    for (const auto& name : s.lyapunov)
        if (name != "xi" && name != "F" && name != "G" && name != "H")
            throw ConfigError("analysis.lyapunov", "unknown function '" + name + "'");
}

struct ExperimentConfig {
    ProblemSpec problem;
    ScheduleSpec schedule;
    PolicySpec policy;
    std::int64_t horizon = 1000;
    std::vector<std::uint64_t> seeds = {1};
    AnalysisSpec analysis;
    std::string out = "out";
};

inline void to_json(Json& j, const ExperimentConfig& c) {
    j = Json{{"problem", c.problem}, {"schedule", c.schedule}, {"policy", c.policy},
             {"horizon", c.horizon}, {"seeds", c.seeds},       {"analysis", c.analysis},
             {"out", c.out}};
}

inline void from_json(const Json& j, ExperimentConfig& c) {
    c.problem = detail::require(j, "problem", "").get<ProblemSpec>();
    c.schedule = detail::require(j, "schedule", "").get<ScheduleSpec>();
    c.policy = detail::require(j, "policy", "").get<PolicySpec>();
    c.horizon = detail::get_or<std::int64_t>(j, "horizon", 1000);
    c.seeds = detail::get_or(j, "seeds", std::vector<std::uint64_t>{1});
    c.analysis = detail::get_or(j, "analysis", AnalysisSpec{});
    c.out = detail::get_or<std::string>(j, "out", "out");
    if (c.horizon < 1) throw ConfigError("horizon", "must be >= 1");
    if (c.seeds.empty()) throw ConfigError("seeds", "must be nonempty");
    // cross-field feasibility
    for (const auto& name : c.analysis.lyapunov) {
        if (name == "G" && !(c.schedule.kind == "inject" && c.schedule.delay_kind == "geometric"))
            throw ConfigError("analysis.lyapunov", "G analysis requires a stochastic-tail schedule");
        if ((name == "xi" || name == "F") && c.policy.kind != "bounded")
            throw ConfigError("analysis.lyapunov", name + " analysis requires the bounded fixed policy");
        if (name == "H" && c.policy.kind != "adaptive")
            throw ConfigError("analysis.lyapunov", "H analysis requires the delay-adaptive policy");
    }
}

inline ExperimentConfig parse_config(const Json& j) { return j.get<ExperimentConfig>(); }

// ---- presets ----------------------------------------------------------------

inline ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    if (name == "example1") {
        c.problem = {"quadratic", 3, 3, 1, 10.0, false, 0, 0.0};
        c.schedule.kind = "simulate";
        c.schedule.agents.num_agents = 2;
        c.schedule.agents.num_blocks = 3;
        c.schedule.agents.block_cost = {2.0, 3.0, 4.0};
        c.policy = PolicySpec{"bounded", 3, 0.5, 1.0, "inverse_square", 0.5, {}};
        c.horizon = 100;
    } else if (name == "bounded") {
        c.problem = {"quadratic", 8, 4, 1, 10.0, false, 0, 0.0};
        c.schedule.kind = "inject";
        c.schedule.delay_kind = "bounded";
        c.schedule.tau = 2;
        c.policy = PolicySpec{"bounded", 2, 0.5, 1.0, "inverse_square", 0.5, {}};
        c.horizon = 5000;
        c.analysis.lyapunov = {"xi", "F"};
        c.analysis.fit_linear = true;
    } else if (name == "geometric") {
        c.problem = {"quadratic", 8, 4, 1, 10.0, false, 0, 0.0};
        c.schedule.kind = "inject";
        c.schedule.delay_kind = "geometric";
        c.schedule.q = 0.5;
        c.schedule.truncation = 64;
        c.policy = PolicySpec{"unbounded", 0, 0.4, 4.0, "inverse_square", 0.5, {}};
        c.horizon = 2000;
        c.analysis.lyapunov = {"G"};
        c.seeds.resize(100);
        for (std::size_t i = 0; i < c.seeds.size(); ++i) c.seeds[i] = i + 1;
    } else if (name == "adaptive-spiky") {
        c.problem = {"quadratic", 8, 4, 1, 10.0, false, 0, 0.0};
        c.schedule.kind = "inject";
        c.schedule.delay_kind = "deterministic";
        c.schedule.j_of_k = {0, 1, 0, 2, 0, 1, 50, 0, 1, 0};
        c.policy = PolicySpec{"adaptive", 0, 0.5, 1.0, "inverse_square", 0.5, {}};
        c.horizon = 10000;
        c.analysis.lyapunov = {"H"};
    } else if (name == "parallel-hetero") {
        c.problem = {"quadratic", 8, 2, 1, 10.0, false, 0, 0.0};
        c.schedule.kind = "parallel";
        c.schedule.runtime.n_workers = 4;
        c.schedule.runtime.update_budget = 20000;
        c.schedule.runtime.cost_multiplier = {1.0, 10.0};
        c.policy = PolicySpec{"bounded", 8, 0.5, 1.0, "inverse_square", 0.5, {}};
        c.horizon = 20000;
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    return c;
}

}  // namespace abcd
