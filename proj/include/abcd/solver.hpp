#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcd/policy.hpp"
#include "abcd/problem.hpp"
#include "abcd/trace.hpp"

namespace abcd {

// Full iterate history is kept: delayed-iterate reconstruction for unbounded
// delays and the history-weighted Lyapunov functions need all past steps.
// Desk-scale horizons keep O(K * dim) storage acceptable.
struct SolverState {
    std::vector<Vector> history;  // history[i] = x^i, i = 0..k
    std::int64_t k = 0;

    const Vector& x() const { return history.back(); }
};

inline SolverState make_state(const Vector& x0) {
    SolverState s;
    s.history.push_back(x0);
    s.k = 0;
    return s;
}

// x-hat per the delay vector: block i taken from iterate k - j(k,i),
// clamped at 0 (pre-history is x^0).
inline Vector reconstruct_delayed_iterate(const SolverState& state, const BlockPartition& partition,
                                          const std::vector<int>& j_vec) {
    if (static_cast<int>(j_vec.size()) != partition.num_blocks())
        throw std::invalid_argument("reconstruct_delayed_iterate: j_vec length mismatch");
    Vector xhat(partition.total_dim());
    for (int i = 0; i < partition.num_blocks(); ++i) {
        std::int64_t src = state.k - j_vec[i];
        if (src < 0) src = 0;
        if (src >= static_cast<std::int64_t>(state.history.size()))
            throw std::runtime_error("reconstruct_delayed_iterate: insufficient history");
        const BlockRange& b = partition.block(i);
        xhat.segment(b.begin, b.size()) = state.history[src].segment(b.begin, b.size());
    }
    return xhat;
}

struct StepResult {
    Vector delta;       // supported on block i_k only (block-local slice)
    double gamma = 0.0;
    double delta_norm = 0.0;
    double d_norm = 0.0;  // ||x^k - x-hat^k||
};

// One async-BCD update: x^{k+1}_{i_k} = x^k_{i_k} - (gamma_k / L) grad_{i_k} f(x-hat^k).
inline StepResult step(SolverState& state, const ProblemInstance& problem, int i_k,
                       const std::vector<int>& j_vec, const StepPolicy& policy) {
    if (i_k < 0 || i_k >= problem.num_blocks()) throw std::out_of_range("step: block index");
    int current = 0;
    for (int v : j_vec) current = std::max(current, v);
    const double gamma = step_size(policy, current);

    Vector xhat = reconstruct_delayed_iterate(state, problem.partition, j_vec);
    Vector g = grad_block(problem, xhat, i_k);

    const BlockRange& b = problem.partition.block(i_k);
    Vector x_next = state.x();
    StepResult res;
    res.gamma = gamma;
    res.delta.resize(b.size());
    const double scale = gamma / problem.lipschitz_L;
    for (int c = 0; c < b.size(); ++c) {
        double d = -scale * g[c];
        res.delta[c] = d;
        x_next[b.begin + c] += d;
    }
    res.delta_norm = res.delta.norm();
    res.d_norm = (state.x() - xhat).norm();
    state.history.push_back(std::move(x_next));
    state.k += 1;
    return res;
}

struct RunRow {
    std::int64_t k = 0;
    int block = 0;
    int j_max = 0;
    double gamma = 0.0;
    double f = 0.0;          // f(x^k), before the update
    double grad_norm = 0.0;  // ||grad f(x^k)||
    double delta_norm = 0.0;
    double d_norm = 0.0;
};

struct RunRecord {
    std::vector<RunRow> rows;
    double f_final = 0.0;
    double grad_norm_final = 0.0;
    Vector x_final;
    std::vector<Vector> iterate_history;   // x^0..x^K
    std::vector<double> delta_sq;          // ||Delta^k||^2, k = 0..K-1
    std::string problem_name;
};

// Replays a trace through the solver; deterministic given inputs.
inline RunRecord run(const ProblemInstance& problem, const EventTrace& trace, const StepPolicy& policy,
                     const Vector& x0, std::int64_t horizon = -1, bool record_gradients = true) {
    if (horizon < 0) horizon = trace.horizon();
    if (horizon > trace.horizon()) throw std::invalid_argument("run: trace shorter than horizon");
    if (x0.size() != problem.dim()) throw std::invalid_argument("run: x0 dimension mismatch");

    SolverState state = make_state(x0);
    RunRecord rec;
    rec.rows.reserve(horizon);
    rec.delta_sq.reserve(horizon);
    rec.problem_name = problem.name;
    for (std::int64_t k = 0; k < horizon; ++k) {
        const TraceRecord& tr = trace.records[k];
        RunRow row;
        row.k = k;
        row.block = tr.block;
        row.j_max = trace.current_delay(k);
        row.f = eval(problem, state.x());
        if (record_gradients) row.grad_norm = full_grad(problem, state.x()).norm();
        StepResult sr = step(state, problem, tr.block, tr.j_vec, policy);
        row.gamma = sr.gamma;
        row.delta_norm = sr.delta_norm;
        row.d_norm = sr.d_norm;
        rec.delta_sq.push_back(sr.delta_norm * sr.delta_norm);
        rec.rows.push_back(row);
    }
    rec.x_final = state.x();
    rec.f_final = eval(problem, rec.x_final);
    if (record_gradients) rec.grad_norm_final = full_grad(problem, rec.x_final).norm();
    rec.iterate_history = std::move(state.history);
    return rec;
}

inline void write_run_csv(const RunRecord& rec, std::ostream& out) {
    out << "k,i_k,j_max,gamma_k,f,grad_norm,delta_norm,d_norm\n";
    out << std::setprecision(17);
    for (const auto& r : rec.rows)
        out << r.k << ',' << r.block << ',' << r.j_max << ',' << r.gamma << ',' << r.f << ','
            << r.grad_norm << ',' << r.delta_norm << ',' << r.d_norm << "\n";
}

inline void write_run_csv_file(const RunRecord& rec, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("run record: cannot open " + path);
    write_run_csv(rec, f);
}

}  // namespace abcd
