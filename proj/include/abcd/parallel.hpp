#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "abcd/policy.hpp"
#include "abcd/problem.hpp"
#include "abcd/trace.hpp"

namespace abcd {

struct RuntimeConfig {
    int n_workers = 1;
    // empty: shared pool, every worker draws any block; else one entry per worker.
    std::vector<std::vector<int>> assignment;
    StepPolicy policy = BoundedFixedPolicy{};
    std::int64_t update_budget = 0;
    std::vector<double> cost_multiplier;  // per block; empty = all 1
    std::int64_t spin_iters = 2000;       // busy-spin units per unit of cost
    std::uint64_t seed = 0;

    void validate(int num_blocks) const {
        if (n_workers < 1) throw std::invalid_argument("RuntimeConfig: n_workers >= 1");
        if (update_budget < 1) throw std::invalid_argument("RuntimeConfig: positive update budget");
        if (!assignment.empty()) {
            if (static_cast<int>(assignment.size()) != n_workers)
                throw std::invalid_argument("RuntimeConfig: assignment size mismatch");
            std::vector<bool> covered(num_blocks, false);
            for (const auto& blocks : assignment) {
                if (blocks.empty()) throw std::invalid_argument("RuntimeConfig: worker with no blocks");
                for (int b : blocks) {
                    if (b < 0 || b >= num_blocks) throw std::invalid_argument("RuntimeConfig: block out of range");
                    covered[b] = true;
                }
            }
            for (bool c : covered)
                if (!c) throw std::invalid_argument("RuntimeConfig: every block must be reachable");
        }
        if (!cost_multiplier.empty()) {
            if (static_cast<int>(cost_multiplier.size()) != num_blocks)
                throw std::invalid_argument("RuntimeConfig: cost_multiplier size mismatch");
            for (double m : cost_multiplier)
                if (m < 0) throw std::invalid_argument("RuntimeConfig: cost_multiplier >= 0");
        }
        if (spin_iters < 0) throw std::invalid_argument("RuntimeConfig: spin_iters >= 0");
    }
};

struct MeasuredRun {
    EventTrace trace;            // records carry worker ids; t_* are wall seconds
    Vector x_final;
    std::vector<Vector> deltas;  // block-local increment of update k
    double wall_seconds = 0.0;
};

namespace detail {

// Lock-free add; std::atomic<double>::fetch_add is not available everywhere.
inline void atomic_accumulate(std::atomic<double>& target, double v) {
    double cur = target.load(std::memory_order_relaxed);
    while (!target.compare_exchange_weak(cur, cur + v, std::memory_order_relaxed)) {
    }
}

inline void busy_spin(std::int64_t iters) {
    volatile double sink = 1.0;
    for (std::int64_t i = 0; i < iters; ++i) sink = sink * 1.0000001 + 1e-9;
    (void)sink;
}

}  // namespace detail

// Shared-memory async-BCD. Workers snapshot the global completion counter per
// block while reading the shared vector (coordinate loads are atomic, the
// vector read is deliberately inconsistent), compute the block gradient,
// apply the update as per-coordinate atomic accumulates, and take their
// iteration index from the completion counter. Delays are measured in
// completed updates, snapshot to completion.
inline MeasuredRun run_shared(const ProblemInstance& problem, const RuntimeConfig& config,
                              const Vector& x0) {
    config.validate(problem.num_blocks());
    if (x0.size() != problem.dim()) throw std::invalid_argument("run_shared: x0 dimension mismatch");

    const int N = problem.num_blocks();
    const std::int64_t budget = config.update_budget;
    std::vector<std::atomic<double>> shared(problem.dim());
    for (int i = 0; i < problem.dim(); ++i) shared[i].store(x0[i], std::memory_order_relaxed);

    std::atomic<std::int64_t> tickets{0};     // budget reservation
    std::atomic<std::int64_t> completions{0};  // the paper-model iteration counter
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    struct LocalRecord {
        std::int64_t k;
        int block;
        std::vector<int> j_vec;
        double t_read, t_complete;
        Vector delta;
    };
    std::vector<std::vector<LocalRecord>> logs(config.n_workers);
    const auto t0 = std::chrono::steady_clock::now();
    auto now_s = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    auto worker_loop = [&](int w) {
        try {
            std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ull * (w + 1));
            auto& log = logs[w];
            while (!failed.load(std::memory_order_relaxed) &&
                   tickets.fetch_add(1, std::memory_order_relaxed) < budget) {
                int block;
                if (config.assignment.empty()) {
                    std::uniform_int_distribution<int> d(0, N - 1);
                    block = d(rng);
                } else {
                    const auto& mine = config.assignment[w];
                    std::uniform_int_distribution<int> d(0, static_cast<int>(mine.size()) - 1);
                    block = mine[d(rng)];
                }

                double t_read = now_s();
                std::vector<std::int64_t> snapshot(N);
                Vector xhat(problem.dim());
                for (int b = 0; b < N; ++b) {
                    snapshot[b] = completions.load(std::memory_order_acquire);
                    const BlockRange& br = problem.partition.block(b);
                    for (int i = br.begin; i < br.end; ++i)
                        xhat[i] = shared[i].load(std::memory_order_relaxed);
                }

                Vector g = grad_block(problem, xhat, block);
                if (!config.cost_multiplier.empty())
                    detail::busy_spin(static_cast<std::int64_t>(config.cost_multiplier[block] * config.spin_iters));

                // Measured delay for this update: its gamma uses the worst
                // per-block staleness observed at read time.
                std::int64_t pre = completions.load(std::memory_order_acquire);
                int current = 0;
                for (int b = 0; b < N; ++b)
                    current = std::max(current, static_cast<int>(pre - snapshot[b]));
                const double gamma = step_size(config.policy, current);
                const double scale = gamma / problem.lipschitz_L;
                const BlockRange& br = problem.partition.block(block);
                Vector delta(br.size());
                for (int c = 0; c < br.size(); ++c) {
                    double d = -scale * g[c];
                    delta[c] = d;
                    detail::atomic_accumulate(shared[br.begin + c], d);
                }
                std::int64_t k = completions.fetch_add(1, std::memory_order_acq_rel);

                LocalRecord rec;
                rec.k = k;
                rec.block = block;
                rec.t_read = t_read;
                rec.t_complete = now_s();
                rec.delta = std::move(delta);
                rec.j_vec.resize(N);
                for (int b = 0; b < N; ++b)
                    rec.j_vec[b] = static_cast<int>(std::clamp<std::int64_t>(k - snapshot[b], 0, k));
                log.push_back(std::move(rec));
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed.store(true, std::memory_order_relaxed);
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(config.n_workers);
    for (int w = 0; w < config.n_workers; ++w) threads.emplace_back(worker_loop, w);
    for (auto& t : threads) t.join();

    MeasuredRun out;
    out.wall_seconds = now_s();
    out.x_final.resize(problem.dim());
    for (int i = 0; i < problem.dim(); ++i) out.x_final[i] = shared[i].load(std::memory_order_relaxed);

    const std::int64_t total = completions.load();
    out.trace.num_blocks = N;
    out.trace.records.resize(total);
    out.deltas.resize(total);
    std::vector<bool> seen(total, false);
    for (int w = 0; w < config.n_workers; ++w) {
        for (auto& rec : logs[w]) {
            if (rec.k < 0 || rec.k >= total || seen[rec.k])
                throw std::runtime_error("run_shared: completion counter inconsistency");
            seen[rec.k] = true;
            TraceRecord& r = out.trace.records[rec.k];
            r.k = rec.k;
            r.block = rec.block;
            r.j_vec = std::move(rec.j_vec);
            r.t_read = rec.t_read;
            r.t_complete = rec.t_complete;
            r.worker = w;
            out.deltas[rec.k] = std::move(rec.delta);
        }
    }
    for (bool s : seen)
        if (!s) throw std::runtime_error("run_shared: missing trace record");
    // Wall stamps are taken near, not at, the counter increment; enforce the
    // nondecreasing completion order the counter defines.
    for (std::int64_t k = 1; k < total; ++k)
        out.trace.records[k].t_complete =
            std::max(out.trace.records[k].t_complete, out.trace.records[k - 1].t_complete);
    out.trace.validate();

    if (failed.load()) std::rethrow_exception(first_error);
    return out;
}

// Scatter the logged increments onto x0 and compare with the final vector;
// returns the max absolute coordinate discrepancy (lost-update detector).
inline double update_integrity_gap(const ProblemInstance& problem, const Vector& x0,
                                   const MeasuredRun& run) {
    Vector x = x0;
    for (std::size_t k = 0; k < run.deltas.size(); ++k) {
        const BlockRange& b = problem.partition.block(run.trace.records[k].block);
        for (int c = 0; c < b.size(); ++c) x[b.begin + c] += run.deltas[k][c];
    }
    return (x - run.x_final).cwiseAbs().maxCoeff();
}

struct BlockDelayStats {
    std::int64_t count = 0;
    double mean = 0.0;
    int max = 0;
    std::map<int, std::int64_t> histogram;  // bucket width 1
};

// Per-block stats of the current delay of updates landing on that block.
inline std::vector<BlockDelayStats> delay_stats(const EventTrace& trace) {
    if (trace.horizon() == 0) throw std::invalid_argument("delay_stats: empty trace");
    std::vector<BlockDelayStats> stats(trace.num_blocks);
    for (std::int64_t k = 0; k < trace.horizon(); ++k) {
        int b = trace.records[k].block;
        int j = trace.current_delay(k);
        auto& s = stats[b];
        s.count++;
        s.mean += j;
        s.max = std::max(s.max, j);
        s.histogram[j]++;
    }
    for (auto& s : stats)
        if (s.count > 0) s.mean /= static_cast<double>(s.count);
    return stats;
}

// Pilot-run tau estimate: twice the max observed delay, at least 1.
inline int estimate_tau(const ProblemInstance& problem, RuntimeConfig config, const Vector& x0,
                        std::int64_t pilot_budget = 2000) {
    config.update_budget = pilot_budget;
    MeasuredRun pilot = run_shared(problem, config, x0);
    int max_j = 0;
    for (std::int64_t k = 0; k < pilot.trace.horizon(); ++k)
        max_j = std::max(max_j, pilot.trace.current_delay(k));
    return std::max(1, 2 * max_j);
}

}  // namespace abcd
