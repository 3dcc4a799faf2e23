#pragma once

#include <algorithm>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "abcd/delays.hpp"
#include "abcd/trace.hpp"

namespace abcd {

// Asynchronous agents doing read-compute-update cycles against a shared
// completion counter. Compute cost is per-block, optionally jittered.
struct AgentModel {
    int num_agents = 1;
    int num_blocks = 1;
    // empty: every agent draws uniformly from all blocks each step;
    // otherwise agent a draws uniformly from assignment[a].
    std::vector<std::vector<int>> assignment;
    std::vector<double> block_cost;  // strictly positive
    double cost_jitter = 0.0;        // multiplicative, uniform on [1-j, 1+j]
    double read_duration = 0.0;

    void validate() const {
        if (num_agents < 1) throw std::invalid_argument("AgentModel: num_agents >= 1");
        if (num_blocks < 1) throw std::invalid_argument("AgentModel: num_blocks >= 1");
        if (static_cast<int>(block_cost.size()) != num_blocks)
            throw std::invalid_argument("AgentModel: block_cost size mismatch");
        for (double c : block_cost)
            if (c <= 0) throw std::invalid_argument("AgentModel: compute times strictly positive");
        if (!assignment.empty()) {
            if (static_cast<int>(assignment.size()) != num_agents)
                throw std::invalid_argument("AgentModel: assignment size mismatch");
            std::set<int> covered;
            for (const auto& blocks : assignment) {
                if (blocks.empty()) throw std::invalid_argument("AgentModel: agent with no blocks");
                for (int b : blocks) {
                    if (b < 0 || b >= num_blocks) throw std::invalid_argument("AgentModel: block out of range");
                    covered.insert(b);
                }
            }
            if (static_cast<int>(covered.size()) != num_blocks)
                throw std::invalid_argument("AgentModel: fixed partition must cover all blocks");
        }
        if (cost_jitter < 0 || cost_jitter >= 1) throw std::invalid_argument("AgentModel: jitter in [0,1)");
        if (read_duration < 0) throw std::invalid_argument("AgentModel: read_duration >= 0");
    }
};

// Deterministic discrete-event simulation. Each agent snapshots the global
// completion counter per block at that block's read instant; the delay of
// its update is completions since the snapshot. Simultaneous events resolve
// completions first, then reads, ties broken by agent index.
inline EventTrace simulate(const AgentModel& agents, std::int64_t horizon, std::uint64_t seed) {
    agents.validate();
    if (horizon < 1) throw std::invalid_argument("simulate: horizon >= 1");

    enum EventType { kComplete = 0, kRead = 1 };
    struct Event {
        double t;
        int type;
        int agent;
        int slot;  // block slot for reads
        bool operator>(const Event& o) const {
            return std::tie(t, type, agent, slot) > std::tie(o.t, o.type, o.agent, o.slot);
        }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;

    struct AgentState {
        int block = 0;
        double t_read = 0.0;
        std::vector<std::int64_t> snapshot;
        std::mt19937_64 rng;
    };
    std::vector<AgentState> st(agents.num_agents);

    const int N = agents.num_blocks;
    std::int64_t counter = 0;
    EventTrace trace;
    trace.num_blocks = N;
    trace.records.reserve(horizon);

    auto start_cycle = [&](int a, double t) {
        AgentState& s = st[a];
        if (agents.assignment.empty()) {
            std::uniform_int_distribution<int> d(0, N - 1);
            s.block = d(s.rng);
        } else {
            const auto& mine = agents.assignment[a];
            std::uniform_int_distribution<int> d(0, static_cast<int>(mine.size()) - 1);
            s.block = mine[d(s.rng)];
        }
        s.t_read = t;
        s.snapshot.assign(N, -1);
        for (int b = 0; b < N; ++b) {
            double off = N > 1 ? agents.read_duration * b / (N - 1) : 0.0;
            queue.push({t + off, kRead, a, b});
        }
        double cost = agents.block_cost[s.block];
        if (agents.cost_jitter > 0) {
            std::uniform_real_distribution<double> j(1.0 - agents.cost_jitter, 1.0 + agents.cost_jitter);
            cost *= j(s.rng);
        }
        queue.push({t + agents.read_duration + cost, kComplete, a, 0});
    };

    for (int a = 0; a < agents.num_agents; ++a) {
        st[a].rng.seed(seed + 0x9e3779b97f4a7c15ull * (a + 1));
        start_cycle(a, 0.0);
    }

    while (counter < horizon && !queue.empty()) {
        Event ev = queue.top();
        queue.pop();
        AgentState& s = st[ev.agent];
        if (ev.type == kRead) {
            s.snapshot[ev.slot] = counter;
        } else {
            std::int64_t k = counter++;
            TraceRecord r;
            r.k = k;
            r.block = s.block;
            r.t_read = s.t_read;
            r.t_complete = ev.t;
            r.worker = ev.agent;
            r.j_vec.resize(N);
            for (int b = 0; b < N; ++b) {
                std::int64_t j = k - s.snapshot[b];
                r.j_vec[b] = static_cast<int>(std::clamp<std::int64_t>(j, 0, k));
            }
            trace.records.push_back(std::move(r));
            start_cycle(ev.agent, ev.t);
        }
    }
    trace.validate();
    return trace;
}

struct Example1Report {
    // Achievable (i1, i2) pairs of the first two completed updates,
    // 0-based blocks with costs {2, 3, 4}.
    std::set<std::pair<int, int>> reachable;

    bool reachable_pair(int i1, int i2) const { return reachable.count({i1, i2}) > 0; }
};

// Exhaustive enumeration of both agents' first two block choices for the
// two-agent, three-block instance with costs 2/3/4 seconds and simultaneous
// start. Completion ties break toward agent 0.
inline Example1Report enumerate_example1() {
    const double cost[3] = {2.0, 3.0, 4.0};
    Example1Report rep;
    for (int a0_first = 0; a0_first < 3; ++a0_first)
        for (int a0_second = 0; a0_second < 3; ++a0_second)
            for (int a1_first = 0; a1_first < 3; ++a1_first)
                for (int a1_second = 0; a1_second < 3; ++a1_second) {
                    // completion times of the four jobs
                    struct Job {
                        double t;
                        int agent;
                        int block;
                    };
                    std::vector<Job> jobs = {
                        {cost[a0_first], 0, a0_first},
                        {cost[a0_first] + cost[a0_second], 0, a0_second},
                        {cost[a1_first], 1, a1_first},
                        {cost[a1_first] + cost[a1_second], 1, a1_second},
                    };
                    std::stable_sort(jobs.begin(), jobs.end(), [](const Job& x, const Job& y) {
                        return std::tie(x.t, x.agent) < std::tie(y.t, y.agent);
                    });
                    rep.reachable.insert({jobs[0].block, jobs[1].block});
                }
    return rep;
}

// Synthesizes a trace with the current delay j(k) drawn from the spec and
// j(k,i) = min(j(k), k) across all blocks (consistent read). Used when an
// experiment needs exact control of the delay law.
inline EventTrace inject_delays(const std::vector<int>& block_seq, int num_blocks,
                                const DelaySpec& spec, std::mt19937_64& rng) {
    validate(spec);
    if (block_seq.empty()) throw std::invalid_argument("inject_delays: empty block sequence");
    EventTrace trace;
    trace.num_blocks = num_blocks;
    const std::int64_t K = static_cast<std::int64_t>(block_seq.size());
    trace.records.reserve(K);

    std::discrete_distribution<int> tail_dist;
    if (const auto* st = std::get_if<StochasticTailDelay>(&spec))
        tail_dist = std::discrete_distribution<int>(st->p.begin(), st->p.end());

    for (std::int64_t k = 0; k < K; ++k) {
        int j = 0;
        if (const auto* b = std::get_if<BoundedDelay>(&spec)) {
            std::uniform_int_distribution<int> d(0, b->tau);
            j = d(rng);
        } else if (std::holds_alternative<StochasticTailDelay>(spec)) {
            j = tail_dist(rng);
        } else {
            const auto& d = std::get<DeterministicDelay>(spec);
            auto n = d.j_of_k.size();
            j = d.repeat ? d.j_of_k[k % n]
                         : d.j_of_k[std::min<std::size_t>(k, n - 1)];
        }
        j = static_cast<int>(std::min<std::int64_t>(j, k));
        TraceRecord r;
        r.k = k;
        r.block = block_seq[k];
        r.j_vec.assign(num_blocks, j);
        r.t_read = static_cast<double>(k - j);
        r.t_complete = static_cast<double>(k);
        trace.records.push_back(std::move(r));
    }
    trace.validate();
    return trace;
}

}  // namespace abcd
