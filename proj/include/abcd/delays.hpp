#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace abcd {

// Tail moments of a delay distribution:
//   s_l = sum_{j>=l} j p_j,  c_i = sum_{l>=i} s_l,  c0 = c_0.
struct TailMoments {
    std::vector<double> s;
    std::vector<double> c;
    double c0 = 0.0;
};

struct DivergentTail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Computes tail moments for p given as a callable over j >= 0. Summation is
// truncated once the remaining tail contributes less than tol (relative) to
// c0; throws DivergentTail if the partial sums of c0 do not stabilize before
// max_terms or blow past the ceiling.
inline TailMoments tail_moments(const std::function<double(int)>& p, double tol = 1e-12,
                                int max_terms = 200000, double ceiling = 1e9) {
    if (tol <= 0) throw std::invalid_argument("tail_moments: tol > 0");
    // c0 = sum_l s_l = sum_j j p_j * (j+1)  (each j contributes to s_0..s_j)
    double c0_partial = 0.0;
    double mass = 0.0;
    int J = -1;
    int stable_run = 0;
    for (int j = 0; j < max_terms; ++j) {
        double pj = p(j);
        if (pj < 0) throw std::invalid_argument("tail_moments: p_j >= 0 required");
        mass += pj;
        double contrib = static_cast<double>(j) * pj * (j + 1.0);
        c0_partial += contrib;
        if (c0_partial > ceiling)
            throw DivergentTail("tail_moments: c0 partial sums exceed ceiling; tail decays too slowly");
        if (contrib <= tol * std::max(1.0, c0_partial) && mass >= 1.0 - 1e-9) {
            if (++stable_run >= 8) {  // several consecutive negligible terms
                J = j;
                break;
            }
        } else {
            stable_run = 0;
        }
    }
    if (J < 0)
        throw DivergentTail("tail_moments: c0 partial sums did not stabilize within max_terms");
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("tail_moments: p must sum to 1 (got " + std::to_string(mass) + ")");

    TailMoments tm;
    tm.s.assign(J + 2, 0.0);
    // s_l via suffix sums of j p_j
    double suffix = 0.0;
    std::vector<double> jp(J + 1);
    for (int j = 0; j <= J; ++j) jp[j] = static_cast<double>(j) * p(j);
    for (int l = J; l >= 0; --l) {
        suffix += jp[l];
        tm.s[l] = suffix;
    }
    tm.c.assign(J + 2, 0.0);
    double csuffix = 0.0;
    for (int i = J; i >= 0; --i) {
        csuffix += tm.s[i];
        tm.c[i] = csuffix;
    }
    tm.c0 = tm.c[0];
    return tm;
}

inline TailMoments tail_moments(const std::vector<double>& p, double tol = 1e-12) {
    double mass = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("tail_moments: p must sum to 1 (got " + std::to_string(mass) + ")");
    return tail_moments([&p](int j) { return j < static_cast<int>(p.size()) ? p[j] : 0.0; }, tol,
                        static_cast<int>(p.size()) + 64);
}

// Nonincreasing lookup with zero tail.
inline double tail_c(const TailMoments& tm, std::int64_t i) {
    if (i < 0) throw std::invalid_argument("tail_c: i >= 0");
    return i < static_cast<std::int64_t>(tm.c.size()) ? tm.c[i] : 0.0;
}

inline double tail_s(const TailMoments& tm, std::int64_t i) {
    if (i < 0) throw std::invalid_argument("tail_s: i >= 0");
    return i < static_cast<std::int64_t>(tm.s.size()) ? tm.s[i] : 0.0;
}

inline std::vector<double> geometric_delay_pmf(double q, int truncation) {
    if (q <= 0 || q >= 1) throw std::invalid_argument("geometric_delay_pmf: q in (0,1)");
    std::vector<double> p(truncation);
    for (int j = 0; j < truncation; ++j) p[j] = (1.0 - q) * std::pow(q, j);
    return p;
}

// Delay model used to synthesize controlled traces.
struct BoundedDelay {
    int tau = 1;  // j(k) <= tau, drawn uniform on {0..tau} by default
};

struct StochasticTailDelay {
    std::vector<double> p;  // pmf over j >= 0, truncated
    int truncation_J = 0;
};

struct DeterministicDelay {
    std::vector<int> j_of_k;
    bool repeat = true;  // cycle the sequence past its end
};

using DelaySpec = std::variant<BoundedDelay, StochasticTailDelay, DeterministicDelay>;

inline void validate(const DelaySpec& spec) {
    if (const auto* b = std::get_if<BoundedDelay>(&spec)) {
        if (b->tau < 0) throw std::invalid_argument("BoundedDelay: tau >= 0");
    } else if (const auto* st = std::get_if<StochasticTailDelay>(&spec)) {
        double mass = std::accumulate(st->p.begin(), st->p.end(), 0.0);
        if (std::abs(mass - 1.0) > 1e-12)
            throw std::invalid_argument("StochasticTailDelay: p must sum to 1 after truncation");
        for (double v : st->p)
            if (v < 0) throw std::invalid_argument("StochasticTailDelay: p_j >= 0");
        tail_moments(st->p);  // throws DivergentTail if c0 not finite
    } else if (const auto* d = std::get_if<DeterministicDelay>(&spec)) {
        if (d->j_of_k.empty()) throw std::invalid_argument("DeterministicDelay: empty sequence");
        for (int v : d->j_of_k)
            if (v < 0) throw std::invalid_argument("DeterministicDelay: delays >= 0");
    }
}

}  // namespace abcd
