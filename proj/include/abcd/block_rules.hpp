#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "abcd/trace.hpp"

namespace abcd {

// Stochastic block rule: uniform by default, optional positive weights.
// Draws are independent of the trace so far.
class BlockSampler {
  public:
    explicit BlockSampler(int num_blocks, std::vector<double> weights = {})
        : num_blocks_(num_blocks), weights_(std::move(weights)) {
        if (num_blocks_ < 1) throw std::invalid_argument("BlockSampler: N >= 1");
        if (!weights_.empty()) {
            if (static_cast<int>(weights_.size()) != num_blocks_)
                throw std::invalid_argument("BlockSampler: weight count mismatch");
            double sum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
            for (double w : weights_)
                if (w <= 0) throw std::invalid_argument("BlockSampler: weights must be positive");
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("BlockSampler: weights must sum to 1");
            cdf_.resize(num_blocks_);
            double acc = 0.0;
            for (int i = 0; i < num_blocks_; ++i) {
                acc += weights_[i];
                cdf_[i] = acc;
            }
            cdf_.back() = 1.0;
        }
    }

    int sample(std::mt19937_64& rng) const {
        if (cdf_.empty()) {
            std::uniform_int_distribution<int> d(0, num_blocks_ - 1);
            return d(rng);
        }
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double v = u(rng);
        return static_cast<int>(std::lower_bound(cdf_.begin(), cdf_.end(), v) - cdf_.begin());
    }

  private:
    int num_blocks_;
    std::vector<double> weights_;
    std::vector<double> cdf_;
};

struct CyclicValidation {
    bool valid = true;
    // (block, window) -> first index in the window where the block appears
    std::map<std::pair<int, int>, std::int64_t> witnesses;
};

// Essentially cyclic check: in every full window [t N', (t+1) N'), each block
// appears at least once. Short final windows are ignored.
inline CyclicValidation validate_essentially_cyclic(const std::vector<int>& seq, int N, int N_prime) {
    if (N_prime < N) throw std::invalid_argument("validate_essentially_cyclic: N' >= N");
    if (static_cast<int>(seq.size()) < N_prime)
        throw std::invalid_argument("validate_essentially_cyclic: sequence shorter than one window");
    CyclicValidation out;
    int num_windows = static_cast<int>(seq.size()) / N_prime;
    for (int t = 0; t < num_windows; ++t) {
        std::vector<std::int64_t> first(N, -1);
        for (int off = 0; off < N_prime; ++off) {
            std::int64_t idx = static_cast<std::int64_t>(t) * N_prime + off;
            int b = seq[idx];
            if (b < 0 || b >= N) throw std::invalid_argument("validate_essentially_cyclic: block out of range");
            if (first[b] < 0) first[b] = idx;
        }
        for (int i = 0; i < N; ++i) {
            if (first[i] < 0)
                out.valid = false;
            else
                out.witnesses[{i, t}] = first[i];
        }
    }
    return out;
}

// ECSD: essentially cyclic with the extra requirement that the witnessing
// update has current delay strictly below B.
inline CyclicValidation validate_ecsd(const EventTrace& trace, int N, int N_prime, int B) {
    if (B < 1) throw std::invalid_argument("validate_ecsd: B >= 1");
    if (N_prime < N) throw std::invalid_argument("validate_ecsd: N' >= N");
    CyclicValidation out;
    int num_windows = static_cast<int>(trace.horizon()) / N_prime;
    for (int t = 0; t < num_windows; ++t) {
        std::vector<std::int64_t> first(N, -1);
        for (int off = 0; off < N_prime; ++off) {
            std::int64_t k = static_cast<std::int64_t>(t) * N_prime + off;
            int b = trace.records[k].block;
            if (first[b] < 0 && trace.current_delay(k) < B) first[b] = k;
        }
        for (int i = 0; i < N; ++i) {
            if (first[i] < 0)
                out.valid = false;
            else
                out.witnesses[{i, t}] = first[i];
        }
    }
    return out;
}

struct BlockConditionalReport {
    // counts[prev][cur]: occurrences of i_k = cur given i_{k-tau} = prev
    std::vector<std::vector<std::int64_t>> counts;
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 0.0;
};

// Empirical uniformity of i_k stratified by the block updated tau steps
// earlier. Chi-square distance from the uniform conditional law.
inline BlockConditionalReport empirical_block_conditional(const EventTrace& trace, int tau) {
    const int N = trace.num_blocks;
    if (trace.horizon() <= static_cast<std::int64_t>(10) * N * std::max(tau, 1))
        throw std::invalid_argument("empirical_block_conditional: insufficient samples");
    BlockConditionalReport rep;
    rep.counts.assign(N, std::vector<std::int64_t>(N, 0));
    for (std::int64_t k = tau; k < trace.horizon(); ++k)
        rep.counts[trace.records[k - tau].block][trace.records[k].block]++;
    for (int prev = 0; prev < N; ++prev) {
        double row = 0.0;
        for (int cur = 0; cur < N; ++cur) row += static_cast<double>(rep.counts[prev][cur]);
        if (row == 0.0) continue;
        double expected = row / N;
        for (int cur = 0; cur < N; ++cur) {
            double o = static_cast<double>(rep.counts[prev][cur]);
            rep.chi_square += (o - expected) * (o - expected) / expected;
        }
        rep.dof += N - 1;
    }
    if (rep.dof > 0) {
        boost::math::chi_squared dist(rep.dof);
        rep.p_value = boost::math::cdf(boost::math::complement(dist, rep.chi_square));
    }
    return rep;
}

}  // namespace abcd
