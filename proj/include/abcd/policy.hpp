#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace abcd {

// Fixed step size for delays bounded by tau: gamma = 2c/(2 tau + 1), 0<c<1.
inline double gamma_bounded(int tau, double c) {
    if (tau < 1) throw std::invalid_argument("gamma_bounded: tau >= 1");
    if (c <= 0 || c >= 1) throw std::invalid_argument("gamma_bounded: c in (0,1)");
    return 2.0 * c / (2.0 * tau + 1.0);
}

// Fixed step size for stochastic unbounded delays: gamma = 2c/(2 sqrt(c0) + 1).
inline double gamma_stochastic_unbounded(double c0, double c) {
    if (c0 <= 0) throw std::invalid_argument("gamma_stochastic_unbounded: c0 > 0");
    if (c <= 0 || c >= 1) throw std::invalid_argument("gamma_stochastic_unbounded: c in (0,1)");
    return 2.0 * c / (2.0 * std::sqrt(c0) + 1.0);
}

// Positive sequence (eps_i)_{i>=1} with finite kappa_1 = sum_{j>=1} eps_j,
// driving the delay-adaptive step size gamma_k = c / D_{j(k)} with
// D_j = 1/2 + kappa_1/2 + sum_{i=1..j} 1/(2 eps_i).
class EpsilonSpec {
  public:
    enum class Kind { inverse_square, geometric, finite };

    static EpsilonSpec inverse_square() {
        EpsilonSpec s;
        s.kind_ = Kind::inverse_square;
        return s;
    }

    static EpsilonSpec geometric(double ratio) {
        if (ratio <= 0 || ratio >= 1) throw std::invalid_argument("EpsilonSpec: ratio in (0,1)");
        EpsilonSpec s;
        s.kind_ = Kind::geometric;
        s.ratio_ = ratio;
        return s;
    }

    // eps_i = values[i-1] for 1 <= i <= n, 0 beyond (kappa trivially finite).
    static EpsilonSpec finite(std::vector<double> values) {
        for (double v : values)
            if (v <= 0) throw std::invalid_argument("EpsilonSpec: eps_i > 0");
        if (values.empty()) throw std::invalid_argument("EpsilonSpec: need at least one term");
        EpsilonSpec s;
        s.kind_ = Kind::finite;
        s.values_ = std::move(values);
        return s;
    }

    Kind kind() const { return kind_; }

    double epsilon(int i) const {
        if (i < 1) throw std::invalid_argument("EpsilonSpec: i >= 1");
        switch (kind_) {
            case Kind::inverse_square:
                return 1.0 / (static_cast<double>(i) * i);
            case Kind::geometric:
                return std::pow(ratio_, i);
            case Kind::finite:
                return i <= static_cast<int>(values_.size()) ? values_[i - 1] : 0.0;
        }
        return 0.0;
    }

    // kappa_i = sum_{j>=i} eps_j
    double kappa(int i) const {
        if (i < 1) throw std::invalid_argument("EpsilonSpec: kappa index >= 1");
        switch (kind_) {
            case Kind::inverse_square:
                return trigamma(i);
            case Kind::geometric:
                return std::pow(ratio_, i) / (1.0 - ratio_);
            case Kind::finite: {
                double s = 0.0;
                for (int j = static_cast<int>(values_.size()); j >= i; --j) s += values_[j - 1];
                return s;
            }
        }
        return 0.0;
    }

    bool same_as(const EpsilonSpec& o) const {
        return kind_ == o.kind_ && ratio_ == o.ratio_ && values_ == o.values_;
    }

  private:
    // psi'(z) = sum_{j>=0} 1/(z+j)^2, via upward shift + asymptotic series.
    static double trigamma(double z) {
        double acc = 0.0;
        while (z < 20.0) {
            acc += 1.0 / (z * z);
            z += 1.0;
        }
        double iz = 1.0 / z, iz2 = iz * iz;
        // 1/z + 1/(2z^2) + 1/(6z^3) - 1/(30z^5) + 1/(42z^7) - 1/(30z^9)
        double tail = iz + 0.5 * iz2 + iz * iz2 * (1.0 / 6.0 - iz2 * (1.0 / 30.0 - iz2 * (1.0 / 42.0 - iz2 / 30.0)));
        return acc + tail;
    }

    Kind kind_ = Kind::inverse_square;
    double ratio_ = 0.5;
    std::vector<double> values_;
};

// D_j for the delay-adaptive step size. Strictly increasing in j; throws if
// eps_j = 0 is hit (finite spec shorter than the observed delay).
inline double d_sequence(const EpsilonSpec& eps, int j) {
    if (j < 0) throw std::invalid_argument("d_sequence: j >= 0");
    double d = 0.5 + 0.5 * eps.kappa(1);
    for (int i = 1; i <= j; ++i) {
        double e = eps.epsilon(i);
        if (e <= 0) throw std::invalid_argument("d_sequence: eps sequence exhausted at i=" + std::to_string(i));
        d += 0.5 / e;
    }
    return d;
}

// The three step-size policies.
struct BoundedFixedPolicy {
    int tau = 1;
    double c = 0.5;
};

struct StochasticUnboundedFixedPolicy {
    double c0 = 1.0;
    double c = 0.5;
};

struct DelayAdaptivePolicy {
    EpsilonSpec epsilon = EpsilonSpec::inverse_square();
    double c = 0.5;
};

using StepPolicy = std::variant<BoundedFixedPolicy, StochasticUnboundedFixedPolicy, DelayAdaptivePolicy>;

// Step size for update k given the current delay j(k). Fixed policies ignore
// the delay; DelayAdaptive requires it measured.
inline double step_size(const StepPolicy& policy, int current_delay) {
    if (const auto* b = std::get_if<BoundedFixedPolicy>(&policy)) return gamma_bounded(b->tau, b->c);
    if (const auto* s = std::get_if<StochasticUnboundedFixedPolicy>(&policy))
        return gamma_stochastic_unbounded(s->c0, s->c);
    const auto& a = std::get<DelayAdaptivePolicy>(policy);
    if (a.c <= 0 || a.c >= 1) throw std::invalid_argument("step_size: c in (0,1)");
    return a.c / d_sequence(a.epsilon, current_delay);
}

}  // namespace abcd
