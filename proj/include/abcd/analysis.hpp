#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcd/delays.hpp"
#include "abcd/policy.hpp"
#include "abcd/solver.hpp"

namespace abcd {

struct InfeasibleStepSize : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root in (0, 1] of eps + 1/eps = 1 + (1/tau)(1/gamma - 1/2). Requires
// gamma < 2/(2 tau + 1) so the right-hand side is >= 2.
inline double epsilon_bounded(double gamma, int tau) {
    if (tau < 1) throw std::invalid_argument("epsilon_bounded: tau >= 1");
    double B = 1.0 + (1.0 / tau) * (1.0 / gamma - 0.5);
    if (B <= 2.0)
        throw InfeasibleStepSize("epsilon_bounded: gamma too large for tau (need gamma < 2/(2tau+1))");
    double eps = (B - std::sqrt(B * B - 4.0)) / 2.0;
    if (std::abs(eps + 1.0 / eps - B) > 1e-10 * std::max(1.0, B))
        throw std::runtime_error("epsilon_bounded: substitution check failed");
    return eps;
}

// Root in (0, sqrt(c0)] of (eps + c0/eps)/2 = 1/gamma - 1/2. Requires
// gamma < 2/(2 sqrt(c0) + 1).
inline double epsilon_unbounded(double gamma, double c0) {
    if (c0 <= 0) throw std::invalid_argument("epsilon_unbounded: c0 > 0");
    double r = 1.0 / gamma - 0.5;
    if (r <= std::sqrt(c0))
        throw InfeasibleStepSize("epsilon_unbounded: gamma too large for c0 (need gamma < 2/(2 sqrt(c0)+1))");
    double eps = r - std::sqrt(r * r - c0);
    if (std::abs(0.5 * (eps + c0 / eps) - r) > 1e-10 * std::max(1.0, r))
        throw std::runtime_error("epsilon_unbounded: substitution check failed");
    return eps;
}

// Constants of the bounded-delay regime. descent_margin = 1/gamma - 1/2 - tau
// must be positive for the step size to be in the regime.
struct BoundedCoefficients {
    double gamma = 0.0;
    double eps = 0.0;
    double descent_margin = 0.0;  // 1/gamma - 1/2 - tau
    double delta = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

inline BoundedCoefficients bounded_coefficients(int N, double L, int tau, double gamma) {
    BoundedCoefficients c;
    c.gamma = gamma;
    c.eps = epsilon_bounded(gamma, tau);
    c.descent_margin = 1.0 / gamma - 0.5 - tau;
    if (c.descent_margin <= 0) throw InfeasibleStepSize("bounded_coefficients: descent margin <= 0");
    c.delta = (1.0 + (c.eps / (2.0 * tau)) * c.descent_margin) * L / (2.0 * c.eps);
    c.beta = std::max(8.0 * N * L * L / (gamma * gamma),
                      (12.0 * N + 2.0) * L * L * tau + c.delta * tau);
    c.alpha = c.beta / ((L / (4.0 * tau)) * c.descent_margin);
    return c;
}

// Constants of the stochastic-unbounded regime. delta_bar can approach zero
// for c near 1; it is reported as-is and flagged by the caller if needed.
struct UnboundedCoefficients {
    double gamma = 0.0;
    double eps = 0.0;
    double descent_margin = 0.0;  // 1/gamma - 1/2 - sqrt(c0)
    double delta_bar = 0.0;
    double alpha_bar = 0.0;
    double beta_bar = 0.0;
    double descent_factor = 0.0;  // (L/c0) * descent_margin
};

inline UnboundedCoefficients unbounded_coefficients(int N, double L, double c0, double gamma) {
    UnboundedCoefficients c;
    c.gamma = gamma;
    c.eps = epsilon_unbounded(gamma, c0);
    c.descent_margin = 1.0 / gamma - 0.5 - std::sqrt(c0);
    if (c.descent_margin <= 0) throw InfeasibleStepSize("unbounded_coefficients: descent margin <= 0");
    c.delta_bar = L / (2.0 * c.eps) + (1.0 / gamma - 0.5) * L / c0 - L / std::sqrt(c0);
    c.beta_bar = std::max(8.0 * N * L * L / (gamma * gamma * c0), (12.0 * N + 2.0) * L * L + c.delta_bar);
    c.alpha_bar = c.beta_bar / ((L / 2.0) * c.descent_margin);
    c.descent_factor = (L / c0) * c.descent_margin;
    return c;
}

struct RateFit {
    double loglog_slope = 0.0;
    double linear_factor = 1.0;  // per-step geometric factor
    double r_squared = 0.0;
};

struct LyapunovReport {
    std::vector<double> series;  // Lyapunov values, k = 0..K
    std::vector<double> slack;   // per-k descent slack (LHS - RHS), k = 0..K-1
    double min_slack = 0.0;
    std::vector<double> S;  // S(k, tau) where applicable
    std::vector<double> R;  // R(k) where applicable
    RateFit rate_fit;
};

namespace detail {
inline void finalize_min_slack(LyapunovReport& rep) {
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (double s : rep.slack) rep.min_slack = std::min(rep.min_slack, s);
}
}  // namespace detail

// xi_k = f(x^k) + (L/2 eps) sum_{i=k-tau}^{k-1} (i-(k-tau)+1) ||Delta^i||^2,
// slack against the sufficient-descent bound (1/2)(1/gamma - 1/2 - tau) L ||Delta^k||^2.
inline LyapunovReport lyapunov_xi(const RunRecord& run, int tau, double eps, double gamma, double L) {
    const std::int64_t K = static_cast<std::int64_t>(run.delta_sq.size());
    LyapunovReport rep;
    rep.series.resize(K + 1);
    auto window_sum = [&](std::int64_t k) {
        double s = 0.0;
        for (std::int64_t i = k - tau; i <= k - 1; ++i) {
            if (i < 0) continue;  // Delta^i = 0 for i < 0
            s += static_cast<double>(i - (k - tau) + 1) * run.delta_sq[i];
        }
        return s;
    };
    for (std::int64_t k = 0; k <= K; ++k) {
        double f = k < K ? run.rows[k].f : run.f_final;
        rep.series[k] = f + (L / (2.0 * eps)) * window_sum(k);
    }
    const double margin = 1.0 / gamma - 0.5 - tau;
    rep.slack.resize(K);
    for (std::int64_t k = 0; k < K; ++k)
        rep.slack[k] = (rep.series[k] - rep.series[k + 1]) - 0.5 * margin * L * run.delta_sq[k];
    detail::finalize_min_slack(rep);
    return rep;
}

// F_k = f(x^k) + delta sum (i-(k-tau)+1) ||Delta^i||^2. The slack follows the
// proof chain: F_k - F_{k+1} >= (L/4tau) m sum_{i=k-tau}^{k-1} ||Delta^i||^2
//                              + (L/4) m ||Delta^k||^2, m = 1/gamma - 1/2 - tau.
// (The delta-weighted window S(k,tau) is reported alongside.)
inline LyapunovReport lyapunov_F(const RunRecord& run, int tau, const BoundedCoefficients& co, double L) {
    const std::int64_t K = static_cast<std::int64_t>(run.delta_sq.size());
    LyapunovReport rep;
    rep.series.resize(K + 1);
    rep.S.resize(K + 1);
    for (std::int64_t k = 0; k <= K; ++k) {
        double weighted = 0.0, plain = 0.0;
        for (std::int64_t i = k - tau; i <= k - 1; ++i) {
            if (i < 0) continue;
            weighted += static_cast<double>(i - (k - tau) + 1) * run.delta_sq[i];
            plain += run.delta_sq[i];
        }
        double f = k < K ? run.rows[k].f : run.f_final;
        rep.series[k] = f + co.delta * weighted;
        rep.S[k] = co.delta * plain;
    }
    rep.slack.resize(K);
    for (std::int64_t k = 0; k < K; ++k) {
        double window = 0.0;
        for (std::int64_t i = k - tau; i <= k - 1; ++i)
            if (i >= 0) window += run.delta_sq[i];
        double rhs = (L / (4.0 * tau)) * co.descent_margin * window +
                     (L / 4.0) * co.descent_margin * run.delta_sq[k];
        rep.slack[k] = (rep.series[k] - rep.series[k + 1]) - rhs;
    }
    detail::finalize_min_slack(rep);
    return rep;
}

// G_k = f(x^k) + delta_bar sum_{i=0}^{k-1} c_{k-1-i} ||Delta^i||^2 with
// R(k) = sum_{i=0}^{k} c_{k-i} ||Delta^i||^2 evaluated on this path. The
// descent statement is an expectation; the per-path slack here is meant to
// be averaged over an ensemble of seeds.
inline LyapunovReport lyapunov_G(const RunRecord& run, const TailMoments& tail,
                                 const UnboundedCoefficients& co) {
    const std::int64_t K = static_cast<std::int64_t>(run.delta_sq.size());
    LyapunovReport rep;
    rep.series.resize(K + 1);
    rep.R.resize(K);
    for (std::int64_t k = 0; k <= K; ++k) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < k; ++i) acc += tail_c(tail, k - 1 - i) * run.delta_sq[i];
        double f = k < K ? run.rows[k].f : run.f_final;
        rep.series[k] = f + co.delta_bar * acc;
    }
    for (std::int64_t k = 0; k < K; ++k) {
        double r = 0.0;
        for (std::int64_t i = 0; i <= k; ++i) r += tail_c(tail, k - i) * run.delta_sq[i];
        rep.R[k] = r;
    }
    rep.slack.resize(K);
    for (std::int64_t k = 0; k < K; ++k)
        rep.slack[k] = (rep.series[k] - rep.series[k + 1]) - co.descent_factor * rep.R[k];
    detail::finalize_min_slack(rep);
    return rep;
}

// H_k = f(x^k) + (L/2) sum_{i>=1} kappa_i ||Delta^{k-i}||^2; pathwise slack
// against L (1/gamma_k - D_{j(k)}) ||Delta^k||^2. Requires the run to have
// used the delay-adaptive policy with the same eps sequence.
inline LyapunovReport lyapunov_H(const RunRecord& run, const EpsilonSpec& eps, double L) {
    const std::int64_t K = static_cast<std::int64_t>(run.delta_sq.size());
    LyapunovReport rep;
    rep.series.resize(K + 1);
    // kappa_i cached up to the longest history needed
    std::vector<double> kap(K + 2, 0.0);
    for (std::int64_t i = 1; i <= K + 1; ++i) kap[i] = eps.kappa(static_cast<int>(i));
    // D_j cached up to the max observed delay
    int max_j = 0;
    for (const auto& row : run.rows) max_j = std::max(max_j, row.j_max);
    std::vector<double> D(max_j + 1);
    for (int j = 0; j <= max_j; ++j) D[j] = d_sequence(eps, j);

    for (std::int64_t k = 0; k <= K; ++k) {
        double acc = 0.0;
        for (std::int64_t i = 1; i <= k; ++i) acc += kap[i] * run.delta_sq[k - i];
        double f = k < K ? run.rows[k].f : run.f_final;
        rep.series[k] = f + 0.5 * L * acc;
    }
    rep.slack.resize(K);
    for (std::int64_t k = 0; k < K; ++k) {
        const auto& row = run.rows[k];
        if (row.gamma >= 1.0 / D[row.j_max] + 1e-12)
            throw std::invalid_argument("lyapunov_H: step size exceeds 1/D_j; run not delay-adaptive for this eps");
        double rhs = L * (1.0 / row.gamma - D[row.j_max]) * run.delta_sq[k];
        rep.slack[k] = (rep.series[k] - rep.series[k + 1]) - rhs;
    }
    detail::finalize_min_slack(rep);
    return rep;
}

// Q_T = { k : current delay j(k) < T }.
inline std::vector<std::int64_t> q_subsequence(const EventTrace& trace, int T) {
    if (T < 1) throw std::invalid_argument("q_subsequence: T >= 1");
    std::vector<std::int64_t> q;
    for (std::int64_t k = 0; k < trace.horizon(); ++k)
        if (trace.current_delay(k) < T) q.push_back(k);
    return q;
}

namespace detail {
struct LeastSquares {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
inline LeastSquares least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("least_squares: need >= 2 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LeastSquares ls;
    ls.slope = sxy / sxx;
    ls.intercept = my - ls.slope * mx;
    ls.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return ls;
}
}  // namespace detail

// Rate fits on a mean objective-gap series. Sublinear: slope of log(gap) vs
// log k; linear: per-step geometric factor from log(gap) vs k. Fit window
// defaults to the tail half; values below 1e-14 are truncated away.
inline RateFit fit_rates(const std::vector<double>& gap, std::int64_t fit_begin = -1,
                         std::int64_t fit_end = -1) {
    const std::int64_t K = static_cast<std::int64_t>(gap.size());
    if (fit_begin < 0) fit_begin = K / 2;
    if (fit_end < 0) fit_end = K;
    std::vector<double> lk, lg, kk;
    for (std::int64_t k = std::max<std::int64_t>(fit_begin, 1); k < fit_end; ++k) {
        if (gap[k] <= 1e-14) break;  // float-noise floor
        lk.push_back(std::log(static_cast<double>(k)));
        kk.push_back(static_cast<double>(k));
        lg.push_back(std::log(gap[k]));
    }
    if (lg.size() < 2) throw std::invalid_argument("fit_rates: gap series below float noise on the fit window");
    RateFit fit;
    auto loglog = detail::least_squares(lk, lg);
    fit.loglog_slope = loglog.slope;
    auto lin = detail::least_squares(kk, lg);
    fit.linear_factor = std::exp(lin.slope);
    fit.r_squared = lin.r2;
    return fit;
}

// Running-best series: min_{i<=k} g[i] * sqrt(k), 1-indexed over the series.
inline std::vector<double> running_best_series(const std::vector<double>& grad_norms) {
    std::vector<double> out(grad_norms.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grad_norms.size(); ++k) {
        best = std::min(best, grad_norms[k]);
        out[k] = best * std::sqrt(static_cast<double>(k + 1));
    }
    return out;
}

inline void write_lyapunov_csv(const LyapunovReport& rep, std::ostream& out) {
    out << "k,lyap,slack,S_k,R_k\n";
    out << std::setprecision(17);
    const std::size_t K = rep.slack.size();
    for (std::size_t k = 0; k < K; ++k) {
        out << k << ',' << rep.series[k] << ',' << rep.slack[k] << ','
            << (k < rep.S.size() ? rep.S[k] : 0.0) << ',' << (k < rep.R.size() ? rep.R[k] : 0.0) << "\n";
    }
}

inline void write_lyapunov_csv_file(const LyapunovReport& rep, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("lyapunov report: cannot open " + path);
    write_lyapunov_csv(rep, f);
}

}  // namespace abcd
