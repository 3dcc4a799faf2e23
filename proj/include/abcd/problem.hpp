#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>

#include "abcd/partition.hpp"

namespace abcd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Convexity { nonconvex, convex, restricted_strongly_convex };

// Block-structured smooth objective with an exact per-block gradient oracle
// and declared analytic constants.
struct ProblemInstance {
    BlockPartition partition;
    double lipschitz_L = 0.0;
    Convexity convexity_class = Convexity::nonconvex;
    std::optional<double> rsc_nu;
    std::optional<double> optimal_value;

    std::function<double(const Vector&)> objective;
    std::function<Vector(const Vector&)> gradient;
    // Projection onto argmin f, when known analytically (RSC checks).
    std::function<Vector(const Vector&)> argmin_projection;

    std::string name;

    int dim() const { return partition.total_dim(); }
    int num_blocks() const { return partition.num_blocks(); }
};

inline double eval(const ProblemInstance& p, const Vector& x) {
    if (x.size() != p.dim()) throw std::invalid_argument("eval: dimension mismatch");
    return p.objective(x);
}

inline Vector full_grad(const ProblemInstance& p, const Vector& x) {
    if (x.size() != p.dim()) throw std::invalid_argument("full_grad: dimension mismatch");
    return p.gradient(x);
}

inline Vector grad_block(const ProblemInstance& p, const Vector& x, int i) {
    if (i < 0 || i >= p.num_blocks()) throw std::out_of_range("grad_block: block index");
    const BlockRange& b = p.partition.block(i);
    return full_grad(p, x).segment(b.begin, b.size());
}

// Central finite differences, step h = 1e-6 * (1 + |x_j|) per coordinate.
inline Vector finite_difference_grad(const ProblemInstance& p, const Vector& x) {
    Vector g(x.size());
    Vector xp = x, xm = x;
    for (int j = 0; j < x.size(); ++j) {
        double h = 1e-6 * (1.0 + std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (p.objective(xp) - p.objective(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return g;
}

struct LipschitzReport {
    double max_ratio = 0.0;
    bool pass = false;
};

// Samples pairs in a ball of the given radius and reports the max secant
// ratio ||grad f(x)-grad f(y)|| / ||x-y||. Pass iff it stays within the
// declared L (small float headroom).
inline LipschitzReport validate_lipschitz(const ProblemInstance& p, int n_samples, double radius,
                                          std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("validate_lipschitz: n_samples >= 1");
    if (radius <= 0) throw std::invalid_argument("validate_lipschitz: radius > 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto sample_ball = [&]() {
        Vector v(p.dim());
        for (int j = 0; j < p.dim(); ++j) v[j] = gauss(rng);
        double n = v.norm();
        if (n == 0.0) return Vector(Vector::Zero(p.dim()));
        double r = radius * std::pow(unif(rng), 1.0 / p.dim());
        return Vector((r / n) * v);
    };
    LipschitzReport rep;
    for (int s = 0; s < n_samples; ++s) {
        Vector x = sample_ball();
        Vector y = sample_ball();
        double dist = (x - y).norm();
        if (dist == 0.0) continue;  // degenerate pair
        double ratio = (full_grad(p, x) - full_grad(p, y)).norm() / dist;
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.pass = rep.max_ratio <= p.lipschitz_L * (1.0 + 1e-9);
    return rep;
}

// f(x) = 1/2 x'Qx - b'x, Q symmetric positive semidefinite.
// L = lambda_max(Q). Q > 0: nu = lambda_min(Q); singular Q: RSC with
// nu = smallest nonzero eigenvalue.
inline ProblemInstance make_quadratic(const Matrix& Q, const Vector& b, int num_blocks = 0) {
    if (Q.rows() != Q.cols()) throw std::invalid_argument("make_quadratic: Q must be square");
    if (!Q.isApprox(Q.transpose(), 1e-12))
        throw std::invalid_argument("make_quadratic: Q must be symmetric");
    if (b.size() != Q.rows()) throw std::invalid_argument("make_quadratic: b dimension mismatch");
    const int n = static_cast<int>(Q.rows());
    if (num_blocks <= 0) num_blocks = n;

    Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
    const Vector evals = es.eigenvalues();
    const Matrix evecs = es.eigenvectors();
    double lmax = evals.maxCoeff();
    double lmin = evals.minCoeff();
    if (lmin < -1e-10 * std::max(1.0, lmax))
        throw std::invalid_argument("make_quadratic: Q must be positive semidefinite");
    const double rank_tol = 1e-10 * std::max(1.0, lmax);
    if (lmax <= rank_tol) throw std::invalid_argument("make_quadratic: Q must be nonzero");
    double min_nonzero = lmax;
    for (int i = 0; i < n; ++i)
        if (evals[i] > rank_tol) min_nonzero = std::min(min_nonzero, evals[i]);

    // Minimum-norm solution of Qx = b (pseudoinverse), for min f and the
    // argmin projection.
    Vector coeffs = evecs.transpose() * b;
    Vector pinv_coeffs(n);
    for (int i = 0; i < n; ++i) pinv_coeffs[i] = evals[i] > rank_tol ? coeffs[i] / evals[i] : 0.0;
    Vector xstar = evecs * pinv_coeffs;

    ProblemInstance p;
    p.partition = BlockPartition::equal_blocks(n, num_blocks);
    p.lipschitz_L = lmax;
    // RSC constant: smallest nonzero eigenvalue (covers singular Q).
    p.convexity_class = Convexity::restricted_strongly_convex;
    p.rsc_nu = min_nonzero;
    p.optimal_value = 0.5 * xstar.dot(Q * xstar) - b.dot(xstar);
    p.objective = [Q, b](const Vector& x) { return 0.5 * x.dot(Q * x) - b.dot(x); };
    p.gradient = [Q, b](const Vector& x) { return Vector(Q * x - b); };
    // argmin f = xstar + null(Q); project by removing range-space error.
    p.argmin_projection = [evecs, evals, rank_tol, xstar, n](const Vector& x) {
        Vector c = evecs.transpose() * (x - xstar);
        for (int i = 0; i < n; ++i)
            if (evals[i] > rank_tol) c[i] = 0.0;
        return Vector(xstar + evecs * c);
    };
    p.name = "quadratic";
    return p;
}

// Binary logistic regression: f(x) = sum_m log(1 + exp(-y_m a_m'x)) + (lambda/2)||x||^2.
// L = 1/4 lambda_max(A'A) + lambda.
inline ProblemInstance make_logistic(const Matrix& A, const Vector& y, double lambda,
                                     int num_blocks = 0) {
    if (A.rows() == 0) throw std::invalid_argument("make_logistic: empty dataset");
    if (y.size() != A.rows()) throw std::invalid_argument("make_logistic: label size mismatch");
    if (lambda < 0) throw std::invalid_argument("make_logistic: lambda >= 0");
    if (!A.allFinite()) throw std::invalid_argument("make_logistic: dataset rows must be finite");
    const int d = static_cast<int>(A.cols());
    if (num_blocks <= 0) num_blocks = d;

    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(A.transpose() * A));
    double lmax_ata = es.eigenvalues().maxCoeff();

    ProblemInstance p;
    p.partition = BlockPartition::equal_blocks(d, num_blocks);
    p.lipschitz_L = 0.25 * lmax_ata + lambda;
    p.convexity_class = lambda > 0 ? Convexity::restricted_strongly_convex : Convexity::convex;
    if (lambda > 0) p.rsc_nu = lambda;
    p.objective = [A, y, lambda](const Vector& x) {
        Vector z = -(y.array() * (A * x).array()).matrix();
        double s = 0.0;
        for (int m = 0; m < z.size(); ++m) {
            // log(1+exp(z)) without overflow
            s += z[m] > 0 ? z[m] + std::log1p(std::exp(-z[m])) : std::log1p(std::exp(z[m]));
        }
        return s + 0.5 * lambda * x.squaredNorm();
    };
    p.gradient = [A, y, lambda](const Vector& x) {
        Vector z = -(y.array() * (A * x).array()).matrix();
        Vector w(z.size());
        for (int m = 0; m < z.size(); ++m) {
            double sig = z[m] > 0 ? 1.0 / (1.0 + std::exp(-z[m])) : std::exp(z[m]) / (1.0 + std::exp(z[m]));
            w[m] = -y[m] * sig;
        }
        return Vector(A.transpose() * w + lambda * x);
    };
    p.name = "logistic";
    return p;
}

// Nonconvex separable test function f(x) = sum_j x_j^2 / (1 + x_j^2).
// |f''| <= 2 coordinatewise, so L = 2 for the separable Hessian.
inline ProblemInstance make_nonconvex_test(int dim, int num_blocks = 0) {
    if (dim < 1) throw std::invalid_argument("make_nonconvex_test: dim >= 1");
    if (num_blocks <= 0) num_blocks = dim;
    ProblemInstance p;
    p.partition = BlockPartition::equal_blocks(dim, num_blocks);
    p.lipschitz_L = 2.0;
    p.convexity_class = Convexity::nonconvex;
    p.optimal_value = 0.0;
    p.objective = [](const Vector& x) {
        double s = 0.0;
        for (int j = 0; j < x.size(); ++j) {
            double u2 = x[j] * x[j];
            s += u2 / (1.0 + u2);
        }
        return s;
    };
    p.gradient = [](const Vector& x) {
        Vector g(x.size());
        for (int j = 0; j < x.size(); ++j) {
            double t = 1.0 + x[j] * x[j];
            g[j] = 2.0 * x[j] / (t * t);
        }
        return g;
    };
    p.name = "nonconvex";
    return p;
}

}  // namespace abcd
