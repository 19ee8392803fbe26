#include "sysid/posterior.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sysid/log.hpp"

namespace sysid {

namespace {

// (lambda K)^{-1} = Delta^T diag(w_recip) Delta / lambda, exact through the
// kernel factorization.
Eigen::MatrixXd scaled_kernel_inverse(const SplineFactorization& f, double lambda) {
    const Eigen::MatrixXd WD = f.w_recip.asDiagonal() * f.delta;
    return f.delta.transpose() * WD / lambda;
}

// Cholesky of the normal-equations matrix with a one-shot jitter fallback.
Eigen::LLT<Eigen::MatrixXd> factor_normal_equations(const Eigen::MatrixXd& H) {
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() == Eigen::Success) return llt;

    const int n = static_cast<int>(H.rows());
    const double jitter = 1e-10 * H.trace() / n;
    log::warn("normal equations factorization failed, retrying with jitter " +
              std::to_string(jitter));
    llt.compute(H + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
        throw std::runtime_error(
            "posterior: normal-equations matrix not positive definite "
            "(eigenvalue range [" + std::to_string(es.eigenvalues().minCoeff()) +
            ", " + std::to_string(es.eigenvalues().maxCoeff()) + "])");
    }
    return llt;
}

void check_inputs(const Eigen::VectorXd& y, const Eigen::MatrixXd& U,
                  const Hyperparameters& hp) {
    hp.validate();
    if (U.rows() != y.size())
        throw std::invalid_argument("posterior: U rows must match y length");
    if (U.cols() < 2)
        throw std::invalid_argument("posterior: impulse response length must be >= 2");
}

}  // namespace

PosteriorMoments posterior_moments(const Eigen::VectorXd& y,
                                   const Eigen::MatrixXd& U,
                                   const Hyperparameters& hp) {
    check_inputs(y, U, hp);
    if (!(hp.lambda > 0.0))
        throw std::invalid_argument("posterior_moments: lambda must be > 0");
    const int n = static_cast<int>(U.cols());

    const SplineFactorization fact = factorization(hp.beta, n);
    const Eigen::MatrixXd H =
        U.transpose() * U / hp.sigma2 + scaled_kernel_inverse(fact, hp.lambda);
    const auto llt = factor_normal_equations(H);

    PosteriorMoments pm;
    pm.g_hat = llt.solve(U.transpose() * y / hp.sigma2);
    pm.cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
    pm.cov = 0.5 * (pm.cov + pm.cov.transpose()).eval();
    pm.s_moment = pm.cov + pm.g_hat * pm.g_hat.transpose();

    // d_i = (Delta S Delta^T)_{ii}; the bidiagonal structure reduces this to
    // a four-entry stencil, last row passes through.
    pm.d_diag.resize(n);
    const Eigen::MatrixXd& S = pm.s_moment;
    for (int i = 0; i + 1 < n; ++i)
        pm.d_diag(i) = std::max(
            0.0, S(i, i) - S(i, i + 1) - S(i + 1, i) + S(i + 1, i + 1));
    pm.d_diag(n - 1) = std::max(0.0, S(n - 1, n - 1));
    return pm;
}

double log_marginal_likelihood(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& U,
                               const Hyperparameters& hp) {
    check_inputs(y, U, hp);
    const int N = static_cast<int>(y.size());
    const int n = static_cast<int>(U.cols());
    const double log2pi = std::log(2.0 * std::numbers::pi);

    if (hp.lambda == 0.0) {
        // Prior collapses: y ~ N(0, sigma2 I).
        return -0.5 * y.squaredNorm() / hp.sigma2 -
               0.5 * N * std::log(hp.sigma2) - 0.5 * N * log2pi;
    }

    // Primal route: with P = lambda K,
    //   y^T Sigma_y^{-1} y = (y^T y - y^T U g_hat) / sigma2,
    //   logdet Sigma_y = N log sigma2 + logdet P + logdet(U^T U/sigma2 + P^{-1}).
    const SplineFactorization fact = factorization(hp.beta, n);
    const Eigen::MatrixXd H =
        U.transpose() * U / hp.sigma2 + scaled_kernel_inverse(fact, hp.lambda);
    const auto llt = factor_normal_equations(H);

    const Eigen::VectorXd uty = U.transpose() * y;
    const Eigen::VectorXd g_hat = llt.solve(uty / hp.sigma2);
    const double quad = (y.squaredNorm() - uty.dot(g_hat)) / hp.sigma2;

    double logdet_H = 0.0;
    for (int i = 0; i < n; ++i) logdet_H += std::log(llt.matrixLLT()(i, i));
    logdet_H *= 2.0;
    const double logdet_P =
        n * std::log(hp.lambda) + fact.w_diag.array().log().sum();
    const double logdet_Sy = N * std::log(hp.sigma2) + logdet_P + logdet_H;

    return -0.5 * quad - 0.5 * logdet_Sy - 0.5 * N * log2pi;
}

double estimate_noise_variance(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& u_plus, int n) {
    const int N = static_cast<int>(u_plus.size());
    if (y.size() != N)
        throw std::invalid_argument("estimate_noise_variance: length mismatch");
    const int rows = N - (n - 1);
    if (rows <= n)
        throw std::invalid_argument(
            "estimate_noise_variance: need N - (n-1) > n fully-known rows");

    Eigen::MatrixXd A(rows, n);
    for (int r = 0; r < rows; ++r)
        for (int k = 0; k < n; ++k)
            A(r, k) = u_plus(n - 1 + r - k);
    const Eigen::VectorXd b = y.tail(rows);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < n)
        throw std::runtime_error("estimate_noise_variance: singular least-squares problem");
    const Eigen::VectorXd g = qr.solve(b);
    return (b - A * g).squaredNorm() / (rows - n);
}

}  // namespace sysid
