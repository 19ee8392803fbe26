#pragma once

#include <Eigen/Dense>

#include "sysid/stable_spline.hpp"

namespace sysid {

// Gaussian posterior of the impulse response given output data, plus the
// second-moment quantities consumed by the EM M-step.
struct PosteriorMoments {
    Eigen::VectorXd g_hat;     // posterior mean
    Eigen::MatrixXd cov;       // posterior covariance, symmetric PD
    Eigen::MatrixXd s_moment;  // cov + g_hat * g_hat^T
    Eigen::VectorXd d_diag;    // diagonal of Delta * s_moment * Delta^T
};

// Posterior mean/covariance of g under the stable spline prior,
// cov = (U^T U / sigma2 + (lambda K)^{-1})^{-1}, g_hat = cov U^T y / sigma2.
// Requires lambda > 0 and beta in (0, 1). On an ill-conditioned system a
// jitter of 1e-10 * trace/n is applied once; persistent failure throws
// std::runtime_error with a condition diagnostic.
PosteriorMoments posterior_moments(const Eigen::VectorXd& y,
                                   const Eigen::MatrixXd& U,
                                   const Hyperparameters& hp);

// log N(y; 0, lambda U K U^T + sigma2 I). Uses the n x n primal route
// (determinant lemma) when lambda > 0; collapses to a white Gaussian
// density at lambda = 0.
double log_marginal_likelihood(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& U,
                               const Hyperparameters& hp);

// Least-squares noise variance estimate: FIR fit on the fully-known
// regressor rows t >= n-1, residual sample variance with denominator
// (rows - n). Requires N - (n-1) > n.
double estimate_noise_variance(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& u_plus, int n);

}  // namespace sysid
