#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sysid/arma.hpp"
#include "sysid/core_model.hpp"
#include "sysid/stable_spline.hpp"

namespace sysid {

struct EmOptions {
    int max_iters = 200;
    double rel_tol = 1e-6;       // on the max relative change of [lambda, beta, u_minus]
    int beta_grid = 500;         // grid points, log-spaced in 1-beta
    double beta_lo = 0.001;
    double beta_hi = 0.999;
    double init_lambda = -1.0;   // <= 0 selects the sample variance of y
    double init_beta = 0.8;
    Eigen::VectorXd init_u_minus;  // empty selects the estimator default
    bool track_objective = true;   // per-iteration objective evaluation

    void validate() const;
};

// Coefficients of the expected complete log-likelihood as a quadratic in
// the initial conditions: Q1(u) = -u^T a_mat u / (2 sigma2) + u^T b_vec / sigma2.
struct QuadraticTerms {
    Eigen::MatrixXd a_mat;  // (n-1) x (n-1), symmetric PSD
    Eigen::VectorXd b_vec;  // length n-1
};

struct EstimationResult {
    Eigen::VectorXd g_hat;
    Eigen::MatrixXd g_cov;
    Eigen::VectorXd u_minus_hat;          // size 0 for the truncation baseline
    Hyperparameters hp;
    std::vector<double> objective_trace;  // nondecreasing up to fp slack
    int iters = 0;
    bool converged = false;
};

// Assembles a_mat and b_vec from the posterior second moment without
// materializing the Kronecker-product form.
QuadraticTerms quadratic_terms(const Eigen::MatrixXd& s_moment,
                               const Eigen::VectorXd& g_hat,
                               const Eigen::VectorXd& u_plus,
                               const Eigen::VectorXd& y);

// Profile M-step objective in beta (lambda maximized out):
//   n * log(sum_i d_i w_recip_i) + sum_i log w_diag_i,
// evaluated in the log domain so large exponents cannot overflow.
double beta_objective(const Eigen::VectorXd& d_diag, double beta);

// Grid minimization of beta_objective with golden-section refinement
// inside the winning cell. Throws on an all-zero d_diag.
double beta_update(const Eigen::VectorXd& d_diag, const EmOptions& opts = {});

// Closed-form scale update (1/n) sum_i d_i w_recip_i.
double lambda_update(const Eigen::VectorXd& d_diag, double beta);

// Initial-condition M-step updates. The joint form solves
//   (a_mat/sigma2 + prior_cov^{-1}) u = b_vec/sigma2 + prior_cov^{-1} prior_mean.
Eigen::VectorXd modless_ic_update(const QuadraticTerms& qt);
Eigen::VectorXd joint_ic_update(const QuadraticTerms& qt, double sigma2,
                                const Eigen::MatrixXd& prior_cov,
                                const Eigen::VectorXd& prior_mean);

// The EM estimators. sigma2 is the known noise variance.
EstimationResult run_modless(const Dataset& data, double sigma2,
                             const EmOptions& opts = {});
EstimationResult run_condmean(const Dataset& data, const ArmaModel& model,
                              double sigma2, const EmOptions& opts = {},
                              CovMode mode = CovMode::stationary);
EstimationResult run_joint(const Dataset& data, const ArmaModel& model,
                           double sigma2, const EmOptions& opts = {},
                           CovMode mode = CovMode::stationary);
EstimationResult run_fixed_ic(const Dataset& data,
                              const Eigen::VectorXd& u_minus_fixed,
                              double sigma2, const EmOptions& opts = {});
EstimationResult run_truncated(const Dataset& data, double sigma2,
                               const EmOptions& opts = {});

}  // namespace sysid
