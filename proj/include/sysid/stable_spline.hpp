#pragma once

#include <Eigen/Dense>

namespace sysid {

// Kernel scale, decay, and known measurement noise variance.
struct Hyperparameters {
    double lambda = 1.0;   // kernel scale, >= 0
    double beta = 0.8;     // decay, in [0, 1)
    double sigma2 = 1.0;   // noise variance, > 0

    void validate() const;
};

// Factorization K_beta = Delta^{-1} * diag(w_diag) * Delta^{-T} of the
// first-order stable spline kernel; w_recip holds the reciprocal weights.
struct SplineFactorization {
    Eigen::MatrixXd delta;     // upper bidiagonal, +1 diagonal, -1 superdiagonal
    Eigen::VectorXd w_diag;    // (beta - beta^2) * [1, beta, ..., beta^{n-1}/(1-beta)]
    Eigen::VectorXd w_recip;   // elementwise reciprocal of w_diag
};

// Dense kernel-size cap; typical problems use n ~ 100.
int kernel_size_cap();
void set_kernel_size_cap(int cap);

// Dense first-order stable spline (TC) kernel, entry (i,j) = beta^max(i,j)
// with 1-based indices. Requires 0 <= beta < 1 and 2 <= n <= cap.
Eigen::MatrixXd kernel_matrix(double beta, int n);

// Discrete-derivator factorization of the kernel. Requires beta in (0, 1)
// bounded away from 0 (beta >= 1e-6).
SplineFactorization factorization(double beta, int n);

// Upper-bidiagonal derivator: (Delta g)_i = g_i - g_{i+1}, last row identity.
Eigen::MatrixXd derivator(int n);

}  // namespace sysid
