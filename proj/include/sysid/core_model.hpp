#pragma once

#include <Eigen/Dense>
#include <optional>

namespace sysid {

// Input/output record of one identification experiment.
// u_minus_true, when present, holds the pre-experiment input samples
// u_{-(n-1)}, ..., u_{-1} ordered oldest first.
struct Dataset {
    Eigen::VectorXd u_plus;                        // u_0 .. u_{N-1}
    Eigen::VectorXd y;                             // y_0 .. y_{N-1}
    std::optional<Eigen::VectorXd> u_minus_true;   // length n-1, oldest first
    int n = 0;                                     // FIR length

    int N() const { return static_cast<int>(u_plus.size()); }

    // Throws std::invalid_argument on inconsistent sizes or N < n.
    void validate() const;
};

// Toeplitz regressor U with entry (t,k) = u_{t-k}, split into the part
// built from observed samples and the part carrying initial conditions.
struct RegressorMatrix {
    Eigen::MatrixXd entries;      // U = known_part + ic_part
    Eigen::MatrixXd known_part;   // zeros where u would need a negative time index
    Eigen::MatrixXd ic_part;      // nonzero only at (t,k) with t-k < 0
};

// Builds the N x n regressor from observed input and initial conditions.
// u_minus is ordered oldest first: u_minus[0] = u_{-(n-1)}.
RegressorMatrix build_regressor(const Eigen::VectorXd& u_plus,
                                const Eigen::VectorXd& u_minus, int n);

// N x (n-1) matrix G such that G * u_minus == ic_part(u_minus) * g for every
// u_minus, with columns ordered oldest first. Rows t >= n-1 are zero.
Eigen::MatrixXd ic_regressor(const Eigen::VectorXd& g_hat, int N);

// Convolution output y_t = sum_k g_k u_{t-k}; u_full = [u_minus; u_plus]
// has length N + n - 1 and the result has length N.
Eigen::VectorXd convolve(const Eigen::VectorXd& g, const Eigen::VectorXd& u_full);

// Fit score in percent: 100 * (1 - |g_true - g_est| / |g_true - mean(g_true)|).
// Throws std::invalid_argument when g_true is constant.
double fit_score(const Eigen::VectorXd& g_true, const Eigen::VectorXd& g_est);

}  // namespace sysid
