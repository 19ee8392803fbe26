#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace sysid {

// Known-spectrum ARMA input model
//   u_t + d_1 u_{t-1} + ... + d_p u_{t-p} = c_0 e_t + ... + c_p e_{t-p},
// driven by unit-variance white Gaussian noise.
struct ArmaModel {
    Eigen::VectorXd d;  // AR coefficients d_1 .. d_p
    Eigen::VectorXd c;  // MA coefficients c_0 .. c_q, c_0 != 0

    // Throws std::invalid_argument when the AR polynomial has roots on or
    // outside the unit circle, or when c_0 == 0.
    void validate() const;

    // First `length` samples of the model's impulse response c(z)/(1 + d(z)).
    Eigen::VectorXd impulse_response(int length) const;
};

enum class CovMode { transient, stationary };

CovMode cov_mode_from_string(const std::string& s);
std::string to_string(CovMode mode);

// Simulates the ARMA recursion from rest, discarding burn_in samples.
// Deterministic given the generator state / seed.
Eigen::VectorXd simulate(const ArmaModel& model, int length, int burn_in,
                         std::mt19937_64& rng);
Eigen::VectorXd simulate(const ArmaModel& model, int length, int burn_in,
                         std::uint64_t seed);

// Covariance of the stacked input vector of the given size.
// transient: (I+D)^{-1} C C^T (I+D)^{-T} with the process started at rest.
// stationary: Toeplitz matrix of the stationary autocovariances.
Eigen::MatrixXd input_covariance(const ArmaModel& model, int size, CovMode mode);

// Gaussian conditional law of the n-1 initial conditions given u_plus.
struct InputConditioning {
    Eigen::VectorXd mean;  // length n-1, oldest first
    Eigen::MatrixXd cov;   // (n-1) x (n-1), symmetric PSD
};

InputConditioning condition_initial(const Eigen::VectorXd& u_plus,
                                    const ArmaModel& model, int n, CovMode mode);

}  // namespace sysid
