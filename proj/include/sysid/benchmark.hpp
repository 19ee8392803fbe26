#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sysid/arma.hpp"

namespace sysid {

struct BenchmarkConfig {
    int runs = 50;
    std::vector<int> sample_sizes{150, 400};
    int n = 100;                 // impulse response length
    int system_order = 40;       // even, conjugate pole/zero pairs
    int arma_order = 8;          // even
    double snr = 20.0;           // noiseless-output variance over noise variance
    std::uint64_t seed = 1;
    std::vector<std::string> estimators{"trunc", "zeros", "modless",
                                        "mean",  "joint", "oracle"};
    CovMode input_cov_mode = CovMode::stationary;
    int parallel = 0;            // 0 selects the hardware concurrency
    bool include_timing = false; // measured wall times in records (non-reproducible)
    bool estimate_noise = false; // least-squares sigma2 instead of the true value
    bool force_zero_ic = false;  // generate datasets with u_minus = 0

    void validate() const;
};

struct RunRecord {
    int run_id = 0;
    int N = 0;
    std::string estimator;
    double fit = 0.0;
    int iters = 0;
    bool converged = false;
    double wall_time = 0.0;  // seconds; written as 0 unless include_timing
    bool failed = false;
    std::string error;
};

struct SummaryEntry {
    int N = 0;
    std::string estimator;
    double mean_fit = 0.0;
    double stderr_fit = 0.0;
    int failures = 0;
    int count = 0;  // successful runs entering the mean
};

struct BenchmarkResult {
    std::vector<RunRecord> records;
    std::vector<SummaryEntry> summary;
};

// splitmix64-based mixing of a seed with stream identifiers; stable across
// platforms and documented so runs can be reproduced externally.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Numerator/denominator coefficients (z^{-1} powers, leading 1) of a random
// rational system: order/2 conjugate pole pairs with modulus in (0.3, 0.95)
// and zero pairs with modulus in (0, 0.99), phases uniform on (0, pi).
void random_system_polynomials(std::uint64_t seed, int order,
                               Eigen::VectorXd& num, Eigen::VectorXd& den);

// First n impulse-response samples of num(z)/den(z) by long division.
Eigen::VectorXd rational_impulse_response(const Eigen::VectorXd& num,
                                          const Eigen::VectorXd& den, int n);

// First n impulse-response samples of a random system; deterministic per seed.
Eigen::VectorXd random_system(std::uint64_t seed, int order, int n);

// Random stable ARMA model with AR pole moduli in (0.8, 0.95), MA zero
// moduli in (0, 0.95) and c_0 = 1.
ArmaModel random_arma(std::uint64_t seed, int order);

// Noise variance giving the requested variance ratio: var(y0) / snr.
double noise_variance_for_snr(const Eigen::VectorXd& y0, double snr);

// One generated experiment; every estimator consumes the same bytes.
struct GeneratedRun {
    Eigen::VectorXd g_true;
    ArmaModel arma;
    Eigen::VectorXd u_minus;  // true initial conditions, oldest first
    Eigen::VectorXd u_plus;
    Eigen::VectorXd y0;       // noiseless output
    Eigen::VectorXd y;
    double sigma2 = 0.0;
};

GeneratedRun generate_run(const BenchmarkConfig& config, int N, int run_id);

BenchmarkResult run_monte_carlo(const BenchmarkConfig& config);

}  // namespace sysid
