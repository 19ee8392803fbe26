#include "sysid/core_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sysid {

void Dataset::validate() const {
    if (n < 2)
        throw std::invalid_argument("Dataset: n must be at least 2");
    if (y.size() != u_plus.size())
        throw std::invalid_argument("Dataset: u_plus and y must have equal length");
    if (N() < n)
        throw std::invalid_argument("Dataset: need N >= n, got N=" +
                                    std::to_string(N()) + ", n=" + std::to_string(n));
    if (u_minus_true && u_minus_true->size() != n - 1)
        throw std::invalid_argument("Dataset: u_minus_true must have length n-1");
    if (!u_plus.allFinite() || !y.allFinite())
        throw std::invalid_argument("Dataset: non-finite samples");
}

RegressorMatrix build_regressor(const Eigen::VectorXd& u_plus,
                                const Eigen::VectorXd& u_minus, int n) {
    const int N = static_cast<int>(u_plus.size());
    if (n < 2)
        throw std::invalid_argument("build_regressor: n must be at least 2");
    if (N < n)
        throw std::invalid_argument("build_regressor: need N >= n");
    if (u_minus.size() != n - 1)
        throw std::invalid_argument("build_regressor: u_minus must have length n-1");

    RegressorMatrix reg;
    reg.known_part = Eigen::MatrixXd::Zero(N, n);
    reg.ic_part = Eigen::MatrixXd::Zero(N, n);
    for (int t = 0; t < N; ++t) {
        for (int k = 0; k < n; ++k) {
            const int idx = t - k;
            if (idx >= 0)
                reg.known_part(t, k) = u_plus(idx);
            else
                reg.ic_part(t, k) = u_minus(n - 1 + idx);  // u_{idx}, oldest first
        }
    }
    reg.entries = reg.known_part + reg.ic_part;
    return reg;
}

Eigen::MatrixXd ic_regressor(const Eigen::VectorXd& g_hat, int N) {
    const int n = static_cast<int>(g_hat.size());
    if (n < 2)
        throw std::invalid_argument("ic_regressor: impulse response needs length >= 2");
    if (N < 1)
        throw std::invalid_argument("ic_regressor: N must be positive");

    // Column m corresponds to u_{-(n-1-m)}; row t picks up g_{t + n-1-m}
    // as long as that index stays below n, i.e. t <= m.
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, n - 1);
    for (int m = 0; m < n - 1; ++m)
        for (int t = 0; t <= m && t < N; ++t)
            G(t, m) = g_hat(t + n - 1 - m);
    return G;
}

Eigen::VectorXd convolve(const Eigen::VectorXd& g, const Eigen::VectorXd& u_full) {
    const int n = static_cast<int>(g.size());
    const int N = static_cast<int>(u_full.size()) - (n - 1);
    if (N < 1)
        throw std::invalid_argument("convolve: u_full shorter than impulse response");

    Eigen::VectorXd y(N);
    for (int t = 0; t < N; ++t) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += g(k) * u_full(n - 1 + t - k);
        y(t) = acc;
    }
    return y;
}

double fit_score(const Eigen::VectorXd& g_true, const Eigen::VectorXd& g_est) {
    if (g_true.size() != g_est.size())
        throw std::invalid_argument("fit_score: length mismatch");
    const double mean = g_true.mean();
    const double denom = (g_true.array() - mean).matrix().norm();
    if (denom == 0.0)
        throw std::invalid_argument("fit_score: undefined for constant g_true");
    return 100.0 * (1.0 - (g_true - g_est).norm() / denom);
}

}  // namespace sysid
