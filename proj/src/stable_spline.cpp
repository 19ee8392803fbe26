#include "sysid/stable_spline.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sysid {

namespace {
int g_kernel_cap = 512;

void check_size(int n) {
    if (n < 2)
        throw std::invalid_argument("stable spline kernel needs n >= 2");
    if (n > g_kernel_cap)
        throw std::invalid_argument("kernel size " + std::to_string(n) +
                                    " exceeds cap " + std::to_string(g_kernel_cap));
}
}  // namespace

void Hyperparameters::validate() const {
    if (!(lambda >= 0.0))
        throw std::invalid_argument("Hyperparameters: lambda must be >= 0");
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("Hyperparameters: beta must be in [0, 1)");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("Hyperparameters: sigma2 must be > 0");
}

int kernel_size_cap() { return g_kernel_cap; }

void set_kernel_size_cap(int cap) {
    if (cap < 2)
        throw std::invalid_argument("kernel size cap must be >= 2");
    g_kernel_cap = cap;
}

Eigen::MatrixXd kernel_matrix(double beta, int n) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("kernel_matrix: beta must be in [0, 1)");
    check_size(n);

    // beta^1 .. beta^n; entry (i,j) = pow[max(i,j)] with 1-based indices.
    Eigen::VectorXd pow(n + 1);
    pow(0) = 1.0;
    for (int k = 1; k <= n; ++k) pow(k) = pow(k - 1) * beta;

    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            K(i, j) = pow(std::max(i, j) + 1);
    return K;
}

SplineFactorization factorization(double beta, int n) {
    if (!(beta >= 1e-6 && beta < 1.0))
        throw std::invalid_argument("factorization: beta must be in [1e-6, 1)");
    check_size(n);

    SplineFactorization f;
    f.delta = derivator(n);
    f.w_diag.resize(n);
    f.w_recip.resize(n);
    const double scale = beta - beta * beta;
    double p = 1.0;  // beta^{i-1}
    for (int i = 0; i < n - 1; ++i) {
        f.w_diag(i) = scale * p;
        f.w_recip(i) = 1.0 / f.w_diag(i);
        p *= beta;
    }
    f.w_diag(n - 1) = scale * p / (1.0 - beta);  // = beta^n
    f.w_recip(n - 1) = 1.0 / f.w_diag(n - 1);
    return f;
}

Eigen::MatrixXd derivator(int n) {
    if (n < 1)
        throw std::invalid_argument("derivator: n must be positive");
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i + 1 < n; ++i) D(i, i + 1) = -1.0;
    return D;
}

}  // namespace sysid
