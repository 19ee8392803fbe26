#include "sysid/arma.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sysid {

namespace {

// Moduli of the roots of z^p + d_1 z^{p-1} + ... + d_p via the companion matrix.
Eigen::VectorXd ar_root_moduli(const Eigen::VectorXd& d) {
    const int p = static_cast<int>(d.size());
    if (p == 0) return Eigen::VectorXd();
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) companion(0, i) = -d(i);
    for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    return companion.eigenvalues().cwiseAbs();
}

}  // namespace

void ArmaModel::validate() const {
    if (c.size() < 1 || c(0) == 0.0)
        throw std::invalid_argument("ArmaModel: c_0 must be nonzero");
    const Eigen::VectorXd moduli = ar_root_moduli(d);
    if (moduli.size() > 0 && moduli.maxCoeff() >= 1.0)
        throw std::invalid_argument("ArmaModel: AR polynomial is not stable (root modulus " +
                                    std::to_string(moduli.maxCoeff()) + ")");
}

Eigen::VectorXd ArmaModel::impulse_response(int length) const {
    const int p = static_cast<int>(d.size());
    const int q = static_cast<int>(c.size()) - 1;
    Eigen::VectorXd h = Eigen::VectorXd::Zero(length);
    for (int t = 0; t < length; ++t) {
        double acc = (t <= q) ? c(t) : 0.0;
        for (int i = 1; i <= std::min(t, p); ++i) acc -= d(i - 1) * h(t - i);
        h(t) = acc;
    }
    return h;
}

CovMode cov_mode_from_string(const std::string& s) {
    if (s == "transient") return CovMode::transient;
    if (s == "stationary") return CovMode::stationary;
    throw std::invalid_argument("unknown covariance mode: " + s);
}

std::string to_string(CovMode mode) {
    return mode == CovMode::transient ? "transient" : "stationary";
}

Eigen::VectorXd simulate(const ArmaModel& model, int length, int burn_in,
                         std::mt19937_64& rng) {
    model.validate();
    if (length < 1 || burn_in < 0)
        throw std::invalid_argument("simulate: invalid length or burn_in");
    const int p = static_cast<int>(model.d.size());
    const int q = static_cast<int>(model.c.size()) - 1;
    const int total = burn_in + length;

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd e(total), u(total);
    for (int t = 0; t < total; ++t) {
        e(t) = normal(rng);
        double acc = 0.0;
        for (int i = 0; i <= std::min(t, q); ++i) acc += model.c(i) * e(t - i);
        for (int i = 1; i <= std::min(t, p); ++i) acc -= model.d(i - 1) * u(t - i);
        u(t) = acc;
    }
    return u.tail(length);
}

Eigen::VectorXd simulate(const ArmaModel& model, int length, int burn_in,
                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return simulate(model, length, burn_in, rng);
}

Eigen::MatrixXd input_covariance(const ArmaModel& model, int size, CovMode mode) {
    model.validate();
    if (size < 1)
        throw std::invalid_argument("input_covariance: size must be positive");
    const int p = static_cast<int>(model.d.size());
    const int q = static_cast<int>(model.c.size()) - 1;

    if (mode == CovMode::transient) {
        // Sigma_u = (I+D)^{-1} C C^T (I+D)^{-T} with banded Toeplitz factors.
        Eigen::MatrixXd ID = Eigen::MatrixXd::Identity(size, size);
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(size, size);
        for (int i = 0; i < size; ++i) {
            for (int j = std::max(0, i - p); j < i; ++j) ID(i, j) = model.d(i - j - 1);
            for (int j = std::max(0, i - q); j <= i; ++j) C(i, j) = model.c(i - j);
        }
        const Eigen::MatrixXd X =
            ID.triangularView<Eigen::Lower>().solve(C);
        return X * X.transpose();
    }

    // Stationary autocovariances r(k) = sum_i h_i h_{i+k} with the impulse
    // response truncated once the tail drops below 1e-12 of its peak.
    int len = std::max(size + 1, 64);
    Eigen::VectorXd h;
    const int tail = std::max(p, q) + 1;
    while (true) {
        h = model.impulse_response(len);
        const double peak = h.cwiseAbs().maxCoeff();
        if (h.tail(tail).cwiseAbs().maxCoeff() < 1e-12 * peak || len >= (1 << 20))
            break;
        len *= 2;
    }
    Eigen::VectorXd r(size);
    for (int k = 0; k < size; ++k) {
        double acc = 0.0;
        for (int i = 0; i + k < len; ++i) acc += h(i) * h(i + k);
        r(k) = acc;
    }
    Eigen::MatrixXd S(size, size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j)
            S(i, j) = r(std::abs(i - j));
    return S;
}

InputConditioning condition_initial(const Eigen::VectorXd& u_plus,
                                    const ArmaModel& model, int n, CovMode mode) {
    const int N = static_cast<int>(u_plus.size());
    if (n < 2)
        throw std::invalid_argument("condition_initial: n must be >= 2");

    const int m = N + n - 1;
    const Eigen::MatrixXd S = input_covariance(model, m, mode);
    const Eigen::MatrixXd S_mm = S.topLeftCorner(n - 1, n - 1);
    const Eigen::MatrixXd S_mp = S.topRightCorner(n - 1, N);
    const Eigen::MatrixXd S_pp = S.bottomRightCorner(N, N);

    Eigen::LLT<Eigen::MatrixXd> llt(S_pp);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("condition_initial: observed-input covariance is singular");

    InputConditioning out;
    out.mean = S_mp * llt.solve(u_plus);
    out.cov = S_mm - S_mp * llt.solve(S_mp.transpose());
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

}  // namespace sysid
