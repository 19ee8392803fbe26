#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sysid/arma.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace sysid;

namespace {

ArmaModel white_noise(double c0 = 1.0) {
    ArmaModel m;
    m.d = VectorXd();
    m.c = VectorXd::Constant(1, c0);
    return m;
}

ArmaModel ar1(double a, double c0 = 1.0) {
    ArmaModel m;
    m.d = VectorXd::Constant(1, -a);  // u_t = a u_{t-1} + e_t
    m.c = VectorXd::Constant(1, c0);
    return m;
}

// Conditional law of the first n-1 entries of a joint zero-mean Gaussian
// given the remaining ones, computed from the dense joint covariance.
InputConditioning brute_force_conditioning(const MatrixXd& sigma,
                                           const VectorXd& u_plus, int n) {
    const int m = n - 1;
    const int N = static_cast<int>(sigma.rows()) - m;
    const MatrixXd S_mm = sigma.topLeftCorner(m, m);
    const MatrixXd S_mp = sigma.topRightCorner(m, N);
    const MatrixXd S_pp = sigma.bottomRightCorner(N, N);
    const MatrixXd S_pp_inv = S_pp.inverse();
    InputConditioning out;
    out.mean = S_mp * S_pp_inv * u_plus;
    out.cov = S_mm - S_mp * S_pp_inv * S_mp.transpose();
    return out;
}

}  // namespace

TEST_CASE("stability validation") {
    CHECK_NOTHROW(ar1(0.99).validate());
    CHECK_THROWS_AS(ar1(1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ar1(-1.2).validate(), std::invalid_argument);
    ArmaModel bad = white_noise(0.0);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("white-noise simulation has unit variance") {
    const VectorXd u = simulate(white_noise(), 100000, 0, 42);
    const double var = u.squaredNorm() / u.size() - std::pow(u.mean(), 2);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("AR(1) lag-1 autocorrelation approaches the pole") {
    const double a = 0.9;
    const VectorXd u = simulate(ar1(a), 100000, 500, 7);
    double r0 = 0.0, r1 = 0.0;
    for (int t = 0; t + 1 < u.size(); ++t) {
        r0 += u(t) * u(t);
        r1 += u(t) * u(t + 1);
    }
    CHECK(std::abs(r1 / r0 - a) < 0.02);
}

TEST_CASE("simulation is deterministic per seed") {
    const auto m = ar1(0.5);
    const VectorXd a = simulate(m, 200, 50, 99);
    const VectorXd b = simulate(m, 200, 50, 99);
    const VectorXd c = simulate(m, 200, 50, 100);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("white-noise covariance is c0^2 I in both modes") {
    for (auto mode : {CovMode::transient, CovMode::stationary}) {
        const MatrixXd S = input_covariance(white_noise(1.7), 6, mode);
        CHECK((S - 1.7 * 1.7 * MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("AR(1) stationary autocovariance matches the analytic form") {
    const double a = 0.8;
    const MatrixXd S = input_covariance(ar1(a), 8, CovMode::stationary);
    const double r0 = 1.0 / (1.0 - a * a);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(S(i, j) ==
                  doctest::Approx(r0 * std::pow(a, std::abs(i - j))).epsilon(1e-10));
}

TEST_CASE("transient covariance starts the process at rest") {
    const MatrixXd S = input_covariance(ar1(0.9, 1.3), 5, CovMode::transient);
    CHECK(S(0, 0) == doctest::Approx(1.3 * 1.3).epsilon(1e-12));
    // Variance grows toward the stationary level.
    for (int i = 1; i < 5; ++i) CHECK(S(i, i) > S(i - 1, i - 1));
}

TEST_CASE("covariance is symmetric PSD in both modes") {
    ArmaModel m;
    m.d = VectorXd(2);
    m.d << -1.2, 0.5;  // stable AR(2)
    m.c = VectorXd(2);
    m.c << 1.0, 0.4;
    for (auto mode : {CovMode::transient, CovMode::stationary}) {
        const MatrixXd S = input_covariance(m, 300, mode);
        CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()),
                                                   Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());
    }
}

TEST_CASE("white-noise conditioning is trivial") {
    const auto cond = condition_initial(VectorXd::Random(10), white_noise(1.5), 4,
                                        CovMode::stationary);
    CHECK(cond.mean.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cond.cov - 1.5 * 1.5 * MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("conditioning matches brute force on random models") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mag(0.2, 0.9);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 30; ++trial) {
        ArmaModel m;
        const double a = mag(rng);
        m.d = VectorXd(2);
        m.d << -2.0 * a * 0.5, a * a;  // conjugate pair at modulus a
        m.c = VectorXd(2);
        m.c << 1.0, normal(rng) * 0.5;

        const int n = 2 + static_cast<int>(rng() % 4);
        const int N = n + static_cast<int>(rng() % (11 - n));
        VectorXd u_plus(N);
        for (int i = 0; i < N; ++i) u_plus(i) = normal(rng);

        const auto mode = (trial % 2 == 0) ? CovMode::stationary : CovMode::transient;
        const MatrixXd sigma = input_covariance(m, N + n - 1, mode);
        const auto ref = brute_force_conditioning(sigma, u_plus, n);
        const auto fast = condition_initial(u_plus, m, n, mode);
        CHECK((fast.mean - ref.mean).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((fast.cov - ref.cov).cwiseAbs().maxCoeff() < 1e-8);

        // Law of total covariance.
        const int mm = n - 1;
        const MatrixXd S_mp = sigma.topRightCorner(mm, N);
        const MatrixXd recon = fast.cov + S_mp * sigma.bottomRightCorner(N, N).inverse() *
                                              S_mp.transpose();
        CHECK((sigma.topLeftCorner(mm, mm) - recon).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("conditional covariance ignores the observed values") {
    const auto m = ar1(0.7);
    const auto c1 = condition_initial(VectorXd::Random(8), m, 3, CovMode::stationary);
    const auto c2 = condition_initial(VectorXd::Random(8), m, 3, CovMode::stationary);
    CHECK((c1.cov - c2.cov).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("AR(1) conditional mean is the backward one-step predictor") {
    const double a = 0.6;
    VectorXd u_plus(6);
    u_plus << 1.0, -0.3, 0.2, 0.9, -1.1, 0.4;
    const auto cond = condition_initial(u_plus, ar1(a), 2, CovMode::stationary);
    // For an AR(1), u_{-1} | u_+ depends on u_0 only, with coefficient a.
    CHECK(cond.mean(0) == doctest::Approx(a * u_plus(0)).epsilon(1e-8));
}
