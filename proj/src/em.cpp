#include "sysid/em.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sysid/log.hpp"
#include "sysid/posterior.hpp"

namespace sysid {

void EmOptions::validate() const {
    if (max_iters < 1)
        throw std::invalid_argument("EmOptions: max_iters must be >= 1");
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("EmOptions: rel_tol must be > 0");
    if (beta_grid < 2)
        throw std::invalid_argument("EmOptions: beta_grid must be >= 2");
    if (!(0.0 < beta_lo && beta_lo < beta_hi && beta_hi < 1.0))
        throw std::invalid_argument("EmOptions: need 0 < beta_lo < beta_hi < 1");
    if (!(init_beta > 0.0 && init_beta < 1.0))
        throw std::invalid_argument("EmOptions: init_beta must be in (0, 1)");
}

QuadraticTerms quadratic_terms(const Eigen::MatrixXd& s_moment,
                               const Eigen::VectorXd& g_hat,
                               const Eigen::VectorXd& u_plus,
                               const Eigen::VectorXd& y) {
    const int n = static_cast<int>(s_moment.rows());
    const int N = static_cast<int>(y.size());
    if (s_moment.cols() != n || g_hat.size() != n)
        throw std::invalid_argument("quadratic_terms: inconsistent shapes");
    if (u_plus.size() != N)
        throw std::invalid_argument("quadratic_terms: u_plus and y length mismatch");
    if (N < n - 1)
        throw std::invalid_argument("quadratic_terms: need N >= n-1");

    // Column m of the initial-condition part of the regressor places u_minus(m)
    // on the diagonal segment (t, t + n-1-m), t = 0..m. The quadratic and
    // linear coefficients reduce to structured sums over S along these segments.
    QuadraticTerms qt;
    qt.a_mat.resize(n - 1, n - 1);
    qt.b_vec.resize(n - 1);
    for (int m = 0; m < n - 1; ++m) {
        for (int mp = 0; mp <= m; ++mp) {
            double acc = 0.0;
            for (int t = 0; t <= mp; ++t)
                acc += s_moment(t + n - 1 - m, t + n - 1 - mp);
            qt.a_mat(m, mp) = acc;
            qt.a_mat(mp, m) = acc;
        }
        double data_term = 0.0;      // y^T U_- g collapsed onto column m
        double coupling = 0.0;       // Tr{U_+^T U_- S} collapsed onto column m
        for (int t = 0; t <= m; ++t) {
            const int r = t + n - 1 - m;
            data_term += g_hat(r) * y(t);
            for (int j = 0; j <= t; ++j)
                coupling += u_plus(t - j) * s_moment(r, j);
        }
        qt.b_vec(m) = data_term - coupling;
    }
    return qt;
}

namespace {

void check_d_diag(const Eigen::VectorXd& d_diag) {
    if (d_diag.size() < 2)
        throw std::invalid_argument("d_diag must have length >= 2");
    if ((d_diag.array() < 0.0).any())
        throw std::invalid_argument("d_diag entries must be nonnegative");
    if (d_diag.maxCoeff() == 0.0)
        throw std::runtime_error("degenerate M-step: d_diag is identically zero");
}

// Golden-section minimization of f on [a, b] down to the given width.
double golden_section(const std::function<double(double)>& f, double a, double b,
                      double width) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > width) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

}  // namespace

double beta_objective(const Eigen::VectorXd& d_diag, double beta) {
    const int n = static_cast<int>(d_diag.size());
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("beta_objective: beta must be in (0, 1)");

    const double log_beta = std::log(beta);
    const double log_1mb = std::log1p(-beta);

    // log Tr{K^{-1} S} = logsumexp over log(d_i) + log(w_recip_i); the
    // reciprocal weights are beta^{-i}/(1-beta) for i < n and beta^{-n} for i = n.
    double max_term = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd terms(n);
    for (int i = 1; i <= n; ++i) {
        if (d_diag(i - 1) == 0.0) {
            terms(i - 1) = -std::numeric_limits<double>::infinity();
            continue;
        }
        double t = std::log(d_diag(i - 1)) - i * log_beta;
        if (i < n) t -= log_1mb;
        terms(i - 1) = t;
        max_term = std::max(max_term, t);
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        if (std::isfinite(terms(i))) sum += std::exp(terms(i) - max_term);
    const double log_trace = max_term + std::log(sum);

    // logdet K = n log(beta(1-beta)) + n(n-1)/2 log beta - log(1-beta).
    const double logdet_kernel = n * (log_beta + log_1mb) +
                                 0.5 * n * (n - 1.0) * log_beta - log_1mb;
    return n * log_trace + logdet_kernel;
}

double beta_update(const Eigen::VectorXd& d_diag, const EmOptions& opts) {
    opts.validate();
    check_d_diag(d_diag);

    const auto objective = [&](double b) { return beta_objective(d_diag, b); };

    // Grid log-spaced in 1-beta so that values near 1 are well resolved.
    const int G = opts.beta_grid;
    const double lo = std::log(1.0 - opts.beta_lo);
    const double hi = std::log(1.0 - opts.beta_hi);
    Eigen::VectorXd grid(G);
    for (int j = 0; j < G; ++j)
        grid(j) = 1.0 - std::exp(lo + (hi - lo) * j / (G - 1));

    int best = 0;
    double best_val = objective(grid(0));
    for (int j = 1; j < G; ++j) {
        const double v = objective(grid(j));
        if (v < best_val) {
            best_val = v;
            best = j;
        }
    }

    const double a = grid(std::max(0, best - 1));
    const double b = grid(std::min(G - 1, best + 1));
    const double refined = golden_section(objective, a, b, 1e-6);
    return objective(refined) < best_val ? refined : grid(best);
}

double lambda_update(const Eigen::VectorXd& d_diag, double beta) {
    check_d_diag(d_diag);
    const SplineFactorization f = factorization(beta, static_cast<int>(d_diag.size()));
    return d_diag.dot(f.w_recip) / static_cast<double>(d_diag.size());
}

Eigen::VectorXd modless_ic_update(const QuadraticTerms& qt) {
    // The quadratic form is flat along directions where the impulse response
    // tail carries no energy, so the system can be arbitrarily close to
    // singular. The minimum-norm solution picks the bounded maximizer.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(qt.a_mat);
    return cod.solve(qt.b_vec);
}

Eigen::VectorXd joint_ic_update(const QuadraticTerms& qt, double sigma2,
                                const Eigen::MatrixXd& prior_cov,
                                const Eigen::VectorXd& prior_mean) {
    const int m = static_cast<int>(qt.b_vec.size());
    Eigen::LLT<Eigen::MatrixXd> prior_llt(prior_cov);
    if (prior_llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * prior_cov.trace() / m;
        log::warn("joint_ic_update: prior covariance factorization failed, jitter " +
                  std::to_string(jitter));
        prior_llt.compute(prior_cov + jitter * Eigen::MatrixXd::Identity(m, m));
        if (prior_llt.info() != Eigen::Success)
            throw std::runtime_error("joint_ic_update: prior covariance not PD");
    }
    const Eigen::MatrixXd prior_inv =
        prior_llt.solve(Eigen::MatrixXd::Identity(m, m));
    const Eigen::MatrixXd H = qt.a_mat / sigma2 + prior_inv;
    const Eigen::VectorXd rhs = qt.b_vec / sigma2 + prior_inv * prior_mean;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("joint_ic_update: update system factorization failed");
    return ldlt.solve(rhs);
}

namespace {

enum class IcMode { fixed, modless, joint };

double sample_variance(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / std::max<int>(1, v.size() - 1);
}

double rel_change(double now, double before) {
    return std::abs(now - before) / std::max(std::abs(before), 1e-300);
}

// Log density of the initial-condition prior (joint estimator only).
double log_ic_prior(const Eigen::VectorXd& u, const InputConditioning& prior,
                    const Eigen::LLT<Eigen::MatrixXd>& prior_llt) {
    const int m = static_cast<int>(u.size());
    const Eigen::VectorXd r = u - prior.mean;
    const double quad = r.dot(prior_llt.solve(r));
    double logdet = 0.0;
    for (int i = 0; i < m; ++i) logdet += std::log(prior_llt.matrixLLT()(i, i));
    return -0.5 * quad - logdet - 0.5 * m * std::log(2.0 * std::numbers::pi);
}

// Shared EM loop. make_regressor maps the current initial conditions to the
// regressor; for fixed-regressor estimators it ignores its argument.
EstimationResult em_loop(const Eigen::VectorXd& y, const Eigen::VectorXd& u_plus,
                         int n, double sigma2, const EmOptions& opts, IcMode mode,
                         Eigen::VectorXd u_init, const InputConditioning* prior,
                         const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>&
                             make_regressor) {
    opts.validate();

    double lambda = opts.init_lambda > 0.0 ? opts.init_lambda : sample_variance(y);
    if (!(lambda > 0.0)) lambda = 1.0;
    double beta = opts.init_beta;
    Eigen::VectorXd u = std::move(u_init);

    Eigen::LLT<Eigen::MatrixXd> prior_llt;
    if (mode == IcMode::joint) {
        prior_llt.compute(prior->cov);
        if (prior_llt.info() != Eigen::Success)
            prior_llt.compute(prior->cov +
                              (1e-10 * prior->cov.trace() / prior->cov.rows()) *
                                  Eigen::MatrixXd::Identity(prior->cov.rows(),
                                                            prior->cov.cols()));
    }

    Eigen::MatrixXd U = make_regressor(u);
    const auto objective = [&](double lam, double b,
                               const Eigen::VectorXd& uu,
                               const Eigen::MatrixXd& reg) {
        double val = log_marginal_likelihood(y, reg, {lam, b, sigma2});
        if (mode == IcMode::joint) val += log_ic_prior(uu, *prior, prior_llt);
        return val;
    };

    EstimationResult res;
    if (opts.track_objective)
        res.objective_trace.push_back(objective(lambda, beta, u, U));

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        const PosteriorMoments pm = posterior_moments(y, U, {lambda, beta, sigma2});

        Eigen::VectorXd u_new = u;
        if (mode != IcMode::fixed) {
            const QuadraticTerms qt = quadratic_terms(pm.s_moment, pm.g_hat, u_plus, y);
            u_new = (mode == IcMode::modless)
                        ? modless_ic_update(qt)
                        : joint_ic_update(qt, sigma2, prior->cov, prior->mean);
        }

        double beta_new = beta_update(pm.d_diag, opts);
        // Generalized EM guard: never move beta to a worse profile value.
        if (beta_objective(pm.d_diag, beta) < beta_objective(pm.d_diag, beta_new))
            beta_new = beta;
        const double lambda_new = lambda_update(pm.d_diag, beta_new);

        double change = std::max(rel_change(lambda_new, lambda),
                                 rel_change(beta_new, beta));
        if (mode != IcMode::fixed) {
            const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
            change = std::max(change, (u_new - u).cwiseAbs().maxCoeff() / scale);
        }

        lambda = lambda_new;
        beta = beta_new;
        if (mode != IcMode::fixed) {
            u = u_new;
            U = make_regressor(u);
        }
        res.iters = iter;

        if (opts.track_objective)
            res.objective_trace.push_back(objective(lambda, beta, u, U));

        if (change < opts.rel_tol) {
            res.converged = true;
            break;
        }
    }

    const PosteriorMoments pm = posterior_moments(y, U, {lambda, beta, sigma2});
    res.g_hat = pm.g_hat;
    res.g_cov = pm.cov;
    res.u_minus_hat = u;
    res.hp = {lambda, beta, sigma2};
    return res;
}

Eigen::VectorXd default_ic(const EmOptions& opts, int n,
                           const Eigen::VectorXd& fallback) {
    if (opts.init_u_minus.size() == 0) return fallback;
    if (opts.init_u_minus.size() != n - 1)
        throw std::invalid_argument("EmOptions: init_u_minus must have length n-1");
    return opts.init_u_minus;
}

}  // namespace

EstimationResult run_modless(const Dataset& data, double sigma2,
                             const EmOptions& opts) {
    data.validate();
    const int n = data.n;
    const auto make_U = [&](const Eigen::VectorXd& u) {
        return build_regressor(data.u_plus, u, n).entries;
    };
    return em_loop(data.y, data.u_plus, n, sigma2, opts, IcMode::modless,
                   default_ic(opts, n, Eigen::VectorXd::Zero(n - 1)), nullptr,
                   make_U);
}

EstimationResult run_condmean(const Dataset& data, const ArmaModel& model,
                              double sigma2, const EmOptions& opts, CovMode mode) {
    data.validate();
    const InputConditioning cond =
        condition_initial(data.u_plus, model, data.n, mode);
    return run_fixed_ic(data, cond.mean, sigma2, opts);
}

EstimationResult run_joint(const Dataset& data, const ArmaModel& model,
                           double sigma2, const EmOptions& opts, CovMode mode) {
    data.validate();
    const int n = data.n;
    const InputConditioning cond = condition_initial(data.u_plus, model, n, mode);
    const auto make_U = [&](const Eigen::VectorXd& u) {
        return build_regressor(data.u_plus, u, n).entries;
    };
    return em_loop(data.y, data.u_plus, n, sigma2, opts, IcMode::joint,
                   default_ic(opts, n, cond.mean), &cond, make_U);
}

EstimationResult run_fixed_ic(const Dataset& data,
                              const Eigen::VectorXd& u_minus_fixed,
                              double sigma2, const EmOptions& opts) {
    data.validate();
    const int n = data.n;
    if (u_minus_fixed.size() != n - 1)
        throw std::invalid_argument("run_fixed_ic: u_minus_fixed must have length n-1");
    const Eigen::MatrixXd U =
        build_regressor(data.u_plus, u_minus_fixed, n).entries;
    const auto make_U = [&U](const Eigen::VectorXd&) { return U; };
    return em_loop(data.y, data.u_plus, n, sigma2, opts, IcMode::fixed,
                   u_minus_fixed, nullptr, make_U);
}

EstimationResult run_truncated(const Dataset& data, double sigma2,
                               const EmOptions& opts) {
    data.validate();
    const int n = data.n;
    const int rows = data.N() - (n - 1);
    if (rows < 1)
        throw std::invalid_argument("run_truncated: no fully-known rows left");

    // Rows t >= n-1 of the regressor never touch the initial conditions.
    const Eigen::MatrixXd U =
        build_regressor(data.u_plus, Eigen::VectorXd::Zero(n - 1), n)
            .known_part.bottomRows(rows);
    const Eigen::VectorXd y = data.y.tail(rows);
    const auto make_U = [&U](const Eigen::VectorXd&) { return U; };
    EstimationResult res =
        em_loop(y, data.u_plus, n, sigma2, opts, IcMode::fixed,
                Eigen::VectorXd(), nullptr, make_U);
    res.u_minus_hat.resize(0);
    return res;
}

}  // namespace sysid
