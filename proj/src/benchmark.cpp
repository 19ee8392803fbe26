#include "sysid/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "sysid/core_model.hpp"
#include "sysid/em.hpp"
#include "sysid/log.hpp"
#include "sysid/posterior.hpp"

namespace sysid {

namespace {

constexpr int kBurnIn = 1000;

const std::vector<std::string> kKnownEstimators{"trunc", "zeros", "modless",
                                                "mean",  "joint", "oracle"};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Polynomial product with a conjugate pair factor 1 - 2 r cos(theta) z^{-1} + r^2 z^{-2}.
Eigen::VectorXd multiply_pair(const Eigen::VectorXd& poly, double r, double theta) {
    Eigen::VectorXd factor(3);
    factor << 1.0, -2.0 * r * std::cos(theta), r * r;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(poly.size() + 2);
    for (int i = 0; i < poly.size(); ++i)
        for (int j = 0; j < 3; ++j)
            out(i + j) += poly(i) * factor(j);
    return out;
}

Eigen::VectorXd random_pair_polynomial(std::mt19937_64& rng, int pairs,
                                       double mag_lo, double mag_hi) {
    std::uniform_real_distribution<double> mag(mag_lo, mag_hi);
    std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
    Eigen::VectorXd poly = Eigen::VectorXd::Ones(1);
    for (int i = 0; i < pairs; ++i) {
        const double r = mag(rng);
        const double th = phase(rng);
        poly = multiply_pair(poly, r, th);
    }
    return poly;
}

}  // namespace

void BenchmarkConfig::validate() const {
    if (runs < 1) throw std::invalid_argument("BenchmarkConfig: runs must be >= 1");
    if (!(snr > 0.0)) throw std::invalid_argument("BenchmarkConfig: snr must be > 0");
    if (n < 2) throw std::invalid_argument("BenchmarkConfig: n must be >= 2");
    if (system_order < 2 || system_order % 2 != 0)
        throw std::invalid_argument("BenchmarkConfig: system_order must be even and >= 2");
    if (arma_order < 2 || arma_order % 2 != 0)
        throw std::invalid_argument("BenchmarkConfig: arma_order must be even and >= 2");
    if (sample_sizes.empty())
        throw std::invalid_argument("BenchmarkConfig: sample_sizes must be nonempty");
    for (int N : sample_sizes)
        if (N < n)
            throw std::invalid_argument("BenchmarkConfig: sample sizes must be >= n");
    if (estimators.empty())
        throw std::invalid_argument("BenchmarkConfig: estimators must be nonempty");
    for (const auto& e : estimators)
        if (std::find(kKnownEstimators.begin(), kKnownEstimators.end(), e) ==
            kKnownEstimators.end())
            throw std::invalid_argument("BenchmarkConfig: unknown estimator " + e);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return h;
}

void random_system_polynomials(std::uint64_t seed, int order,
                               Eigen::VectorXd& num, Eigen::VectorXd& den) {
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("random_system_polynomials: order must be even");
    std::mt19937_64 rng(seed);
    den = random_pair_polynomial(rng, order / 2, 0.3, 0.95);
    num = random_pair_polynomial(rng, order / 2, 0.0, 0.99);
}

Eigen::VectorXd rational_impulse_response(const Eigen::VectorXd& num,
                                          const Eigen::VectorXd& den, int n) {
    if (den.size() < 1 || den(0) != 1.0)
        throw std::invalid_argument("rational_impulse_response: den must be monic");
    const int q = static_cast<int>(num.size()) - 1;
    const int p = static_cast<int>(den.size()) - 1;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < n; ++t) {
        double acc = (t <= q) ? num(t) : 0.0;
        for (int i = 1; i <= std::min(t, p); ++i) acc -= den(i) * g(t - i);
        g(t) = acc;
    }
    return g;
}

Eigen::VectorXd random_system(std::uint64_t seed, int order, int n) {
    Eigen::VectorXd num, den;
    random_system_polynomials(seed, order, num, den);
    return rational_impulse_response(num, den, n);
}

ArmaModel random_arma(std::uint64_t seed, int order) {
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("random_arma: order must be even");
    std::mt19937_64 rng(seed);
    const Eigen::VectorXd ar = random_pair_polynomial(rng, order / 2, 0.8, 0.95);
    const Eigen::VectorXd ma = random_pair_polynomial(rng, order / 2, 0.0, 0.95);
    ArmaModel model;
    model.d = ar.tail(order);  // drop the leading 1
    model.c = ma;              // c_0 = 1 from the monic product
    model.validate();
    return model;
}

double noise_variance_for_snr(const Eigen::VectorXd& y0, double snr) {
    if (!(snr > 0.0))
        throw std::invalid_argument("noise_variance_for_snr: snr must be > 0");
    const double mean = y0.mean();
    const double var =
        (y0.array() - mean).square().sum() / std::max<int>(1, y0.size() - 1);
    if (var == 0.0)
        throw std::invalid_argument("noise_variance_for_snr: constant noiseless output");
    return var / snr;
}

GeneratedRun generate_run(const BenchmarkConfig& config, int N, int run_id) {
    const std::uint64_t run_seed = mix_seed(config.seed, N, run_id);

    GeneratedRun run;
    run.g_true = random_system(mix_seed(run_seed, 1), config.system_order, config.n);
    run.arma = random_arma(mix_seed(run_seed, 2), config.arma_order);

    const Eigen::VectorXd u =
        simulate(run.arma, (config.n - 1) + N, kBurnIn, mix_seed(run_seed, 3));
    run.u_minus = u.head(config.n - 1);
    if (config.force_zero_ic) run.u_minus.setZero();
    run.u_plus = u.tail(N);

    Eigen::VectorXd u_full(u.size());
    u_full << run.u_minus, run.u_plus;
    run.y0 = convolve(run.g_true, u_full);
    run.sigma2 = noise_variance_for_snr(run.y0, config.snr);

    std::mt19937_64 noise_rng(mix_seed(run_seed, 4));
    std::normal_distribution<double> normal(0.0, 1.0);
    run.y = run.y0;
    const double sd = std::sqrt(run.sigma2);
    for (int t = 0; t < run.y.size(); ++t) run.y(t) += sd * normal(noise_rng);
    return run;
}

namespace {

EstimationResult dispatch_estimator(const std::string& name, const Dataset& data,
                                    const GeneratedRun& run, double sigma2,
                                    const BenchmarkConfig& config,
                                    const EmOptions& opts) {
    if (name == "zeros")
        return run_fixed_ic(data, Eigen::VectorXd::Zero(data.n - 1), sigma2, opts);
    if (name == "oracle") return run_fixed_ic(data, run.u_minus, sigma2, opts);
    if (name == "trunc") return run_truncated(data, sigma2, opts);
    if (name == "modless") return run_modless(data, sigma2, opts);
    if (name == "mean")
        return run_condmean(data, run.arma, sigma2, opts, config.input_cov_mode);
    if (name == "joint")
        return run_joint(data, run.arma, sigma2, opts, config.input_cov_mode);
    throw std::invalid_argument("unknown estimator: " + name);
}

}  // namespace

BenchmarkResult run_monte_carlo(const BenchmarkConfig& config) {
    config.validate();

    struct Task {
        int N;
        int run_id;
    };
    std::vector<Task> tasks;
    for (int N : config.sample_sizes)
        for (int r = 0; r < config.runs; ++r) tasks.push_back({N, r});

    const int per_task = static_cast<int>(config.estimators.size());
    BenchmarkResult result;
    result.records.resize(tasks.size() * per_task);

    EmOptions opts;
    opts.track_objective = false;

    const auto worker_body = [&](int task_idx) {
        const Task& task = tasks[task_idx];
        RunRecord* out = result.records.data() + task_idx * per_task;
        GeneratedRun run;
        bool generated = false;
        std::string gen_error;
        try {
            run = generate_run(config, task.N, task.run_id);
            generated = true;
        } catch (const std::exception& e) {
            gen_error = e.what();
        }

        for (int e = 0; e < per_task; ++e) {
            RunRecord& rec = out[e];
            rec.run_id = task.run_id;
            rec.N = task.N;
            rec.estimator = config.estimators[e];
            if (!generated) {
                rec.failed = true;
                rec.error = "generation failed: " + gen_error;
                rec.fit = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            Dataset data{run.u_plus, run.y, run.u_minus, config.n};
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const double sigma2 =
                    config.estimate_noise
                        ? estimate_noise_variance(run.y, run.u_plus, config.n)
                        : run.sigma2;
                const EstimationResult est =
                    dispatch_estimator(rec.estimator, data, run, sigma2, config, opts);
                rec.fit = fit_score(run.g_true, est.g_hat);
                rec.iters = est.iters;
                rec.converged = est.converged;
            } catch (const std::exception& ex) {
                rec.failed = true;
                rec.error = ex.what();
                rec.fit = std::numeric_limits<double>::quiet_NaN();
            }
            if (config.include_timing) {
                const auto t1 = std::chrono::steady_clock::now();
                rec.wall_time = std::chrono::duration<double>(t1 - t0).count();
            }
        }
    };

    int threads = config.parallel > 0
                      ? config.parallel
                      : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));

    if (threads == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) worker_body(static_cast<int>(i));
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < static_cast<int>(tasks.size());
                     i = next.fetch_add(1))
                    worker_body(i);
            });
        for (auto& th : pool) th.join();
    }

    for (int N : config.sample_sizes) {
        for (const auto& name : config.estimators) {
            SummaryEntry s;
            s.N = N;
            s.estimator = name;
            double sum = 0.0, sum2 = 0.0;
            for (const auto& rec : result.records) {
                if (rec.N != N || rec.estimator != name) continue;
                if (rec.failed) {
                    ++s.failures;
                    continue;
                }
                sum += rec.fit;
                sum2 += rec.fit * rec.fit;
                ++s.count;
            }
            if (s.count > 0) {
                s.mean_fit = sum / s.count;
                if (s.count > 1) {
                    const double var =
                        (sum2 - sum * sum / s.count) / (s.count - 1);
                    s.stderr_fit = std::sqrt(std::max(0.0, var) / s.count);
                }
            }
            result.summary.push_back(std::move(s));
        }
    }
    return result;
}

}  // namespace sysid
