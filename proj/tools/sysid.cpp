// Command-line front end: dataset simulation, single-shot identification,
// and Monte Carlo benchmarking.
//
// Exit codes: 0 success, 1 runtime/numerical failure, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sysid/benchmark.hpp"
#include "sysid/core_model.hpp"
#include "sysid/em.hpp"
#include "sysid/io.hpp"
#include "sysid/log.hpp"
#include "sysid/posterior.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IdentifyArgs {
    std::string data;
    int n = 0;
    std::string method;
    std::string arma;
    std::string noise_var = "auto";
    std::string ic;
    std::string cov_mode = "stationary";
    std::string out;
};

int cmd_identify(const IdentifyArgs& args) {
    if (args.method != "zeros" && args.method != "trunc" && args.method != "modless" &&
        args.method != "mean" && args.method != "joint" && args.method != "oracle")
        throw UsageError("unknown method: " + args.method);
    if ((args.method == "mean" || args.method == "joint") && args.arma.empty())
        throw UsageError("method '" + args.method + "' requires --arma");
    if (args.method == "oracle" && args.ic.empty())
        throw UsageError("method 'oracle' requires --ic");

    sysid::Dataset data;
    data.n = args.n;
    sysid::io::read_dataset_csv(args.data, data.u_plus, data.y);
    data.validate();

    double sigma2;
    if (args.noise_var == "auto") {
        sigma2 = sysid::estimate_noise_variance(data.y, data.u_plus, data.n);
        sysid::log::info("estimated noise variance " + std::to_string(sigma2));
        if (sigma2 <= 0.0) sigma2 = 1e-12;  // exactly noiseless data
    } else {
        try {
            sigma2 = std::stod(args.noise_var);
        } catch (const std::exception&) {
            throw UsageError("--noise-var must be a number or 'auto'");
        }
        if (!(sigma2 > 0.0)) throw UsageError("--noise-var must be positive");
    }

    const sysid::CovMode mode = sysid::cov_mode_from_string(args.cov_mode);
    sysid::EmOptions opts;

    sysid::EstimationResult result;
    if (args.method == "zeros")
        result = sysid::run_fixed_ic(data, Eigen::VectorXd::Zero(data.n - 1), sigma2, opts);
    else if (args.method == "trunc")
        result = sysid::run_truncated(data, sigma2, opts);
    else if (args.method == "modless")
        result = sysid::run_modless(data, sigma2, opts);
    else if (args.method == "oracle")
        result = sysid::run_fixed_ic(data, sysid::io::read_ic_csv(args.ic), sigma2, opts);
    else {
        const sysid::ArmaModel model = sysid::io::read_arma_json(args.arma);
        result = args.method == "mean"
                     ? sysid::run_condmean(data, model, sigma2, opts, mode)
                     : sysid::run_joint(data, model, sigma2, opts, mode);
    }
    result.hp.sigma2 = sigma2;

    fs::create_directories(args.out);
    sysid::io::write_impulse_csv(fs::path(args.out) / "g_hat.csv", result.g_hat);
    sysid::io::write_result_json(fs::path(args.out) / "result.json", result);
    return 0;
}

struct SimulateArgs {
    std::uint64_t seed = 1;
    int n = 0;
    int N = 0;
    int system_order = 40;
    int arma_order = 8;
    double snr = 20.0;
    std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
    sysid::BenchmarkConfig cfg;
    cfg.runs = 1;
    cfg.sample_sizes = {args.N};
    cfg.n = args.n;
    cfg.system_order = args.system_order;
    cfg.arma_order = args.arma_order;
    cfg.snr = args.snr;
    cfg.seed = args.seed;
    cfg.validate();

    const sysid::GeneratedRun run = sysid::generate_run(cfg, args.N, 0);

    fs::create_directories(args.out);
    const fs::path out(args.out);
    sysid::io::write_dataset_csv(out / "data.csv", run.u_plus, run.y);
    sysid::io::write_ic_csv(out / "ic.csv", run.u_minus);
    sysid::io::write_impulse_csv(out / "g_true.csv", run.g_true);
    sysid::io::write_arma_json(out / "arma.json", run.arma);

    json meta;
    meta["sigma2"] = run.sigma2;
    meta["snr"] = args.snr;
    meta["seed"] = args.seed;
    meta["run_seed"] = sysid::mix_seed(args.seed, args.N, 0);
    meta["n"] = args.n;
    meta["N"] = args.N;
    meta["system_order"] = args.system_order;
    meta["arma_order"] = args.arma_order;
    std::ofstream(out / "meta.json") << meta.dump(2) << '\n';
    return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir,
                  int parallel, bool timing) {
    sysid::BenchmarkConfig cfg = sysid::io::read_benchmark_config(config_path);
    if (parallel > 0) cfg.parallel = parallel;
    if (timing) cfg.include_timing = true;

    const sysid::BenchmarkResult result = sysid::run_monte_carlo(cfg);

    fs::create_directories(out_dir);
    sysid::io::write_records_csv(fs::path(out_dir) / "records.csv", result.records);
    sysid::io::write_summary_json(fs::path(out_dir) / "summary.json", result.summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FIR identification with stable-spline regularization and "
                 "initial-condition estimation"};
    app.require_subcommand(1);

    IdentifyArgs id;
    auto* identify = app.add_subcommand("identify", "Estimate an impulse response");
    identify->add_option("--data", id.data, "dataset CSV (t,u,y)")->required();
    identify->add_option("--n", id.n, "impulse response length")->required();
    identify->add_option("--method", id.method,
                         "zeros|trunc|modless|mean|joint|oracle")->required();
    identify->add_option("--arma", id.arma, "ARMA model JSON (mean/joint)");
    identify->add_option("--noise-var", id.noise_var, "noise variance or 'auto'");
    identify->add_option("--ic", id.ic, "true initial conditions CSV (oracle)");
    identify->add_option("--cov-mode", id.cov_mode, "transient|stationary");
    identify->add_option("--out", id.out, "output directory")->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
    simulate->add_option("--seed", sim.seed, "random seed")->required();
    simulate->add_option("--n", sim.n, "impulse response length")->required();
    simulate->add_option("--N", sim.N, "number of samples")->required();
    simulate->add_option("--system-order", sim.system_order, "system order (even)");
    simulate->add_option("--arma-order", sim.arma_order, "input filter order (even)");
    simulate->add_option("--snr", sim.snr, "output-variance to noise-variance ratio");
    simulate->add_option("--out", sim.out, "output directory")->required();

    std::string bench_config, bench_out;
    int bench_parallel = 0;
    bool bench_timing = false;
    auto* benchmark = app.add_subcommand("benchmark", "Run the Monte Carlo experiment");
    benchmark->add_option("--config", bench_config, "benchmark config JSON")->required();
    benchmark->add_option("--out", bench_out, "output directory")->required();
    benchmark->add_option("--parallel", bench_parallel, "worker threads");
    benchmark->add_flag("--timing", bench_timing,
                        "record measured wall times (breaks bitwise reproducibility)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (identify->parsed()) return cmd_identify(id);
        if (simulate->parsed()) return cmd_simulate(sim);
        return cmd_benchmark(bench_config, bench_out, bench_parallel, bench_timing);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        json diag;
        diag["error"] = e.what();
        std::cerr << diag.dump() << '\n';
        return 1;
    }
}
