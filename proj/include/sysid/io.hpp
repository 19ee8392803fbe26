#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "sysid/arma.hpp"
#include "sysid/benchmark.hpp"
#include "sysid/core_model.hpp"
#include "sysid/em.hpp"

namespace sysid::io {

// Numeric formatting used in every CSV: 17 significant digits, enough to
// round-trip binary doubles exactly.
std::string format_double(double v);

// data.csv: header t,u,y with rows t = 0..N-1.
void write_dataset_csv(const std::filesystem::path& path,
                       const Eigen::VectorXd& u_plus, const Eigen::VectorXd& y);
void read_dataset_csv(const std::filesystem::path& path, Eigen::VectorXd& u_plus,
                      Eigen::VectorXd& y);

// ic.csv: header t,u with rows t = -(n-1)..-1, oldest first.
void write_ic_csv(const std::filesystem::path& path, const Eigen::VectorXd& u_minus);
Eigen::VectorXd read_ic_csv(const std::filesystem::path& path);

// Impulse response files: header k,g with rows k = 0..n-1.
void write_impulse_csv(const std::filesystem::path& path, const Eigen::VectorXd& g);
Eigen::VectorXd read_impulse_csv(const std::filesystem::path& path);

// ArmaModel as JSON: {"d": [...], "c": [...]}.
void write_arma_json(const std::filesystem::path& path, const ArmaModel& model);
ArmaModel read_arma_json(const std::filesystem::path& path);

// EstimationResult as JSON (g_hat, u_minus_hat, hp, iters, converged,
// final objective).
void write_result_json(const std::filesystem::path& path,
                       const EstimationResult& result);

BenchmarkConfig read_benchmark_config(const std::filesystem::path& path);

// records.csv: header run_id,N,estimator,fit,iters,converged,wall_time.
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::filesystem::path& path);

// summary.json: list of per-(N, estimator) aggregates.
void write_summary_json(const std::filesystem::path& path,
                        const std::vector<SummaryEntry>& summary);

}  // namespace sysid::io
