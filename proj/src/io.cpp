#include "sysid/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace sysid::io {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

// Reads a CSV with the expected header, returning one vector per column
// beyond the first (the index column is checked only for count).
std::vector<std::vector<double>> read_columns(const std::filesystem::path& path,
                                              const std::string& header) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw std::runtime_error(path.string() + ": expected header '" + header + "'");
    const std::size_t ncols = split_csv_line(header).size();
    std::vector<std::vector<double>> cols(ncols - 1);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != ncols)
            throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        for (std::size_t c = 1; c < ncols; ++c)
            cols[c - 1].push_back(std::stod(fields[c]));
    }
    return cols;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_dataset_csv(const std::filesystem::path& path,
                       const Eigen::VectorXd& u_plus, const Eigen::VectorXd& y) {
    if (u_plus.size() != y.size())
        throw std::invalid_argument("write_dataset_csv: length mismatch");
    auto out = open_out(path);
    out << "t,u,y\n";
    for (int t = 0; t < u_plus.size(); ++t)
        out << t << ',' << format_double(u_plus(t)) << ',' << format_double(y(t))
            << '\n';
}

void read_dataset_csv(const std::filesystem::path& path, Eigen::VectorXd& u_plus,
                      Eigen::VectorXd& y) {
    const auto cols = read_columns(path, "t,u,y");
    u_plus = to_vector(cols[0]);
    y = to_vector(cols[1]);
    if (u_plus.size() == 0)
        throw std::runtime_error(path.string() + ": empty dataset");
}

void write_ic_csv(const std::filesystem::path& path, const Eigen::VectorXd& u_minus) {
    auto out = open_out(path);
    out << "t,u\n";
    const int m = static_cast<int>(u_minus.size());
    for (int i = 0; i < m; ++i)
        out << (i - m) << ',' << format_double(u_minus(i)) << '\n';
}

Eigen::VectorXd read_ic_csv(const std::filesystem::path& path) {
    const auto cols = read_columns(path, "t,u");
    return to_vector(cols[0]);
}

void write_impulse_csv(const std::filesystem::path& path, const Eigen::VectorXd& g) {
    auto out = open_out(path);
    out << "k,g\n";
    for (int k = 0; k < g.size(); ++k)
        out << k << ',' << format_double(g(k)) << '\n';
}

Eigen::VectorXd read_impulse_csv(const std::filesystem::path& path) {
    const auto cols = read_columns(path, "k,g");
    return to_vector(cols[0]);
}

void write_arma_json(const std::filesystem::path& path, const ArmaModel& model) {
    json j;
    j["d"] = std::vector<double>(model.d.data(), model.d.data() + model.d.size());
    j["c"] = std::vector<double>(model.c.data(), model.c.data() + model.c.size());
    open_out(path) << j.dump(2) << '\n';
}

ArmaModel read_arma_json(const std::filesystem::path& path) {
    json j = json::parse(open_in(path));
    ArmaModel model;
    const auto d = j.at("d").get<std::vector<double>>();
    const auto c = j.at("c").get<std::vector<double>>();
    model.d = to_vector(d);
    model.c = to_vector(c);
    model.validate();
    return model;
}

void write_result_json(const std::filesystem::path& path,
                       const EstimationResult& result) {
    json j;
    j["g_hat"] = std::vector<double>(result.g_hat.data(),
                                     result.g_hat.data() + result.g_hat.size());
    if (result.u_minus_hat.size() > 0)
        j["u_minus_hat"] = std::vector<double>(
            result.u_minus_hat.data(),
            result.u_minus_hat.data() + result.u_minus_hat.size());
    else
        j["u_minus_hat"] = nullptr;
    j["hyperparameters"] = {{"lambda", result.hp.lambda},
                            {"beta", result.hp.beta},
                            {"sigma2", result.hp.sigma2}};
    j["iters"] = result.iters;
    j["converged"] = result.converged;
    if (!result.objective_trace.empty())
        j["final_objective"] = result.objective_trace.back();
    else
        j["final_objective"] = nullptr;
    open_out(path) << j.dump(2) << '\n';
}

BenchmarkConfig read_benchmark_config(const std::filesystem::path& path) {
    json j = json::parse(open_in(path));
    BenchmarkConfig cfg;
    if (j.contains("runs")) cfg.runs = j["runs"].get<int>();
    if (j.contains("sample_sizes"))
        cfg.sample_sizes = j["sample_sizes"].get<std::vector<int>>();
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("system_order")) cfg.system_order = j["system_order"].get<int>();
    if (j.contains("arma_order")) cfg.arma_order = j["arma_order"].get<int>();
    if (j.contains("snr")) cfg.snr = j["snr"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("estimators"))
        cfg.estimators = j["estimators"].get<std::vector<std::string>>();
    if (j.contains("input_cov_mode"))
        cfg.input_cov_mode = cov_mode_from_string(j["input_cov_mode"].get<std::string>());
    if (j.contains("parallel")) cfg.parallel = j["parallel"].get<int>();
    if (j.contains("include_timing")) cfg.include_timing = j["include_timing"].get<bool>();
    if (j.contains("estimate_noise")) cfg.estimate_noise = j["estimate_noise"].get<bool>();
    if (j.contains("force_zero_ic")) cfg.force_zero_ic = j["force_zero_ic"].get<bool>();
    cfg.validate();
    return cfg;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<RunRecord>& records) {
    auto out = open_out(path);
    out << "run_id,N,estimator,fit,iters,converged,wall_time\n";
    for (const auto& r : records)
        out << r.run_id << ',' << r.N << ',' << r.estimator << ','
            << format_double(r.fit) << ',' << r.iters << ','
            << (r.converged ? 1 : 0) << ',' << format_double(r.wall_time) << '\n';
}

std::vector<RunRecord> read_records_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "run_id,N,estimator,fit,iters,converged,wall_time")
        throw std::runtime_error(path.string() + ": bad records header");
    std::vector<RunRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7)
            throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        RunRecord r;
        r.run_id = std::stoi(f[0]);
        r.N = std::stoi(f[1]);
        r.estimator = f[2];
        r.fit = std::stod(f[3]);
        r.iters = std::stoi(f[4]);
        r.converged = f[5] == "1";
        r.wall_time = std::stod(f[6]);
        r.failed = std::isnan(r.fit);
        records.push_back(std::move(r));
    }
    return records;
}

void write_summary_json(const std::filesystem::path& path,
                        const std::vector<SummaryEntry>& summary) {
    json j = json::array();
    for (const auto& s : summary)
        j.push_back({{"N", s.N},
                     {"estimator", s.estimator},
                     {"mean_fit", s.mean_fit},
                     {"stderr_fit", s.stderr_fit},
                     {"failures", s.failures},
                     {"count", s.count}});
    open_out(path) << j.dump(2) << '\n';
}

}  // namespace sysid::io
