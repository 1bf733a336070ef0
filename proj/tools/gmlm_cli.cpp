#include "gmlm/experiments.hpp"
#include "gmlm/io.hpp"
#include "gmlm/ising.hpp"
#include "gmlm/normal.hpp"
#include "gmlm/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gmlm;

namespace {

constexpr const char* kVersion = "1.0.0";

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double seconds) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["library_version"] = kVersion;
    manifest["wall_clock_seconds"] = seconds;
    std::ofstream os(dir / "manifest.json");
    os << manifest.dump(2) << '\n';
}

Tensor design_from_spec(const std::string& spec, double y, std::size_t order) {
    if (spec == "scalar") {
        Tensor f(std::vector<std::size_t>(order, 1));
        f[0] = y;
        return f;
    }
    if (spec == "trig2x2") {
        Tensor f({2, 2});
        f[0] = std::sin(M_PI * y);
        f[1] = std::cos(M_PI * y);
        f[2] = -std::cos(M_PI * y);
        f[3] = std::sin(M_PI * y);
        return f;
    }
    if (spec.rfind("monomial:", 0) == 0) {
        std::vector<std::size_t> dims;
        std::string rest = spec.substr(9);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            const std::size_t next = rest.find('x', pos);
            dims.push_back(std::stoull(rest.substr(pos, next - pos)));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        Tensor f(dims);
        for (std::size_t flat = 0; flat < f.size(); ++flat) {
            std::size_t degree = 0, rest_i = flat;
            for (std::size_t d : dims) {
                degree += rest_i % d;
                rest_i /= d;
            }
            f[flat] = std::pow(y, static_cast<double>(degree));
        }
        return f;
    }
    throw CLI::ValidationError("--design", "unknown design spec: " + spec);
}

std::vector<Tensor> build_designs(const std::string& spec, const std::vector<double>& y,
                                  std::size_t x_order) {
    if (spec == "scalar" || spec == "trig2x2" || spec.rfind("monomial:", 0) == 0) {
        std::vector<Tensor> out;
        out.reserve(y.size());
        for (double yi : y) out.push_back(design_from_spec(spec, yi, x_order));
        return out;
    }
    return read_gtds_file(spec);  // precomputed design tensors
}

int cmd_simulate(const std::string& setting, std::size_t n, std::uint64_t seed,
                 const std::string& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const experiments::SimData sim = experiments::generate(setting, n, seed);

    fs::create_directories(out);
    const fs::path dir(out);
    write_gtds_file((dir / "data.gtds").string(), sim.data.X);
    write_gtds_file((dir / "design.gtds").string(), sim.data.F);
    write_gten_file((dir / "true_b.gten"), Tensor::from_matrix(sim.true_b));
    Eigen::VectorXd yv(static_cast<Eigen::Index>(sim.data.y.size()));
    for (std::size_t i = 0; i < sim.data.y.size(); ++i)
        yv[static_cast<Eigen::Index>(i)] = sim.data.y[i];
    write_gten_file((dir / "y.gten"), Tensor::from_vector(yv));

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, "simulate",
                   {{"setting", setting}, {"n", n}, {"seed", seed}}, {},
                   {"data.gtds", "design.gtds", "true_b.gten", "y.gten"}, seconds);
    return 0;
}

int cmd_fit(const std::string& family, const std::string& data_path,
            const std::string& design_spec, const std::string& y_path, std::size_t max_iter,
            double tol, std::size_t mc_samples, std::uint64_t seed, const std::string& out) {
    const auto t0 = std::chrono::steady_clock::now();

    Dataset data;
    data.X = read_gtds_file(data_path);
    if (!y_path.empty()) {
        const Tensor yt = read_gten_file(y_path);
        data.y.assign(yt.vec().begin(), yt.vec().end());
    }
    data.F = build_designs(design_spec, data.y, data.X.front().order());
    if (data.F.size() != data.X.size())
        throw std::runtime_error("fit: design count does not match data count");

    FitResult fit;
    if (family == "normal") {
        NormalFitConfig cfg;
        cfg.max_iter = max_iter;
        cfg.rel_tol = tol;
        fit = normal::fit(data, cfg);
    } else if (family == "ising") {
        IsingFitConfig cfg;
        cfg.max_iter = max_iter;
        cfg.grad_tol = tol;
        cfg.mc_samples = mc_samples;
        cfg.seed = seed;
        fit = ising::fit(data, cfg);
    } else {
        throw CLI::ValidationError("--family", "must be 'normal' or 'ising'");
    }

    fs::create_directories(out);
    const fs::path dir(out);
    std::vector<std::string> outputs;
    write_gten_file((dir / "eta_bar.gten"), fit.params.eta_bar);
    write_gten_file((dir / "mean_x.gten"), fit.mean_x);
    outputs = {"eta_bar.gten", "mean_x.gten", "trace.csv"};
    for (std::size_t k = 0; k < fit.params.order(); ++k) {
        const std::string bname = "beta_" + std::to_string(k + 1) + ".gten";
        const std::string oname = "omega_" + std::to_string(k + 1) + ".gten";
        write_gten_file((dir / bname), Tensor::from_matrix(fit.params.betas[k]));
        write_gten_file((dir / oname), Tensor::from_matrix(fit.params.omegas[k]));
        outputs.push_back(bname);
        outputs.push_back(oname);
    }
    {
        std::ofstream trace(dir / "trace.csv");
        trace.precision(17);
        trace << "iteration,value\n";
        const auto& values =
            fit.objective_trace.empty() ? fit.grad_norm_trace : fit.objective_trace;
        for (std::size_t i = 0; i < values.size(); ++i) trace << i << ',' << values[i] << '\n';
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, "fit",
                   {{"family", family},
                    {"design", design_spec},
                    {"max_iter", max_iter},
                    {"tol", tol},
                    {"mc_samples", mc_samples},
                    {"seed", seed},
                    {"iterations", fit.iterations},
                    {"converged", fit.converged}},
                   {data_path, y_path}, outputs, seconds);
    return 0;
}

int cmd_reduce(const std::string& params_dir, const std::string& data_path,
               const std::string& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path pdir(params_dir);

    GmlmParams params;
    params.eta_bar = read_gten_file((pdir / "eta_bar.gten"));
    const Tensor mean_x = read_gten_file((pdir / "mean_x.gten"));
    for (std::size_t k = 1;; ++k) {
        const fs::path bpath = pdir / ("beta_" + std::to_string(k) + ".gten");
        if (!fs::exists(bpath)) break;
        params.betas.push_back(read_gten_file(bpath.string()).as_matrix());
        params.omegas.push_back(
            read_gten_file((pdir / ("omega_" + std::to_string(k) + ".gten")).string())
                .as_matrix());
    }

    const std::vector<Tensor> data = read_gtds_file(data_path);
    std::vector<Tensor> reduced;
    reduced.reserve(data.size());
    for (const Tensor& x : data) reduced.push_back(sufficient_reduction(params, x, mean_x));

    fs::create_directories(out);
    const fs::path dir(out);
    write_gtds_file((dir / "reduced.gtds").string(), reduced);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, "reduce", {{"params", params_dir}}, {data_path}, {"reduced.gtds"},
                   seconds);
    return 0;
}

int cmd_bench(const std::string& kind, const std::vector<std::string>& settings,
              const std::vector<std::size_t>& n_grid, std::size_t reps,
              std::size_t mc_samples, std::uint64_t seed, const std::string& out) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out);
    const fs::path dir(out);
    json config = {{"kind", kind}, {"seed", seed}};

    if (kind == "moments") {
        const std::vector<std::size_t> p_grid = {4, 6, 8, 10, 12, 14, 16};
        const auto rows = experiments::moment_bench(p_grid, mc_samples, seed);
        std::ofstream os(dir / "moments.csv");
        experiments::write_csv(os, rows);
        config["mc_samples"] = mc_samples;
    } else if (kind == "grid") {
        const auto rows = experiments::run_grid(settings, n_grid, reps, seed);
        std::ofstream os(dir / "grid.csv");
        experiments::write_csv(os, rows);
        config["settings"] = settings;
        config["n_grid"] = n_grid;
        config["replications"] = reps;
    } else {
        throw CLI::ValidationError("--kind", "must be 'moments' or 'grid'");
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(dir, "bench", config, {},
                   {kind == "moments" ? "moments.csv" : "grid.csv"}, seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized multi-linear models for tensor-valued predictors"};
    app.require_subcommand(1);

    std::string setting = "1a", family = "normal", design = "scalar";
    std::string data_path, y_path, params_dir, out = "out", kind = "moments";
    std::size_t n = 100, max_iter = 0, mc_samples = 10000, reps = 20, threads = 0;
    double tol = 0.0;
    std::uint64_t seed = 42;
    std::vector<std::string> grid_settings = {"1a"};
    std::vector<std::size_t> n_grid = {100, 200, 300, 500, 750};

    app.add_option("--threads", threads, "Cap the OpenMP worker pool");

    auto* sim = app.add_subcommand("simulate", "Generate a simulation-study dataset");
    sim->add_option("--setting", setting, "Setting id (1a-1e, 2a-2d)")->required();
    sim->add_option("--n", n, "Sample size");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--out", out, "Output directory");

    auto* fit = app.add_subcommand("fit", "Fit a GMLM to a dataset");
    fit->add_option("--family", family, "normal or ising")->required();
    fit->add_option("--data", data_path, "GTDS1 predictor file")->required();
    fit->add_option("--design", design,
                    "Design spec: scalar, monomial:d1xd2x..., trig2x2, or a GTDS1 file");
    fit->add_option("--y", y_path, "GTEN1 vector of responses (for built-in designs)");
    fit->add_option("--max-iter", max_iter, "Iteration cap (0 = family default)");
    fit->add_option("--tol", tol, "Convergence tolerance (0 = family default)");
    fit->add_option("--mc-samples", mc_samples, "Gibbs draws per step (ising, large p)");
    fit->add_option("--seed", seed, "RNG seed");
    fit->add_option("--out", out, "Output directory");

    auto* red = app.add_subcommand("reduce", "Apply a fitted sufficient reduction");
    red->add_option("--params", params_dir, "Directory written by fit")->required();
    red->add_option("--data", data_path, "GTDS1 predictor file")->required();
    red->add_option("--out", out, "Output directory");

    auto* bench = app.add_subcommand("bench", "Benchmarks: moment timings or simulation grid");
    bench->add_option("--kind", kind, "moments or grid");
    bench->add_option("--setting", grid_settings, "Grid settings (repeatable)");
    bench->add_option("--n", n_grid, "Grid sample sizes (repeatable)");
    bench->add_option("--reps", reps, "Replications per cell");
    bench->add_option("--mc-samples", mc_samples, "MC sample count");
    bench->add_option("--seed", seed, "RNG seed");
    bench->add_option("--out", out, "Output directory");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(static_cast<int>(threads));

    try {
        if (sim->parsed()) return cmd_simulate(setting, n, seed, out);
        if (fit->parsed()) {
            if (max_iter == 0) max_iter = family == "ising" ? 1000 : 100;
            if (tol == 0.0) tol = family == "ising" ? 1e-4 : 1e-6;
            return cmd_fit(family, data_path, design, y_path, max_iter, tol, mc_samples, seed,
                           out);
        }
        if (red->parsed()) return cmd_reduce(params_dir, data_path, out);
        if (bench->parsed())
            return cmd_bench(kind, grid_settings, n_grid, reps, mc_samples, seed, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
