#include "gmlm/experiments.hpp"

#include "gmlm/ising.hpp"
#include "gmlm/normal.hpp"
#include "gmlm/rng.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace gmlm {
namespace experiments {

namespace {

Eigen::MatrixXd projector(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
    const Eigen::VectorXd sv = svd.singularValues();
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                       std::numeric_limits<double>::epsilon() *
                       (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
    return u * u.transpose();
}

Eigen::Index rank_of(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd sv = svd.singularValues();
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                       std::numeric_limits<double>::epsilon() *
                       (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    return rank;
}

Eigen::MatrixXd ar_matrix(Eigen::Index p, double rho) {
    Eigen::MatrixXd m(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            m(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
    return m;
}

Eigen::MatrixXd tridiag_matrix(Eigen::Index p, double diag, double off) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        m(i, i) = diag;
        if (i + 1 < p) {
            m(i, i + 1) = off;
            m(i + 1, i) = off;
        }
    }
    return m;
}

Eigen::MatrixXd unit_columns(Eigen::Index p, Eigen::Index q) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, q);
    for (Eigen::Index j = 0; j < q; ++j) m(j, j) = 1.0;
    return m;
}

Tensor monomial_design_3(double y) {
    // (𝔉_y)_{ijk} = y^{i+j+k} with 0-based indices; dims 2x2x2
    Tensor f({2, 2, 2});
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 2; ++i)
                f[i + 2 * (j + 2 * k)] = std::pow(y, static_cast<double>(i + j + k));
    return f;
}

Tensor trig_design(double y) {
    Tensor f({2, 2});
    f[0] = std::sin(M_PI * y);   // (0,0)
    f[1] = std::cos(M_PI * y);   // (1,0)
    f[2] = -std::cos(M_PI * y);  // (0,1)
    f[3] = std::sin(M_PI * y);   // (1,1)
    return f;
}

SimData generate_normal_kron(const GmlmParams& params,
                             const std::function<Tensor(double)>& design, std::size_t n,
                             std::uint64_t seed) {
    std::mt19937_64 rng_y = make_engine(seed, 0);
    std::mt19937_64 rng_x = make_engine(seed, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SimData out;
    out.true_b = params.big_beta();
    out.data.X.reserve(n);
    out.data.F.reserve(n);
    out.data.y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = gauss(rng_y);
        Tensor f = design(y);
        out.data.X.push_back(normal::sample_conditional(params, f, rng_x));
        out.data.F.push_back(std::move(f));
        out.data.y.push_back(y);
    }
    return out;
}

SimData generate_1e(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng_y = make_engine(seed, 0);
    std::mt19937_64 rng_x = make_engine(seed, 1);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const Eigen::MatrixXd b = unit_columns(25, 4);
    const Eigen::MatrixXd sigma = ar_matrix(25, 0.5);
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();

    SimData out;
    out.true_b = b;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = gauss(rng_y);
        Eigen::Vector4d fy(1.0, std::sin(y), std::cos(y), std::sin(y) * std::cos(y));
        Eigen::VectorXd noise(25);
        for (Eigen::Index j = 0; j < 25; ++j) noise(j) = gauss(rng_x);
        const Eigen::VectorXd vx = b * fy + chol * noise;

        Tensor x({5, 5});
        x.vec_map() = vx;
        // the fit uses the misspecified 2x2 design (𝔉_y)_{ij} = y^{i+j}
        Tensor f({2, 2});
        f[0] = 1.0;
        f[1] = y;
        f[2] = y;
        f[3] = y * y;
        out.data.X.push_back(std::move(x));
        out.data.F.push_back(std::move(f));
        out.data.y.push_back(y);
    }
    return out;
}

SimData generate_ising(const GmlmParams& params,
                       const std::function<Tensor(double)>& design, std::size_t n,
                       std::uint64_t seed) {
    std::mt19937_64 rng_y = make_engine(seed, 0);
    std::mt19937_64 rng_x = make_engine(seed, 1);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    SimData out;
    out.is_ising = true;
    out.true_b = params.big_beta();
    for (std::size_t i = 0; i < n; ++i) {
        const double y = unif(rng_y);
        Tensor f = design(y);
        out.data.X.push_back(ising::sample_conditional(params, f, rng_x));
        out.data.F.push_back(std::move(f));
        out.data.y.push_back(y);
    }
    return out;
}

GmlmParams ising_base_params() {
    GmlmParams params;
    params.eta_bar = Tensor({2, 3});
    params.betas = {unit_columns(2, 2), unit_columns(3, 2)};
    Eigen::MatrixXd omega1(2, 2);
    omega1 << 0.0, -2.0, -2.0, 0.0;
    params.omegas = {omega1, tridiag_matrix(3, 1.0, 0.5)};
    return params;
}

}  // namespace

double subspace_distance(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_hat) {
    if (b.rows() == 0 || b_hat.rows() == 0 || b.rows() != b_hat.rows())
        throw std::invalid_argument("subspace_distance: row dimensions must match and be > 0");
    const Eigen::Index p = b.rows();
    const Eigen::Index rank_sum = rank_of(b) + rank_of(b_hat);
    if (rank_sum == 0) return 0.0;
    const double scale = static_cast<double>(std::min(rank_sum, 2 * p - rank_sum));
    return (projector(b) - projector(b_hat)).norm() / std::sqrt(scale);
}

bool is_valid_setting(const std::string& id) {
    return id == "1a" || id == "1b" || id == "1c" || id == "1d" || id == "1e" ||
           id == "2a" || id == "2b" || id == "2c" || id == "2d";
}

SimData generate(const std::string& id, std::size_t n, std::uint64_t seed) {
    if (id == "1a") {
        GmlmParams params;
        params.eta_bar = Tensor({2, 3, 5});
        params.betas = {unit_columns(2, 1), unit_columns(3, 1), unit_columns(5, 1)};
        params.omegas = {ar_matrix(2, 0.5), ar_matrix(3, 0.5), ar_matrix(5, 0.5)};
        return generate_normal_kron(
            params, [](double y) { return Tensor({1, 1, 1}, {y}); }, n, seed);
    }
    if (id == "1b" || id == "1c" || id == "1d") {
        GmlmParams params;
        params.eta_bar = Tensor({2, 3, 5});
        if (id == "1c") {
            // rank-1 sign-alternating factors
            params.betas.resize(3);
            const std::vector<Eigen::Index> dims = {2, 3, 5};
            for (std::size_t k = 0; k < 3; ++k) {
                Eigen::MatrixXd beta(dims[k], 2);
                for (Eigen::Index i = 0; i < dims[k]; ++i) {
                    beta(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
                    beta(i, 1) = -beta(i, 0);
                }
                params.betas[k] = beta;
            }
        } else {
            params.betas = {unit_columns(2, 2), unit_columns(3, 2), unit_columns(5, 2)};
        }
        if (id == "1d") {
            params.omegas = {tridiag_matrix(2, 1.0, 0.5), tridiag_matrix(3, 1.0, 0.5),
                             tridiag_matrix(5, 1.0, 0.5)};
        } else {
            params.omegas = {ar_matrix(2, 0.5), ar_matrix(3, 0.5), ar_matrix(5, 0.5)};
        }
        return generate_normal_kron(params, monomial_design_3, n, seed);
    }
    if (id == "1e") return generate_1e(n, seed);

    if (id == "2a") {
        GmlmParams params = ising_base_params();
        params.betas = {unit_columns(2, 1), unit_columns(3, 1)};
        return generate_ising(params, [](double y) { return Tensor({1, 1}, {y}); }, n, seed);
    }
    if (id == "2b") return generate_ising(ising_base_params(), trig_design, n, seed);
    if (id == "2c") {
        GmlmParams params = ising_base_params();
        Eigen::MatrixXd beta1(2, 2), beta2(3, 2);
        beta1 << 1.0, 0.0, 1.0, 0.0;
        beta2 << 0.0, 0.0, 1.0, -1.0, 0.0, 0.0;
        params.betas = {beta1, beta2};
        return generate_ising(params, trig_design, n, seed);
    }
    if (id == "2d") {
        GmlmParams params = ising_base_params();
        params.omegas = {tridiag_matrix(2, 0.0, 0.5), tridiag_matrix(3, 0.0, 1.0)};
        return generate_ising(params, trig_design, n, seed);
    }
    throw std::invalid_argument("generate: unknown setting id '" + id + "'");
}

namespace {

Eigen::MatrixXd pca_baseline(const Dataset& data, Eigen::Index q) {
    const Eigen::Index p = static_cast<Eigen::Index>(data.X.front().size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const Tensor& x : data.X) mean += x.vec_map();
    mean /= static_cast<double>(data.n());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (const Tensor& x : data.X) {
        const Eigen::VectorXd c = x.vec_map() - mean;
        cov.noalias() += c * c.transpose();
    }
    cov /= static_cast<double>(data.n());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    return eig.eigenvectors().rightCols(q);
}

Dataset center_design(const Dataset& data) {
    Dataset out = data;
    Tensor mean_f(data.F.front().dims());
    for (const Tensor& f : data.F) mean_f += f;
    mean_f *= 1.0 / static_cast<double>(data.n());
    for (Tensor& f : out.F) f -= mean_f;
    return out;
}

}  // namespace

std::vector<ResultRow> run_grid(const std::vector<std::string>& settings,
                                const std::vector<std::size_t>& n_grid,
                                std::size_t replications, std::uint64_t seed) {
    for (const std::string& id : settings)
        if (!is_valid_setting(id)) throw std::invalid_argument("run_grid: unknown setting " + id);

    struct Job {
        std::size_t si, ni, rep, index;
    };
    std::vector<Job> jobs;
    for (std::size_t si = 0; si < settings.size(); ++si)
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni)
            for (std::size_t rep = 0; rep < replications; ++rep)
                jobs.push_back({si, ni, rep, jobs.size()});

    std::vector<std::vector<ResultRow>> rows(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (long long jj = 0; jj < static_cast<long long>(jobs.size()); ++jj) {
        const Job& job = jobs[static_cast<std::size_t>(jj)];
        const std::string& id = settings[job.si];
        const std::size_t n = n_grid[job.ni];
        const std::uint64_t rep_seed = derive_seed(seed, job.index + 1);

        const SimData sim = generate(id, n, rep_seed);
        ResultRow gmlm_row{id, n, job.rep, "gmlm",
                           std::numeric_limits<double>::quiet_NaN(), 0.0, 0};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            FitResult fit;
            if (sim.is_ising) {
                IsingFitConfig cfg;
                cfg.seed = derive_seed(rep_seed, 2);
                fit = ising::fit(center_design(sim.data), cfg);
            } else {
                fit = normal::fit(sim.data);
            }
            gmlm_row.distance = subspace_distance(sim.true_b, fit.params.big_beta());
            gmlm_row.iterations = fit.iterations;
        } catch (const std::exception&) {
            // failure recorded as NaN distance
        }
        gmlm_row.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        ResultRow pca_row{id, n, job.rep, "pca",
                          std::numeric_limits<double>::quiet_NaN(), 0.0, 0};
        const auto t1 = std::chrono::steady_clock::now();
        try {
            const Eigen::MatrixXd b_pca = pca_baseline(sim.data, sim.true_b.cols());
            pca_row.distance = subspace_distance(sim.true_b, b_pca);
        } catch (const std::exception&) {
        }
        pca_row.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

        rows[static_cast<std::size_t>(jj)] = {gmlm_row, pca_row};
    }

    std::vector<ResultRow> out;
    out.reserve(2 * jobs.size());
    for (const auto& pair : rows) out.insert(out.end(), pair.begin(), pair.end());
    return out;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "setting,n,rep,method,distance,seconds,iterations\n";
    os.precision(17);
    for (const ResultRow& row : rows)
        os << row.setting << ',' << row.n << ',' << row.rep << ',' << row.method << ','
           << row.distance << ',' << row.seconds << ',' << row.iterations << '\n';
}

std::vector<ResultRow> read_csv(std::istream& is) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(is, line) || line != "setting,n,rep,method,distance,seconds,iterations")
        throw std::runtime_error("read_csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        ResultRow row;
        std::string field;
        std::getline(ss, row.setting, ',');
        std::getline(ss, field, ',');
        row.n = std::stoull(field);
        std::getline(ss, field, ',');
        row.rep = std::stoull(field);
        std::getline(ss, row.method, ',');
        std::getline(ss, field, ',');
        row.distance = std::stod(field);
        std::getline(ss, field, ',');
        row.seconds = std::stod(field);
        std::getline(ss, field, ',');
        row.iterations = std::stoull(field);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<MomentBenchRow> moment_bench(const std::vector<std::size_t>& p_grid,
                                         std::size_t mc_samples, std::uint64_t seed) {
    std::vector<MomentBenchRow> rows;
    for (std::size_t p : p_grid) {
        std::mt19937_64 rng = make_engine(seed, p);
        std::normal_distribution<double> gauss(0.0, 0.3);
        IsingNaturalParams gamma;
        gamma.p = p;
        gamma.gamma.resize(static_cast<Eigen::Index>(p * (p + 1) / 2));
        for (Eigen::Index i = 0; i < gamma.gamma.size(); ++i) gamma.gamma[i] = gauss(rng);

        MomentBenchRow row;
        row.p = p;
        if (p <= 20) {
            const auto t0 = std::chrono::steady_clock::now();
            ising::exact_moments(gamma);
            row.exact_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        const auto t1 = std::chrono::steady_clock::now();
        ising::mc_moments(gamma, mc_samples, 100, rng);
        row.mc_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
        rows.push_back(row);
    }
    return rows;
}

void write_csv(std::ostream& os, const std::vector<MomentBenchRow>& rows) {
    os << "p,exact_seconds,mc_seconds\n";
    os.precision(17);
    for (const MomentBenchRow& row : rows)
        os << row.p << ',' << row.exact_seconds << ',' << row.mc_seconds << '\n';
}

}  // namespace experiments
}  // namespace gmlm
