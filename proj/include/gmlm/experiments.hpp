#pragma once

#include "gmlm/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gmlm {
namespace experiments {

/// Normalized projection distance between the column spans of B and B̂:
/// ‖P_B − P_B̂‖_F · (min(rank B + rank B̂, 2p − rank B − rank B̂))^{−1/2}.
double subspace_distance(const Eigen::MatrixXd& b, const Eigen::MatrixXd& b_hat);

struct SimData {
    Dataset data;
    Eigen::MatrixXd true_b;  // vectorized reduction matrix used for scoring
    bool is_ising = false;
};

bool is_valid_setting(const std::string& id);

/// Reproduce the simulation settings 1a–1e (multi-linear normal; y standard
/// normal) and 2a–2d (2×3 Ising; y uniform on [−1, 1]).
SimData generate(const std::string& id, std::size_t n, std::uint64_t seed);

struct ResultRow {
    std::string setting;
    std::size_t n = 0;
    std::size_t rep = 0;
    std::string method;  // "gmlm" or "pca"
    double distance = 0.0;
    double seconds = 0.0;
    std::size_t iterations = 0;
};

/// Replication runner: per (setting, n, rep) fit GMLM and the plain-PCA
/// baseline on vec X, score against the true B. Failures are recorded as rows
/// with NaN distance, not fatal. Rows come in (setting, n, rep) order.
std::vector<ResultRow> run_grid(const std::vector<std::string>& settings,
                                const std::vector<std::size_t>& n_grid,
                                std::size_t replications, std::uint64_t seed);

/// CSV with header `setting,n,rep,method,distance,seconds,iterations`.
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& is);

struct MomentBenchRow {
    std::size_t p = 0;
    double exact_seconds = -1.0;  // negative when the exact branch is skipped
    double mc_seconds = 0.0;
};

/// Wall-clock comparison of exact vs Monte-Carlo Ising second moments.
std::vector<MomentBenchRow> moment_bench(const std::vector<std::size_t>& p_grid,
                                         std::size_t mc_samples, std::uint64_t seed);
void write_csv(std::ostream& os, const std::vector<MomentBenchRow>& rows);

}  // namespace experiments
}  // namespace gmlm
