#include "gmlm/experiments.hpp"
#include "gmlm/tensor.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gmlm;
using experiments::subspace_distance;

TEST_CASE("subspace distance is zero for equal spans and scale invariant") {
    Eigen::MatrixXd b(4, 2);
    b << 1, 0, 0, 1, 1, 1, 0, 2;
    CHECK(subspace_distance(b, b) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(subspace_distance(b, (3.0 * b).eval()) == doctest::Approx(0.0).epsilon(1e-12));
    // Column operations preserve the span.
    Eigen::MatrixXd mixed(4, 2);
    mixed.col(0) = b.col(0) + b.col(1);
    mixed.col(1) = b.col(0) - b.col(1);
    CHECK(subspace_distance(b, mixed) < 1e-12);
}

TEST_CASE("subspace distance is one for orthogonal one-dimensional spans") {
    Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(5, 1);
    Eigen::MatrixXd e2 = Eigen::MatrixXd::Zero(5, 1);
    e1(0, 0) = 1.0;
    e2(1, 0) = 1.0;
    // ||P1 - P2||_F = sqrt(2); normalization by sqrt(min(2, 8)) gives 1.
    CHECK(subspace_distance(e1, e2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("subspace distance matches the principal-angle formula") {
    // One-dimensional spans at angle t: ||P1 - P2||_F = sqrt(2) |sin t|.
    const double t = 0.7;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 1);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 1);
    a(0, 0) = 1.0;
    b(0, 0) = std::cos(t);
    b(1, 0) = std::sin(t);
    CHECK(subspace_distance(a, b) == doctest::Approx(std::abs(std::sin(t))).epsilon(1e-12));
}

TEST_CASE("rank-deficient inputs use the effective rank") {
    Eigen::MatrixXd b(4, 2);
    b.col(0) << 1, 2, 3, 4;
    b.col(1) = 2.0 * b.col(0);  // rank one
    Eigen::MatrixXd single = b.col(0);
    CHECK(subspace_distance(b, single) < 1e-12);
}

TEST_CASE("setting registry accepts exactly the documented ids") {
    for (const char* id : {"1a", "1b", "1c", "1d", "1e", "2a", "2b", "2c", "2d"})
        CHECK(experiments::is_valid_setting(id));
    CHECK_FALSE(experiments::is_valid_setting("3a"));
    CHECK_FALSE(experiments::is_valid_setting(""));
    CHECK_THROWS(experiments::generate("bogus", 10, 1));
}

TEST_CASE("generators are deterministic in the seed") {
    for (const char* id : {"1a", "1e", "2b"}) {
        const experiments::SimData a = experiments::generate(id, 25, 77);
        const experiments::SimData b = experiments::generate(id, 25, 77);
        const experiments::SimData c = experiments::generate(id, 25, 78);
        REQUIRE(a.data.n() == 25);
        double diff = 0.0, diff_seed = 0.0;
        for (std::size_t i = 0; i < 25; ++i) {
            diff += frob_norm(a.data.X[i] - b.data.X[i]);
            diff_seed += frob_norm(a.data.X[i] - c.data.X[i]);
        }
        CHECK(diff == 0.0);
        CHECK(diff_seed > 0.0);
    }
}

TEST_CASE("normal settings have the documented shapes") {
    const experiments::SimData s1a = experiments::generate("1a", 10, 3);
    CHECK(s1a.data.X[0].dims() == std::vector<std::size_t>{2, 3, 5});
    CHECK(s1a.data.F[0].dims() == std::vector<std::size_t>{1, 1, 1});
    CHECK(s1a.true_b.rows() == 30);
    CHECK(s1a.true_b.cols() == 1);
    CHECK_FALSE(s1a.is_ising);

    const experiments::SimData s1b = experiments::generate("1b", 10, 3);
    CHECK(s1b.data.X[0].dims() == std::vector<std::size_t>{2, 3, 5});
    CHECK(s1b.data.F[0].dims() == std::vector<std::size_t>{2, 2, 2});
    CHECK(s1b.true_b.cols() == 8);

    // 1b design is the monomial basis y^{i+j+k}.
    const double y = s1b.data.y[4];
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 2; ++i)
                CHECK(s1b.data.F[4].at({i, j, k}) ==
                      doctest::Approx(std::pow(y, static_cast<double>(i + j + k)))
                          .epsilon(1e-12));

    const experiments::SimData s1e = experiments::generate("1e", 10, 3);
    CHECK(s1e.data.X[0].dims() == std::vector<std::size_t>{5, 5});
    CHECK(s1e.data.F[0].dims() == std::vector<std::size_t>{2, 2});
    CHECK(s1e.true_b.cols() == 4);
}

TEST_CASE("ising settings draw binary data with the planted reduction") {
    const experiments::SimData s2a = experiments::generate("2a", 40, 5);
    CHECK(s2a.is_ising);
    CHECK(s2a.data.X[0].dims() == std::vector<std::size_t>{2, 3});
    CHECK(s2a.data.F[0].dims() == std::vector<std::size_t>{1, 1});
    for (const Tensor& x : s2a.data.X)
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK((x[i] == 0.0 || x[i] == 1.0));
    for (double y : s2a.data.y) {
        CHECK(y >= -1.0);
        CHECK(y <= 1.0);
    }
    // B = kron(beta_2, beta_1) with beta_1 = (1,0)', beta_2 = (1,0,0)' is e_1.
    REQUIRE(s2a.true_b.cols() == 1);
    CHECK(s2a.true_b(0, 0) == 1.0);
    CHECK(s2a.true_b.bottomRows(5).norm() == 0.0);

    const experiments::SimData s2c = experiments::generate("2c", 10, 5);
    CHECK(s2c.data.F[0].dims() == std::vector<std::size_t>{2, 2});
}

TEST_CASE("result csv round-trips through write and read") {
    std::vector<experiments::ResultRow> rows;
    rows.push_back({"1a", 100, 0, "gmlm", 0.25, 1.5, 12});
    rows.push_back({"2b", 750, 19, "pca", std::nan(""), 0.125, 0});
    std::stringstream buf;
    experiments::write_csv(buf, rows);
    CHECK(buf.str().rfind("setting,n,rep,method,distance,seconds,iterations\n", 0) == 0);

    const std::vector<experiments::ResultRow> back = experiments::read_csv(buf);
    REQUIRE(back.size() == 2);
    CHECK(back[0].setting == "1a");
    CHECK(back[0].n == 100);
    CHECK(back[0].method == "gmlm");
    CHECK(back[0].distance == doctest::Approx(0.25));
    CHECK(back[0].iterations == 12);
    CHECK(back[1].setting == "2b");
    CHECK(std::isnan(back[1].distance));
}

TEST_CASE("run_grid produces one gmlm and one pca row per replication") {
    const auto rows = experiments::run_grid({"1a"}, {100}, 2, 31);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].method == "gmlm");
    CHECK(rows[1].method == "pca");
    for (const auto& row : rows) {
        CHECK(row.setting == "1a");
        CHECK(row.n == 100);
        CHECK(row.distance >= 0.0);
        CHECK(row.distance <= std::sqrt(2.0) + 1e-9);
    }
    // Deterministic in the master seed.
    const auto again = experiments::run_grid({"1a"}, {100}, 2, 31);
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].distance == again[i].distance);
}
