#include "gmlm/tensor.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace gmlm;

namespace {

Tensor iota_tensor(std::vector<std::size_t> dims) {
    Tensor t(std::move(dims));
    std::iota(t.vec().begin(), t.vec().end(), 1.0);
    return t;
}

Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng) {
    Tensor t(std::move(dims));
    std::normal_distribution<double> nd;
    for (double& v : t.vec()) v = nd(rng);
    return t;
}

Eigen::MatrixXd random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = nd(rng);
    return m;
}

}  // namespace

// Worked 3x3 example: column-major stacking of A = [1 4 7; 2 5 8; 3 6 9].
TEST_CASE("vec of a 3x3 matrix stacks columns") {
    Eigen::MatrixXd a(3, 3);
    a << 1, 4, 7, 2, 5, 8, 3, 6, 9;
    const Tensor t = Tensor::from_matrix(a);
    for (std::size_t i = 0; i < 9; ++i) CHECK(t[i] == static_cast<double>(i + 1));
}

// Worked 3x3x3 example: vec enumerates entries first index fastest, giving 1..27
// when the frontal slices hold 1..9, 10..18, 19..27 column-major.
TEST_CASE("vec of a 3x3x3 tensor is 1..27 for slice-wise column-major fill") {
    Tensor t({3, 3, 3});
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t r = 0; r < 3; ++r)
                t.at({r, c, s}) = static_cast<double>(9 * s + 3 * c + r + 1);
    for (std::size_t i = 0; i < 27; ++i) CHECK(t[i] == static_cast<double>(i + 1));
}

// Worked 3x4x2 matricization example with frontal slices
//   [1 4 7 10; 2 5 8 11; 3 6 9 12] and [13 16 19 22; 14 17 20 23; 15 18 21 24].
TEST_CASE("matricizations of the worked 3x4x2 example") {
    const Tensor t = iota_tensor({3, 4, 2});

    Eigen::MatrixXd a1(3, 8);
    a1 << 1, 4, 7, 10, 13, 16, 19, 22,
          2, 5, 8, 11, 14, 17, 20, 23,
          3, 6, 9, 12, 15, 18, 21, 24;
    CHECK(unfold(t, 0).isApprox(a1, 0.0));

    Eigen::MatrixXd a2(4, 6);
    a2 << 1, 2, 3, 13, 14, 15,
          4, 5, 6, 16, 17, 18,
          7, 8, 9, 19, 20, 21,
          10, 11, 12, 22, 23, 24;
    CHECK(unfold(t, 1).isApprox(a2, 0.0));

    Eigen::MatrixXd a3(2, 12);
    for (int j = 0; j < 12; ++j) {
        a3(0, j) = j + 1;
        a3(1, j) = j + 13;
    }
    CHECK(unfold(t, 2).isApprox(a3, 0.0));
}

TEST_CASE("refold inverts unfold on every mode") {
    std::mt19937_64 rng(11);
    const Tensor t = random_tensor({2, 5, 3, 4}, rng);
    for (std::size_t k = 0; k < 4; ++k) {
        const Tensor back = refold(unfold(t, k), k, t.dims());
        CHECK(frob_norm(back - t) == 0.0);
    }
}

TEST_CASE("order-1 and order-2 unfoldings match the matrix view") {
    Eigen::MatrixXd m(3, 5);
    m.setRandom();
    const Tensor t = Tensor::from_matrix(m);
    CHECK(unfold(t, 0).isApprox(m, 0.0));
    CHECK(unfold(t, 1).isApprox(m.transpose(), 0.0));
    CHECK(t.as_matrix().isApprox(m, 0.0));
}

// Oracle: vec(T x_k M) for an order-2 tensor reduces to matrix products.
TEST_CASE("mode products on an order-2 tensor are left/right matrix products") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd a = random_matrix(4, 3, rng);
    const Eigen::MatrixXd l = random_matrix(6, 4, rng);
    const Eigen::MatrixXd r = random_matrix(2, 3, rng);
    const Tensor t = Tensor::from_matrix(a);

    CHECK(mode_product(t, 0, l).as_matrix().isApprox(l * a, 1e-14));
    CHECK(mode_product(t, 1, r).as_matrix().isApprox(a * r.transpose(), 1e-14));
}

// Oracle: vec(T x_1 M_1 ... x_r M_r) = (M_r kron ... kron M_1) vec(T).
TEST_CASE("multi-linear product matches the Kronecker-vec identity") {
    std::mt19937_64 rng(7);
    const Tensor t = random_tensor({2, 3, 4}, rng);
    const std::vector<Eigen::MatrixXd> ms = {random_matrix(5, 2, rng),
                                             random_matrix(2, 3, rng),
                                             random_matrix(3, 4, rng)};
    const Tensor out = multi_linear_product(t, ms);
    const Eigen::VectorXd expect = kron_reversed(ms) * t.vec_map();
    CHECK((out.vec_map() - expect).norm() < 1e-12);
    CHECK(out.dims() == std::vector<std::size_t>{5, 2, 3});

    // Partial products agree with padding the remaining modes with identities.
    const std::vector<std::pair<std::size_t, Eigen::MatrixXd>> one_mode = {{1, ms[1]}};
    const Tensor partial = multi_linear_product(t, one_mode);
    std::vector<Eigen::MatrixXd> padded = {Eigen::MatrixXd::Identity(2, 2), ms[1],
                                           Eigen::MatrixXd::Identity(4, 4)};
    CHECK(frob_norm(partial - multi_linear_product(t, padded)) < 1e-13);
}

TEST_CASE("mode products commute across distinct modes") {
    std::mt19937_64 rng(9);
    const Tensor t = random_tensor({3, 4, 2}, rng);
    const Eigen::MatrixXd m0 = random_matrix(5, 3, rng);
    const Eigen::MatrixXd m2 = random_matrix(3, 2, rng);
    const Tensor a = mode_product(mode_product(t, 0, m0), 2, m2);
    const Tensor b = mode_product(mode_product(t, 2, m2), 0, m0);
    CHECK(frob_norm(a - b) < 1e-13);
}

TEST_CASE("inner product and Frobenius norm match flat sums") {
    std::mt19937_64 rng(13);
    const Tensor a = random_tensor({4, 3, 2}, rng);
    const Tensor b = random_tensor({4, 3, 2}, rng);
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    CHECK(inner(a, b) == doctest::Approx(dot).epsilon(1e-14));
    CHECK(frob_norm(a) == doctest::Approx(std::sqrt(inner(a, a))).epsilon(1e-14));
}

TEST_CASE("outer product has the vec(a) vec(b)^T identification") {
    std::mt19937_64 rng(17);
    const Tensor a = random_tensor({2, 3}, rng);
    const Tensor b = random_tensor({4}, rng);
    const Tensor o = outer(a, b);
    CHECK(o.dims() == std::vector<std::size_t>{2, 3, 4});
    const Eigen::MatrixXd expect = a.vec_map() * b.vec_map().transpose();
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(o[i + 6 * j] == doctest::Approx(expect(static_cast<Eigen::Index>(i),
                                                         static_cast<Eigen::Index>(j))));
}

TEST_CASE("kron matches entry-by-entry block definition") {
    Eigen::MatrixXd a(2, 2), b(2, 3);
    a << 1, 2, 3, 4;
    b << 5, 6, 7, 8, 9, 10;
    const Eigen::MatrixXd k = kron(a, b);
    REQUIRE(k.rows() == 4);
    REQUIRE(k.cols() == 6);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(k(i, j) == a(i / 2, j / 3) * b(i % 2, j % 3));

    const std::vector<Eigen::MatrixXd> fs = {a, b};
    CHECK(kron_reversed(fs).isApprox(kron(b, a), 0.0));
}
