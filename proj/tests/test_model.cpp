#include "gmlm/ising.hpp"
#include "gmlm/model.hpp"
#include "gmlm/normal.hpp"
#include "gmlm/rng.hpp"

#include <doctest.h>

#include <random>

using namespace gmlm;

namespace {

Eigen::MatrixXd random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                              double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = nd(rng);
    return m;
}

Eigen::MatrixXd random_spd(std::size_t p, std::mt19937_64& rng) {
    const Eigen::MatrixXd a = random_matrix(p, p, rng, 0.3);
    return (a * a.transpose() + Eigen::MatrixXd::Identity(p, p)).eval();
}

Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng, double scale = 1.0) {
    Tensor t(std::move(dims));
    std::normal_distribution<double> nd(0.0, scale);
    for (double& v : t.vec()) v = nd(rng);
    return t;
}

GmlmParams random_normal_params(const std::vector<std::size_t>& p,
                                const std::vector<std::size_t>& q, std::mt19937_64& rng) {
    GmlmParams params;
    params.eta_bar = random_tensor(p, rng, 0.2);
    for (std::size_t k = 0; k < p.size(); ++k) {
        params.betas.push_back(random_matrix(p[k], q[k], rng, 0.5));
        params.omegas.push_back(random_spd(p[k], rng));
    }
    return params;
}

Dataset random_normal_dataset(const GmlmParams& params, std::size_t n, std::uint64_t seed) {
    Dataset data;
    std::mt19937_64 rng = make_engine(seed);
    for (std::size_t i = 0; i < n; ++i) {
        data.y.push_back(std::normal_distribution<double>()(rng));
        data.F.push_back(random_tensor(params.q_dims(), rng));
        data.X.push_back(normal::sample_conditional(params, data.F.back(), rng));
    }
    return data;
}

// Central finite differences of the log-likelihood against the analytic
// gradient bundle. Off-diagonal Omega entries are perturbed in symmetric
// pairs, so the differential picks up twice the (symmetric) gradient entry.
void check_gradients_fd(const GmlmParams& params, const Dataset& data,
                        const ExponentialFamily& family, double h, double tol,
                        bool check_eta_bar) {
    const GradientBundle grad = gradients(params, data, family);

    auto ll = [&](const GmlmParams& p) { return log_likelihood(p, data, family); };

    if (check_eta_bar) {
        for (std::size_t i = 0; i < params.eta_bar.size(); ++i) {
            GmlmParams plus = params, minus = params;
            plus.eta_bar[i] += h;
            minus.eta_bar[i] -= h;
            const double fd = (ll(plus) - ll(minus)) / (2 * h);
            CHECK(std::abs(fd - grad.eta_bar[i]) < tol * (1.0 + std::abs(grad.eta_bar[i])));
        }
    }

    for (std::size_t j = 0; j < params.order(); ++j) {
        for (Eigen::Index e = 0; e < params.betas[j].size(); ++e) {
            GmlmParams plus = params, minus = params;
            plus.betas[j](e) += h;
            minus.betas[j](e) -= h;
            const double fd = (ll(plus) - ll(minus)) / (2 * h);
            const double g = grad.betas[j](e);
            CHECK(std::abs(fd - g) < tol * (1.0 + std::abs(g)));
        }
        for (Eigen::Index u = 0; u < params.omegas[j].rows(); ++u) {
            for (Eigen::Index v = 0; v <= u; ++v) {
                GmlmParams plus = params, minus = params;
                plus.omegas[j](u, v) += h;
                minus.omegas[j](u, v) -= h;
                if (u != v) {
                    plus.omegas[j](v, u) += h;
                    minus.omegas[j](v, u) -= h;
                }
                const double fd = (ll(plus) - ll(minus)) / (2 * h);
                const double g =
                    u == v ? grad.omegas[j](u, v) : grad.omegas[j](u, v) + grad.omegas[j](v, u);
                CHECK(std::abs(fd - g) < tol * (1.0 + std::abs(g)));
            }
        }
    }
}

}  // namespace

TEST_CASE("natural_param_eta1 matches vec(eta_bar) + B vec(f)") {
    std::mt19937_64 rng(21);
    const GmlmParams params = random_normal_params({3, 2, 4}, {2, 2, 3}, rng);
    const Tensor f = random_tensor({2, 2, 3}, rng);
    const Tensor eta1 = natural_param_eta1(params, f);
    const Eigen::VectorXd expect =
        params.eta_bar.vec_map() + params.big_beta() * f.vec_map();
    CHECK((eta1.vec_map() - expect).norm() < 1e-12);
}

TEST_CASE("sufficient_reduction matches B^T vec(x - mean)") {
    std::mt19937_64 rng(23);
    const GmlmParams params = random_normal_params({3, 4}, {2, 2}, rng);
    const Tensor x = random_tensor({3, 4}, rng);
    const Tensor mean_x = random_tensor({3, 4}, rng);
    const Tensor r = sufficient_reduction(params, x, mean_x);
    const Eigen::VectorXd expect =
        params.big_beta().transpose() * (x.vec_map() - mean_x.vec_map());
    CHECK(r.dims() == std::vector<std::size_t>{2, 2});
    CHECK((r.vec_map() - expect).norm() < 1e-12);
}

TEST_CASE("big_beta and big_omega are the reversed Kronecker products") {
    std::mt19937_64 rng(25);
    const GmlmParams params = random_normal_params({2, 3}, {2, 1}, rng);
    CHECK(params.big_beta().isApprox(kron(params.betas[1], params.betas[0]), 1e-14));
    CHECK(params.big_omega().isApprox(kron(params.omegas[1], params.omegas[0]), 1e-14));
}

TEST_CASE("validate rejects asymmetric or mismatched parameters") {
    std::mt19937_64 rng(27);
    GmlmParams params = random_normal_params({3, 2}, {2, 2}, rng);
    CHECK_NOTHROW(params.validate());
    GmlmParams bad = params;
    bad.omegas[0](0, 1) += 1.0;
    CHECK_THROWS(bad.validate());
    bad = params;
    bad.eta_bar = random_tensor({2, 2}, rng);
    CHECK_THROWS(bad.validate());
    bad = params;
    bad.omegas.pop_back();
    CHECK_THROWS(bad.validate());
}

TEST_CASE("normal gradients agree with finite differences") {
    std::mt19937_64 rng(29);
    const GmlmParams params = random_normal_params({2, 3}, {2, 2}, rng);
    const Dataset data = random_normal_dataset(params, 25, 404);
    // Perturb away from the stationary point so gradients are non-trivial.
    GmlmParams off = params;
    off.betas[0].array() += 0.1;
    off.omegas[1](0, 0) += 0.2;
    check_gradients_fd(off, data, NormalFamily(), 1e-5, 1e-6, true);
}

TEST_CASE("ising gradients agree with finite differences (p = 6)") {
    std::mt19937_64 rng(31);
    GmlmParams params;
    params.eta_bar = Tensor({2, 3});  // zero
    params.betas = {random_matrix(2, 1, rng, 0.8), random_matrix(3, 1, rng, 0.8)};
    Eigen::MatrixXd o1 = random_matrix(2, 2, rng, 0.4);
    Eigen::MatrixXd o2 = random_matrix(3, 3, rng, 0.4);
    params.omegas = {(o1 + o1.transpose()) / 2.0, (o2 + o2.transpose()) / 2.0};

    Dataset data;
    std::mt19937_64 data_rng = make_engine(99);
    for (std::size_t i = 0; i < 20; ++i) {
        data.y.push_back(std::uniform_real_distribution<double>(-1, 1)(data_rng));
        Tensor f({1, 1});
        f[0] = data.y.back();
        data.F.push_back(f);
        data.X.push_back(ising::sample_conditional(params, f, data_rng));
    }
    check_gradients_fd(params, data, IsingFamily(), 1e-5, 1e-4, false);
}

TEST_CASE("log-likelihood is invariant under compensated factor rescaling") {
    std::mt19937_64 rng(33);
    const GmlmParams params = random_normal_params({2, 3, 2}, {1, 2, 1}, rng);
    const Dataset data = random_normal_dataset(params, 10, 505);
    const NormalFamily family;
    const double base = log_likelihood(params, data, family);

    GmlmParams scaled = params;
    scaled.betas[1] *= 3.0;
    scaled.betas[0] /= 3.0;
    scaled.omegas[2] *= 0.25;
    scaled.omegas[0] *= 4.0;
    CHECK(log_likelihood(scaled, data, family) ==
          doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("normalize preserves the Kronecker-level parameters") {
    std::mt19937_64 rng(35);
    const GmlmParams params = random_normal_params({2, 3, 2}, {2, 1, 2}, rng);
    const GmlmParams normed = normalize(params);
    CHECK((normed.big_beta() - params.big_beta()).norm() < 1e-12);
    CHECK((normed.big_omega() - params.big_omega()).norm() < 1e-12);
    for (std::size_t k = 1; k < normed.order(); ++k) {
        CHECK(normed.betas[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(normed.omegas[k].norm() == doctest::Approx(1.0).epsilon(1e-12));
        Eigen::Index mi = 0, mj = 0;
        normed.betas[k].cwiseAbs().maxCoeff(&mi, &mj);
        CHECK(normed.betas[k](mi, mj) > 0.0);
    }
    CHECK_THROWS(normalize(GmlmParams{Tensor({2, 2}),
                                      {Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Ones(2, 1)},
                                      {Eigen::MatrixXd::Identity(2, 2),
                                       Eigen::MatrixXd::Identity(2, 2)}}));
}

TEST_CASE("parallel likelihood and gradients match the serial reference") {
    std::mt19937_64 rng(37);
    const GmlmParams params = random_normal_params({3, 2, 2}, {2, 2, 1}, rng);
    const Dataset data = random_normal_dataset(params, 64, 606);
    const NormalFamily family;

    CHECK(log_likelihood(params, data, family) ==
          doctest::Approx(log_likelihood_serial(params, data, family)).epsilon(1e-12));

    const GradientBundle a = gradients(params, data, family);
    const GradientBundle b = gradients_serial(params, data, family);
    CHECK(frob_norm(a.eta_bar - b.eta_bar) < 1e-12);
    for (std::size_t j = 0; j < params.order(); ++j) {
        CHECK((a.betas[j] - b.betas[j]).norm() < 1e-12);
        CHECK((a.omegas[j] - b.omegas[j]).norm() < 1e-12);
    }
}
