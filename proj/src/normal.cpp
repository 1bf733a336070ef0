#include "gmlm/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace gmlm {

namespace {

std::vector<Eigen::MatrixXd> omega_inverses(const GmlmParams& params) {
    std::vector<Eigen::MatrixXd> inv(params.order());
    for (std::size_t k = 0; k < params.order(); ++k) {
        Eigen::LLT<Eigen::MatrixXd> llt(params.omegas[k]);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("normal: omega factor not positive definite");
        inv[k] = llt.solve(Eigen::MatrixXd::Identity(params.omegas[k].rows(),
                                                     params.omegas[k].cols()));
    }
    return inv;
}

double log_det_big_omega(const GmlmParams& params) {
    // log det ⊗_{k=r}^{1} Ω_k = Σ_k (p / p_k) log det Ω_k
    double p_total = 1.0;
    for (const auto& omega : params.omegas) p_total *= static_cast<double>(omega.rows());
    double out = 0.0;
    for (const auto& omega : params.omegas) {
        Eigen::LLT<Eigen::MatrixXd> llt(omega);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("normal: omega factor not positive definite");
        const double log_det =
            2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        out += p_total / static_cast<double>(omega.rows()) * log_det;
    }
    return out;
}

}  // namespace

Tensor NormalFamily::mean(const GmlmParams& params, const Tensor& f) const {
    return multi_linear_product(natural_param_eta1(params, f), omega_inverses(params));
}

Eigen::MatrixXd NormalFamily::second_moment(const GmlmParams& params, const Tensor& f) const {
    const Eigen::VectorXd mu = mean(params, f).vec_map();
    return kron_reversed(omega_inverses(params)) + mu * mu.transpose();
}

double NormalFamily::log_partition(const GmlmParams& params, const Tensor& f) const {
    // b(η_y) = ½ η₁ᵀ Ω⁻¹ η₁ − ½ log det Ω, evaluated factor-wise
    const Tensor eta1 = natural_param_eta1(params, f);
    const Tensor mu = multi_linear_product(eta1, omega_inverses(params));
    return 0.5 * inner(eta1, mu) - 0.5 * log_det_big_omega(params);
}

namespace normal {

Tensor conditional_mean(const GmlmParams& params, const Tensor& f) {
    const std::vector<Eigen::MatrixXd> inv = omega_inverses(params);
    std::vector<Eigen::MatrixXd> factors(params.order());
    for (std::size_t k = 0; k < params.order(); ++k) factors[k] = inv[k] * params.betas[k];
    return multi_linear_product(f, factors);
}

Tensor sample_conditional(const GmlmParams& params, const Tensor& f, std::mt19937_64& rng) {
    NormalFamily family;
    Tensor x = family.mean(params, f);

    // symmetric square roots Σ_k^{1/2} with Σ_k = Ω_k⁻¹
    std::vector<Eigen::MatrixXd> sigma_sqrt(params.order());
    for (std::size_t k = 0; k < params.order(); ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(params.omegas[k]);
        if (eig.eigenvalues().minCoeff() <= 0.0)
            throw std::runtime_error("sample_conditional: omega factor not positive definite");
        sigma_sqrt[k] = eig.eigenvectors() *
                        eig.eigenvalues().array().rsqrt().matrix().asDiagonal() *
                        eig.eigenvectors().transpose();
    }

    Tensor w(x.dims());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = gauss(rng);
    x += multi_linear_product(w, sigma_sqrt);
    return x;
}

GmlmParams initialize(const Dataset& data) {
    data.validate();
    const std::size_t r = data.X.front().order();
    const double n = static_cast<double>(data.n());
    if (data.F.front().order() != r)
        throw std::invalid_argument("initialize: X/F order mismatch");

    GmlmParams params;
    params.eta_bar = Tensor(data.X.front().dims());
    params.betas.resize(r);
    params.omegas.resize(r);

    for (std::size_t k = 0; k < r; ++k) {
        const Eigen::Index pk = static_cast<Eigen::Index>(data.X.front().dim(k));
        const Eigen::Index qk = static_cast<Eigen::Index>(data.F.front().dim(k));
        if (qk > pk) throw std::invalid_argument("initialize: design dim exceeds predictor dim");

        Eigen::MatrixXd cov_x = Eigen::MatrixXd::Zero(pk, pk);
        Eigen::MatrixXd cov_f = Eigen::MatrixXd::Zero(qk, qk);
        for (std::size_t i = 0; i < data.n(); ++i) {
            const Eigen::MatrixXd xk = unfold(data.X[i], k);
            const Eigen::MatrixXd fk = unfold(data.F[i], k);
            cov_x.noalias() += xk * xk.transpose();
            cov_f.noalias() += fk * fk.transpose();
        }
        cov_x /= n;
        cov_f /= n;
        if (cov_x.norm() == 0.0)
            throw std::runtime_error("initialize: degenerate all-zero predictors");

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_x(cov_x), eig_f(cov_f);
        Eigen::MatrixXd u(pk, qk), v(qk, qk);
        Eigen::VectorXd d(qk);
        for (Eigen::Index j = 0; j < qk; ++j) {
            // leading eigenpairs (solver returns ascending order)
            const double lx = std::max(eig_x.eigenvalues()(pk - 1 - j), 1e-8);
            const double lf = std::max(eig_f.eigenvalues()(qk - 1 - j), 1e-8);
            u.col(j) = eig_x.eigenvectors().col(pk - 1 - j);
            v.col(j) = eig_f.eigenvectors().col(qk - 1 - j);
            d(j) = std::sqrt(lx * lf);
        }
        params.betas[k] = u * d.array().sqrt().matrix().asDiagonal() * v.transpose();
        params.omegas[k] = Eigen::MatrixXd::Identity(pk, pk);
    }
    return params;
}

Eigen::MatrixXd beta_update(std::size_t j, const GmlmParams& params, const Dataset& data) {
    const std::size_t r = params.order();
    if (j >= r) throw std::invalid_argument("beta_update: mode out of range");
    const std::vector<Eigen::MatrixXd> inv = omega_inverses(params);

    const Eigen::Index qj = params.betas[j].cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(qj, qj);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(qj, params.betas[j].rows());
    for (std::size_t i = 0; i < data.n(); ++i) {
        std::vector<std::pair<std::size_t, Eigen::MatrixXd>> with_inv, plain;
        for (std::size_t k = 0; k < r; ++k) {
            if (k == j) continue;
            with_inv.emplace_back(k, inv[k] * params.betas[k]);
            plain.emplace_back(k, params.betas[k]);
        }
        const Eigen::MatrixXd lhs = unfold(multi_linear_product(data.F[i], with_inv), j);
        const Eigen::MatrixXd rhs = unfold(multi_linear_product(data.F[i], plain), j);
        gram.noalias() += lhs * rhs.transpose();
        cross.noalias() += rhs * unfold(data.X[i], j).transpose();
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw std::runtime_error("beta_update: singular Gram matrix (rcond ~ " +
                                 std::to_string(lu.rcond()) + ")");
    // the closed form yields β_jᵀ
    const Eigen::MatrixXd beta_t = lu.solve(cross * params.omegas[j]);
    return beta_t.transpose();
}

std::vector<Eigen::MatrixXd> omega_update(const GmlmParams& params, const Dataset& data,
                                          const NormalFitConfig& config) {
    const std::size_t r = params.order();
    std::vector<Tensor> residuals;
    residuals.reserve(data.n());
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        Tensor res = data.X[i] - conditional_mean(params, data.F[i]);
        sq_sum += inner(res, res);
        residuals.push_back(std::move(res));
    }
    if (sq_sum == 0.0) throw std::runtime_error("omega_update: zero residuals, degenerate fit");
    sq_sum /= static_cast<double>(data.n());

    std::vector<Eigen::MatrixXd> sigma_tilde(r);
    double trace_prod = 1.0;
    for (std::size_t j = 0; j < r; ++j) {
        const Eigen::Index pj = params.omegas[j].rows();
        sigma_tilde[j] = Eigen::MatrixXd::Zero(pj, pj);
        for (const Tensor& res : residuals) {
            const Eigen::MatrixXd rj = unfold(res, j);
            sigma_tilde[j].noalias() += rj * rj.transpose();
        }
        trace_prod *= sigma_tilde[j].trace();
    }
    const double s_tilde = std::pow(sq_sum / trace_prod, 1.0 / static_cast<double>(r));

    std::vector<Eigen::MatrixXd> omegas(r);
    for (std::size_t j = 0; j < r; ++j) {
        Eigen::MatrixXd scaled = s_tilde * sigma_tilde[j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
        const double lambda_max = eig.eigenvalues().maxCoeff();
        const double lambda_min = eig.eigenvalues().minCoeff();
        if (!(lambda_min > 0.0) || lambda_min / lambda_max < config.cond_threshold) {
            scaled += config.reg_coeff * lambda_max *
                      Eigen::MatrixXd::Identity(scaled.rows(), scaled.cols());
            eig.compute(scaled);
        }
        omegas[j] = eig.eigenvectors() *
                    eig.eigenvalues().array().inverse().matrix().asDiagonal() *
                    eig.eigenvectors().transpose();
        omegas[j] = 0.5 * (omegas[j] + omegas[j].transpose());
    }
    return omegas;
}

FitResult fit(const Dataset& data, const NormalFitConfig& config) {
    data.validate();
    if (data.n() < 2) throw std::invalid_argument("fit: need n >= 2");

    // demean X, center F
    Dataset centered = data;
    Tensor mean_x(data.X.front().dims());
    Tensor mean_f(data.F.front().dims());
    for (std::size_t i = 0; i < data.n(); ++i) {
        mean_x += data.X[i];
        mean_f += data.F[i];
    }
    mean_x *= 1.0 / static_cast<double>(data.n());
    mean_f *= 1.0 / static_cast<double>(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        centered.X[i] -= mean_x;
        centered.F[i] -= mean_f;
    }

    NormalFamily family;
    GmlmParams params = initialize(centered);

    FitResult result;
    result.mean_x = mean_x;
    double objective = log_likelihood(params, centered, family);
    result.objective_trace.push_back(objective);

    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        const GmlmParams previous = params;
        for (std::size_t j = 0; j < params.order(); ++j)
            params.betas[j] = beta_update(j, params, centered);
        params.omegas = omega_update(params, centered, config);

        const double next = log_likelihood(params, centered, family);
        if (!std::isfinite(next))
            throw std::runtime_error("fit: non-finite objective at iteration " +
                                     std::to_string(iter + 1));
        if (next < objective) {
            // The residual-moment Omega step is not exact coordinate ascent and
            // can dip by rounding-scale amounts at the optimum; keep the last
            // ascent iterate and stop.
            params = previous;
            result.converged = true;
            break;
        }
        result.objective_trace.push_back(next);
        result.iterations = iter + 1;
        const double rel_change = std::abs(next - objective) / (1.0 + std::abs(next));
        objective = next;
        if (rel_change < config.rel_tol) {
            result.converged = true;
            break;
        }
    }

    result.params = normalize(params);
    return result;
}

}  // namespace normal

}  // namespace gmlm
