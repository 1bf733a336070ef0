#include "gmlm/model.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

namespace gmlm {

std::vector<std::size_t> GmlmParams::p_dims() const {
    std::vector<std::size_t> p(betas.size());
    for (std::size_t k = 0; k < betas.size(); ++k)
        p[k] = static_cast<std::size_t>(betas[k].rows());
    return p;
}

std::vector<std::size_t> GmlmParams::q_dims() const {
    std::vector<std::size_t> q(betas.size());
    for (std::size_t k = 0; k < betas.size(); ++k)
        q[k] = static_cast<std::size_t>(betas[k].cols());
    return q;
}

Eigen::MatrixXd GmlmParams::big_beta() const { return kron_reversed(betas); }
Eigen::MatrixXd GmlmParams::big_omega() const { return kron_reversed(omegas); }

void GmlmParams::validate() const {
    const std::size_t r = betas.size();
    if (r == 0) throw std::invalid_argument("GmlmParams: no factors");
    if (omegas.size() != r) throw std::invalid_argument("GmlmParams: beta/omega count mismatch");
    if (eta_bar.order() != r) throw std::invalid_argument("GmlmParams: eta_bar order mismatch");
    for (std::size_t k = 0; k < r; ++k) {
        if (static_cast<std::size_t>(betas[k].rows()) != eta_bar.dim(k))
            throw std::invalid_argument("GmlmParams: beta rows != eta_bar dim");
        if (omegas[k].rows() != omegas[k].cols() || omegas[k].rows() != betas[k].rows())
            throw std::invalid_argument("GmlmParams: omega shape mismatch");
        if ((omegas[k] - omegas[k].transpose()).norm() > 1e-12 * (1.0 + omegas[k].norm()))
            throw std::invalid_argument("GmlmParams: omega not symmetric");
    }
}

void Dataset::validate() const {
    if (X.empty() || X.size() != F.size())
        throw std::invalid_argument("Dataset: need matching non-empty X, F");
    for (const Tensor& x : X)
        if (!x.same_dims(X.front())) throw std::invalid_argument("Dataset: ragged X dims");
    for (const Tensor& f : F)
        if (!f.same_dims(F.front())) throw std::invalid_argument("Dataset: ragged F dims");
}

Tensor natural_param_eta1(const GmlmParams& params, const Tensor& f) {
    return params.eta_bar + multi_linear_product(f, params.betas);
}

Tensor sufficient_reduction(const GmlmParams& params, const Tensor& x, const Tensor& mean_x) {
    if (!x.same_dims(mean_x))
        throw std::invalid_argument("sufficient_reduction: mean_x dims mismatch");
    std::vector<Eigen::MatrixXd> beta_t(params.order());
    for (std::size_t k = 0; k < params.order(); ++k) beta_t[k] = params.betas[k].transpose();
    return multi_linear_product(x - mean_x, beta_t);
}

namespace {

double observation_term(const GmlmParams& params, const ExponentialFamily& family,
                        const Tensor& x, const Tensor& f) {
    const Tensor eta1 = natural_param_eta1(params, f);
    const Tensor x_omega = multi_linear_product(x, params.omegas);
    return inner(eta1, x) + family.scale() * inner(x_omega, x) -
           family.log_partition(params, f);
}

struct GradientAccum {
    Tensor eta_bar;
    std::vector<Eigen::MatrixXd> betas;
    Eigen::MatrixXd m_sum;  // Σᵢ (vec Xᵢ vec Xᵢᵀ − g₂(η_{yᵢ}))

    explicit GradientAccum(const GmlmParams& params)
        : eta_bar(params.eta_bar.dims()), betas(params.order()) {
        for (std::size_t k = 0; k < params.order(); ++k)
            betas[k] = Eigen::MatrixXd::Zero(params.betas[k].rows(), params.betas[k].cols());
        const Eigen::Index p = static_cast<Eigen::Index>(eta_bar.size());
        m_sum = Eigen::MatrixXd::Zero(p, p);
    }

    void add_observation(const GmlmParams& params, const ExponentialFamily& family,
                         const Tensor& x, const Tensor& f) {
        add_moments(params, x, f, family.mean(params, f), family.second_moment(params, f));
    }

    void add_moments(const GmlmParams& params, const Tensor& x, const Tensor& f,
                     const Tensor& g1, const Eigen::MatrixXd& g2) {
        const std::size_t r = params.order();
        const Tensor resid = x - g1;
        eta_bar += resid;
        for (std::size_t j = 0; j < r; ++j) {
            // 𝔉 ×_{k≠j} β_k, then pair the j-mode unfoldings
            std::vector<std::pair<std::size_t, Eigen::MatrixXd>> other;
            for (std::size_t k = 0; k < r; ++k)
                if (k != j) other.emplace_back(k, params.betas[k]);
            const Tensor f_part = multi_linear_product(f, other);
            betas[j].noalias() += unfold(resid, j) * unfold(f_part, j).transpose();
        }
        const Eigen::VectorXd vx = x.vec_map();
        m_sum.noalias() += vx * vx.transpose();
        m_sum -= g2;
    }

    void merge(const GradientAccum& o) {
        eta_bar += o.eta_bar;
        for (std::size_t k = 0; k < betas.size(); ++k) betas[k] += o.betas[k];
        m_sum += o.m_sum;
    }
};

// Contract Σᵢ(XᵢᵒXᵢ − g₂) against ⊗_{k≠j} vec(Ω_k)ᵀ for every j: the (u, v)
// entry of the p x p accumulator contributes M[u,v]·Π_{k≠j}Ω_k[u_k,v_k] to
// (∇Ω_j)[u_j, v_j], with (u_1, …, u_r) the mixed-radix digits of u.
std::vector<Eigen::MatrixXd> omega_contraction(const GmlmParams& params,
                                               const Eigen::MatrixXd& m_sum) {
    const std::size_t r = params.order();
    const std::size_t p = static_cast<std::size_t>(m_sum.rows());

    std::vector<std::vector<std::size_t>> digit(r, std::vector<std::size_t>(p));
    for (std::size_t u = 0; u < p; ++u) {
        std::size_t rest = u;
        for (std::size_t k = 0; k < r; ++k) {
            const std::size_t pk = static_cast<std::size_t>(params.omegas[k].rows());
            digit[k][u] = rest % pk;
            rest /= pk;
        }
    }

    std::vector<Eigen::MatrixXd> grads(r);
    for (std::size_t j = 0; j < r; ++j) {
        std::vector<Eigen::MatrixXd> parts = params.omegas;
        parts[j] = Eigen::MatrixXd::Ones(parts[j].rows(), parts[j].cols());
        const Eigen::MatrixXd weight = kron_reversed(parts);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(params.omegas[j].rows(),
                                                  params.omegas[j].cols());
        for (std::size_t v = 0; v < p; ++v)
            for (std::size_t u = 0; u < p; ++u)
                g(static_cast<Eigen::Index>(digit[j][u]), static_cast<Eigen::Index>(digit[j][v])) +=
                    m_sum(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) *
                    weight(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
        grads[j] = g;
    }
    return grads;
}

GradientBundle finalize(const GmlmParams& params, double c, GradientAccum accum,
                        std::size_t n) {
    const double inv_n = 1.0 / static_cast<double>(n);
    GradientBundle out;
    out.eta_bar = accum.eta_bar * inv_n;
    out.betas = std::move(accum.betas);
    for (auto& g : out.betas) g *= inv_n;
    out.omegas = omega_contraction(params, accum.m_sum);
    for (auto& g : out.omegas) g *= c * inv_n;
    return out;
}

}  // namespace

double log_likelihood_serial(const GmlmParams& params, const Dataset& data,
                             const ExponentialFamily& family) {
    params.validate();
    data.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i)
        sum += observation_term(params, family, data.X[i], data.F[i]);
    return sum / static_cast<double>(data.n());
}

double log_likelihood(const GmlmParams& params, const Dataset& data,
                      const ExponentialFamily& family) {
    params.validate();
    data.validate();
    const std::size_t n = data.n();
    std::vector<double> partials;
#pragma omp parallel
    {
#pragma omp single
        partials.assign(static_cast<std::size_t>(omp_get_num_threads()), 0.0);
#pragma omp barrier
        double local = 0.0;
#pragma omp for schedule(static) nowait
        for (long i = 0; i < static_cast<long>(n); ++i)
            local += observation_term(params, family, data.X[static_cast<std::size_t>(i)],
                                      data.F[static_cast<std::size_t>(i)]);
        partials[static_cast<std::size_t>(omp_get_thread_num())] = local;
    }
    double sum = 0.0;
    for (double v : partials) sum += v;  // fixed thread-index order
    return sum / static_cast<double>(n);
}

GradientBundle gradients_serial(const GmlmParams& params, const Dataset& data,
                                const ExponentialFamily& family) {
    params.validate();
    data.validate();
    GradientAccum accum(params);
    for (std::size_t i = 0; i < data.n(); ++i)
        accum.add_observation(params, family, data.X[i], data.F[i]);
    return finalize(params, family.scale(), std::move(accum), data.n());
}

GradientBundle gradients_from_moments(const GmlmParams& params, const Dataset& data, double c,
                                      const std::vector<Tensor>& means,
                                      const std::vector<Eigen::MatrixXd>& second_moments) {
    params.validate();
    data.validate();
    if (means.size() != data.n() || second_moments.size() != data.n())
        throw std::invalid_argument("gradients_from_moments: moment count mismatch");
    GradientAccum accum(params);
    for (std::size_t i = 0; i < data.n(); ++i)
        accum.add_moments(params, data.X[i], data.F[i], means[i], second_moments[i]);
    return finalize(params, c, std::move(accum), data.n());
}

GradientBundle gradients(const GmlmParams& params, const Dataset& data,
                         const ExponentialFamily& family) {
    params.validate();
    data.validate();
    const std::size_t n = data.n();
    std::vector<GradientAccum> partials;
#pragma omp parallel
    {
#pragma omp single
        partials.assign(static_cast<std::size_t>(omp_get_num_threads()), GradientAccum(params));
#pragma omp barrier
        GradientAccum local(params);
#pragma omp for schedule(static) nowait
        for (long i = 0; i < static_cast<long>(n); ++i)
            local.add_observation(params, family, data.X[static_cast<std::size_t>(i)],
                                  data.F[static_cast<std::size_t>(i)]);
        partials[static_cast<std::size_t>(omp_get_thread_num())] = std::move(local);
    }
    GradientAccum accum(params);
    for (const GradientAccum& part : partials) accum.merge(part);
    return finalize(params, family.scale(), std::move(accum), n);
}

GmlmParams normalize(const GmlmParams& params) {
    params.validate();
    GmlmParams out = params;
    const std::size_t r = out.order();

    auto normalize_chain = [](std::vector<Eigen::MatrixXd>& factors) {
        for (std::size_t k = 1; k < factors.size(); ++k) {
            const double norm = factors[k].norm();
            if (norm == 0.0) throw std::invalid_argument("normalize: zero factor");
            factors[k] /= norm;
            factors[0] *= norm;

            Eigen::Index mi = 0, mj = 0;
            factors[k].cwiseAbs().maxCoeff(&mi, &mj);
            if (factors[k](mi, mj) < 0.0) {
                factors[k] = -factors[k];
                factors[0] = -factors[0];
            }
        }
        if (factors[0].norm() == 0.0) throw std::invalid_argument("normalize: zero factor");
    };

    if (r > 1) {
        normalize_chain(out.betas);
        normalize_chain(out.omegas);
    } else {
        if (out.betas[0].norm() == 0.0 || out.omegas[0].norm() == 0.0)
            throw std::invalid_argument("normalize: zero factor");
    }
    return out;
}

}  // namespace gmlm
