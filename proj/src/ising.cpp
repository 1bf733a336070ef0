#include "gmlm/ising.hpp"

#include "gmlm/normal.hpp"
#include "gmlm/rng.hpp"
#include "gmlm/struct_mat.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmlm {

double& IsingNaturalParams::at(std::size_t j, std::size_t l) {
    return gamma[static_cast<Eigen::Index>(vech_index(p, j, l))];
}

double IsingNaturalParams::at(std::size_t j, std::size_t l) const {
    return gamma[static_cast<Eigen::Index>(vech_index(p, j, l))];
}

namespace ising {

namespace {

constexpr std::size_t kEnumerationLimit = 25;  // 2^25 states is the hard cap

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double state_energy(const IsingNaturalParams& gamma, std::uint64_t s) {
    double e = 0.0;
    for (std::size_t j = 0; j < gamma.p; ++j) {
        if (!((s >> j) & 1u)) continue;
        e += gamma.at(j, j);
        for (std::size_t l = 0; l < j; ++l)
            if ((s >> l) & 1u) e += gamma.at(j, l);
    }
    return e;
}

void check_binary(const Dataset& data) {
    for (const Tensor& x : data.X)
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] != 0.0 && x[i] != 1.0)
                throw std::invalid_argument("ising: predictors must be binary 0/1");
}

}  // namespace

IsingNaturalParams gamma_from_gmlm(const GmlmParams& params, const Tensor& f) {
    params.validate();
    if (params.eta_bar.vec_map().norm() != 0.0)
        throw std::invalid_argument("gamma_from_gmlm: eta_bar must be zero for the Ising model");

    const Eigen::MatrixXd omega = params.big_omega();
    const Eigen::VectorXd bf = multi_linear_product(f, params.betas).vec_map();
    const std::size_t p = static_cast<std::size_t>(omega.rows());

    // γ = D_pᵀ vec(Ω + diag(B vec f)): diagonal entries pass through, the
    // symmetric off-diagonal pairs of Ω are summed.
    IsingNaturalParams out;
    out.p = p;
    out.gamma.resize(static_cast<Eigen::Index>(vech_length(p)));
    for (std::size_t j = 0; j < p; ++j) {
        out.at(j, j) = omega(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) +
                       bf[static_cast<Eigen::Index>(j)];
        for (std::size_t l = 0; l < j; ++l)
            out.at(j, l) = 2.0 * omega(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
    }
    return out;
}

Moments exact_moments(const IsingNaturalParams& gamma) {
    const std::size_t p = gamma.p;
    if (p == 0 || p > kEnumerationLimit)
        throw std::invalid_argument("exact_moments: dimension out of enumeration range");
    const std::uint64_t n_states = std::uint64_t{1} << p;

    std::vector<double> energy(n_states);
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < static_cast<long long>(n_states); ++s)
        energy[static_cast<std::size_t>(s)] =
            state_energy(gamma, static_cast<std::uint64_t>(s));

    double e_max = energy[0];
    for (double e : energy) e_max = std::max(e_max, e);

    const Eigen::Index pi = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd m_sum = Eigen::MatrixXd::Zero(pi, pi);
    double z = 0.0;
    std::vector<double> z_part;
    std::vector<Eigen::MatrixXd> m_part;
#pragma omp parallel
    {
#pragma omp single
        {
            const std::size_t t = static_cast<std::size_t>(omp_get_num_threads());
            z_part.assign(t, 0.0);
            m_part.assign(t, Eigen::MatrixXd::Zero(pi, pi));
        }
#pragma omp barrier
        const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
#pragma omp for schedule(static) nowait
        for (long long s = 0; s < static_cast<long long>(n_states); ++s) {
            const double w = std::exp(energy[static_cast<std::size_t>(s)] - e_max);
            z_part[tid] += w;
            for (std::size_t j = 0; j < p; ++j) {
                if (!((static_cast<std::uint64_t>(s) >> j) & 1u)) continue;
                const Eigen::Index ji = static_cast<Eigen::Index>(j);
                m_part[tid](ji, ji) += w;
                for (std::size_t l = 0; l < j; ++l)
                    if ((static_cast<std::uint64_t>(s) >> l) & 1u)
                        m_part[tid](ji, static_cast<Eigen::Index>(l)) += w;
            }
        }
    }
    for (std::size_t t = 0; t < z_part.size(); ++t) {  // fixed thread-index order
        z += z_part[t];
        m_sum += m_part[t];
    }

    Moments out;
    out.m2 = (m_sum + m_sum.transpose()).eval();
    out.m2.diagonal() = m_sum.diagonal();
    out.m2 /= z;
    const double log_z = std::log(z) + e_max;
    out.p0 = std::exp(-log_z);
    out.log_z = log_z;
    out.p0_reliable = true;
    return out;
}

ConditionalProbs probs_from_gamma(const IsingNaturalParams& gamma) {
    const std::size_t p = gamma.p;
    ConditionalProbs out;
    out.pi.resize(static_cast<Eigen::Index>(p));
    out.pi_pair = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                        static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j)
        out.pi[static_cast<Eigen::Index>(j)] = sigmoid(gamma.at(j, j));
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t l = 0; l < j; ++l) {
            const double a = out.pi[static_cast<Eigen::Index>(j)] *
                             out.pi[static_cast<Eigen::Index>(l)];
            const double v = sigmoid(gamma.at(j, l) + std::log(a / (1.0 - a)));
            out.pi_pair(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = v;
            out.pi_pair(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = v;
        }
    return out;
}

IsingNaturalParams gamma_from_probs(const ConditionalProbs& probs) {
    const std::size_t p = static_cast<std::size_t>(probs.pi.size());
    IsingNaturalParams out;
    out.p = p;
    out.gamma.resize(static_cast<Eigen::Index>(vech_length(p)));
    for (std::size_t j = 0; j < p; ++j) {
        const double pj = probs.pi[static_cast<Eigen::Index>(j)];
        if (pj <= 0.0 || pj >= 1.0)
            throw std::invalid_argument("gamma_from_probs: degenerate probability");
        out.at(j, j) = std::log(pj / (1.0 - pj));
        for (std::size_t l = 0; l < j; ++l) {
            const double a = pj * probs.pi[static_cast<Eigen::Index>(l)];
            const double pjl =
                probs.pi_pair(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
            if (pjl <= 0.0 || pjl >= 1.0)
                throw std::invalid_argument("gamma_from_probs: degenerate pair probability");
            out.at(j, l) = std::log((1.0 - a) / a) + std::log(pjl / (1.0 - pjl));
        }
    }
    return out;
}

Eigen::MatrixXd gibbs_sample(const IsingNaturalParams& gamma, std::size_t n_samples,
                             std::size_t burn_in, std::mt19937_64& rng,
                             Eigen::VectorXd* state) {
    const std::size_t p = gamma.p;
    const Eigen::Index pi = static_cast<Eigen::Index>(p);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::VectorXd x(pi);
    if (state != nullptr && state->size() == pi) {
        x = *state;
    } else {
        for (Eigen::Index j = 0; j < pi; ++j) x[j] = unif(rng) < 0.5 ? 1.0 : 0.0;
    }

    auto sweep = [&]() {
        for (std::size_t j = 0; j < p; ++j) {
            double theta = gamma.at(j, j);
            for (std::size_t l = 0; l < p; ++l)
                if (l != j && x[static_cast<Eigen::Index>(l)] != 0.0) theta += gamma.at(j, l);
            x[static_cast<Eigen::Index>(j)] = unif(rng) < sigmoid(theta) ? 1.0 : 0.0;
        }
    };

    for (std::size_t s = 0; s < burn_in; ++s) sweep();
    Eigen::MatrixXd samples(pi, static_cast<Eigen::Index>(n_samples));
    for (std::size_t s = 0; s < n_samples; ++s) {
        sweep();
        samples.col(static_cast<Eigen::Index>(s)) = x;
    }
    if (state != nullptr) *state = x;
    return samples;
}

Moments mc_moments(const IsingNaturalParams& gamma, std::size_t n_samples,
                   std::size_t burn_in, std::mt19937_64& rng) {
    const Eigen::MatrixXd samples = gibbs_sample(gamma, n_samples, burn_in, rng);
    Moments out;
    out.m2 = samples * samples.transpose() / static_cast<double>(n_samples);
    std::size_t zeros = 0;
    for (Eigen::Index s = 0; s < samples.cols(); ++s)
        if (samples.col(s).sum() == 0.0) ++zeros;
    out.p0 = static_cast<double>(zeros) / static_cast<double>(n_samples);
    out.log_z = out.p0 > 0.0 ? -std::log(out.p0) : std::numeric_limits<double>::infinity();
    out.p0_reliable = false;
    return out;
}

std::vector<Eigen::MatrixXd> initialize_omegas(const Dataset& data) {
    data.validate();
    check_binary(data);
    const std::size_t r = data.X.front().order();
    const double n = static_cast<double>(data.n());
    double p_total = 1.0;
    for (std::size_t k = 0; k < r; ++k) p_total *= static_cast<double>(data.X.front().dim(k));

    std::vector<Eigen::MatrixXd> omegas(r);
    for (std::size_t k = 0; k < r; ++k) {
        const double pk = static_cast<double>(data.X.front().dim(k));
        const Eigen::Index pki = static_cast<Eigen::Index>(data.X.front().dim(k));
        Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(pki, pki);
        for (const Tensor& x : data.X) {
            const Eigen::MatrixXd xk = unfold(x, k);
            m2.noalias() += xk * xk.transpose();
        }
        m2 *= pk / (n * p_total);

        // clamp degenerate (0 or 1) entries to the one-occurrence bounds
        const double lo = pk / (n * p_total), hi = 1.0 - pk / (n * p_total);
        for (Eigen::Index a = 0; a < pki; ++a)
            for (Eigen::Index b = 0; b < pki; ++b)
                m2(a, b) = std::min(std::max(m2(a, b), lo), hi);

        Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(pki, pki);
        for (Eigen::Index j = 0; j < pki; ++j)
            for (Eigen::Index l = 0; l < j; ++l) {
                const double a = m2(j, j) * m2(l, l);
                const double v =
                    std::log((1.0 - a) / a) + std::log(m2(j, l) / (1.0 - m2(j, l)));
                omega(j, l) = v;
                omega(l, j) = v;
            }
        omegas[k] = omega;
    }
    return omegas;
}

namespace {

// Degeneracy guard bookkeeping: entry-wise magnitude bounds on ⊗Ω_k for
// Kronecker entries touching a constant (all-0 or all-1) mode component.
struct DegeneracyGuard {
    bool active = false;
    Eigen::MatrixXd bounds;  // +inf where unconstrained
    std::vector<std::vector<std::size_t>> digit;

    DegeneracyGuard(const Dataset& data, const std::vector<std::size_t>& p_dims) {
        const std::size_t r = p_dims.size();
        std::size_t p = 1;
        for (std::size_t pk : p_dims) p *= pk;
        const double np = static_cast<double>(data.n()) * static_cast<double>(p);

        digit.assign(r, std::vector<std::size_t>(p));
        for (std::size_t u = 0; u < p; ++u) {
            std::size_t rest = u;
            for (std::size_t k = 0; k < r; ++k) {
                digit[k][u] = rest % p_dims[k];
                rest /= p_dims[k];
            }
        }

        bounds = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p),
                                           static_cast<Eigen::Index>(p),
                                           std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < r; ++k) {
            const double pk = static_cast<double>(p_dims[k]);
            const double bound = std::log((np - pk) / pk);
            for (std::size_t j = 0; j < p_dims[k]; ++j) {
                // mode-k component j is degenerate if constant across the
                // artificial mode-k observations
                double sum = 0.0, count = 0.0;
                for (const Tensor& x : data.X) {
                    const Eigen::MatrixXd xk = unfold(x, k);
                    sum += xk.row(static_cast<Eigen::Index>(j)).sum();
                    count += static_cast<double>(xk.cols());
                }
                if (sum != 0.0 && sum != count) continue;
                active = true;
                for (std::size_t u = 0; u < p; ++u)
                    for (std::size_t v = 0; v < p; ++v)
                        if (digit[k][u] == j || digit[k][v] == j) {
                            auto& b = bounds(static_cast<Eigen::Index>(u),
                                             static_cast<Eigen::Index>(v));
                            b = std::min(b, bound);
                        }
            }
        }
    }

    // Rescale the largest-magnitude contributing factor entry of every
    // out-of-bound Kronecker entry (and its symmetric partner).
    void enforce(std::vector<Eigen::MatrixXd>& omegas) const {
        if (!active) return;
        const Eigen::MatrixXd big = kron_reversed(omegas);
        for (Eigen::Index u = 0; u < big.rows(); ++u)
            for (Eigen::Index v = 0; v < big.cols(); ++v) {
                const double bound = bounds(u, v);
                const double value = std::abs(big(u, v));
                if (!(value > bound)) continue;
                std::size_t k_best = 0;
                double best = -1.0;
                for (std::size_t k = 0; k < omegas.size(); ++k) {
                    const double entry = std::abs(
                        omegas[k](static_cast<Eigen::Index>(digit[k][static_cast<std::size_t>(u)]),
                                  static_cast<Eigen::Index>(digit[k][static_cast<std::size_t>(v)])));
                    if (entry > best) {
                        best = entry;
                        k_best = k;
                    }
                }
                const double scale = bound / value;
                const Eigen::Index a =
                    static_cast<Eigen::Index>(digit[k_best][static_cast<std::size_t>(u)]);
                const Eigen::Index b =
                    static_cast<Eigen::Index>(digit[k_best][static_cast<std::size_t>(v)]);
                omegas[k_best](a, b) *= scale;
                if (a != b) omegas[k_best](b, a) = omegas[k_best](a, b);
            }
    }
};

GmlmParams initial_params(const Dataset& data) {
    GmlmParams params;
    try {
        NormalFitConfig cfg;
        cfg.max_iter = 50;
        params = normal::fit(data, cfg).params;
    } catch (const std::exception&) {
        // fall back to the moment heuristic on centered data
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
        params = normal::initialize(centered);
    }
    params.eta_bar = Tensor(data.X.front().dims());  // η̄ = 0
    params.omegas = initialize_omegas(data);
    return params;
}

}  // namespace

FitResult fit(const Dataset& data, const IsingFitConfig& config) {
    data.validate();
    check_binary(data);
    const std::size_t n = data.n();
    std::size_t p = 1;
    for (std::size_t d : data.X.front().dims()) p *= d;
    const bool exact = p <= config.mc_threshold_p;

    GmlmParams params = initial_params(data);
    const std::size_t r = params.order();
    DegeneracyGuard guard(data, params.p_dims());
    guard.enforce(params.omegas);

    // RMSprop squared-gradient accumulators
    std::vector<Eigen::MatrixXd> g2_beta(r), g2_omega(r);
    for (std::size_t k = 0; k < r; ++k) {
        g2_beta[k] = Eigen::MatrixXd::Zero(params.betas[k].rows(), params.betas[k].cols());
        g2_omega[k] = Eigen::MatrixXd::Zero(params.omegas[k].rows(), params.omegas[k].cols());
    }

    // persistent Gibbs chains for the Monte-Carlo path
    std::vector<Eigen::VectorXd> chain_state(exact ? 0 : n);
    std::vector<std::mt19937_64> chain_rng;
    if (!exact) {
        chain_rng.reserve(n);
        for (std::size_t i = 0; i < n; ++i) chain_rng.push_back(make_engine(config.seed, i));
    }

    FitResult result;
    bool first_step = true;
    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        std::vector<Tensor> means(n);
        std::vector<Eigen::MatrixXd> second_moments(n);
        if (exact) {
#pragma omp parallel for schedule(static)
            for (long long i = 0; i < static_cast<long long>(n); ++i) {
                const std::size_t idx = static_cast<std::size_t>(i);
                const Moments mo =
                    exact_moments(gamma_from_gmlm(params, data.F[idx]));
                Tensor g1(data.X[idx].dims());
                g1.vec_map() = mo.m2.diagonal();
                means[idx] = std::move(g1);
                second_moments[idx] = mo.m2;
            }
        } else {
            const std::size_t burn = first_step ? config.burn_in : 0;
#pragma omp parallel for schedule(static)
            for (long long i = 0; i < static_cast<long long>(n); ++i) {
                const std::size_t idx = static_cast<std::size_t>(i);
                const IsingNaturalParams gamma = gamma_from_gmlm(params, data.F[idx]);
                const Eigen::MatrixXd samples = gibbs_sample(
                    gamma, config.mc_samples, burn, chain_rng[idx], &chain_state[idx]);
                Eigen::MatrixXd m2 =
                    samples * samples.transpose() / static_cast<double>(config.mc_samples);
                Tensor g1(data.X[idx].dims());
                g1.vec_map() = m2.diagonal();
                means[idx] = std::move(g1);
                second_moments[idx] = std::move(m2);
            }
        }
        first_step = false;

        GradientBundle grad = gradients_from_moments(params, data, 1.0, means, second_moments);

        double norm_sq = 0.0;
        for (std::size_t k = 0; k < r; ++k) {
            grad.omegas[k] = 0.5 * (grad.omegas[k] + grad.omegas[k].transpose());
            norm_sq += grad.betas[k].squaredNorm() + grad.omegas[k].squaredNorm();
        }
        const double grad_norm = std::sqrt(norm_sq);
        if (!std::isfinite(grad_norm))
            throw std::runtime_error("ising fit: non-finite gradient at iteration " +
                                     std::to_string(iter));
        result.grad_norm_trace.push_back(grad_norm);
        result.iterations = iter + 1;

        // stopping: raw norm for exact moments, window-10 moving average for MC
        if (exact) {
            if (grad_norm < config.grad_tol) {
                result.converged = true;
                break;
            }
        } else if (result.grad_norm_trace.size() >= 10) {
            double avg = 0.0;
            for (std::size_t w = result.grad_norm_trace.size() - 10;
                 w < result.grad_norm_trace.size(); ++w)
                avg += result.grad_norm_trace[w];
            if (avg / 10.0 < config.grad_tol) {
                result.converged = true;
                break;
            }
        }

        auto rmsprop = [&](Eigen::MatrixXd& theta, Eigen::MatrixXd& g2,
                           const Eigen::MatrixXd& g) {
            g2 = config.decay * g2 + (1.0 - config.decay) * g.cwiseProduct(g);
            theta.array() += config.learning_rate * g.array() /
                             (g2.array().sqrt() + config.epsilon);
        };
        for (std::size_t k = 0; k < r; ++k) {
            rmsprop(params.betas[k], g2_beta[k], grad.betas[k]);
            rmsprop(params.omegas[k], g2_omega[k], grad.omegas[k]);
            params.omegas[k] = 0.5 * (params.omegas[k] + params.omegas[k].transpose());
        }
        guard.enforce(params.omegas);
    }

    result.mean_x = Tensor(data.X.front().dims());
    result.params = normalize(params);
    return result;
}

Tensor sample_conditional(const GmlmParams& params, const Tensor& f, std::mt19937_64& rng) {
    const IsingNaturalParams gamma = gamma_from_gmlm(params, f);
    const std::size_t p = gamma.p;
    Tensor x(params.eta_bar.dims());

    if (p <= 20) {
        // exact inverse-CDF over the enumerated states
        const std::uint64_t n_states = std::uint64_t{1} << p;
        std::vector<double> weight(n_states);
        double e_max = -std::numeric_limits<double>::infinity();
        for (std::uint64_t s = 0; s < n_states; ++s) {
            weight[s] = state_energy(gamma, s);
            e_max = std::max(e_max, weight[s]);
        }
        double total = 0.0;
        for (std::uint64_t s = 0; s < n_states; ++s) {
            weight[s] = std::exp(weight[s] - e_max);
            total += weight[s];
        }
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double target = unif(rng) * total;
        std::uint64_t chosen = n_states - 1;
        for (std::uint64_t s = 0; s < n_states; ++s) {
            target -= weight[s];
            if (target <= 0.0) {
                chosen = s;
                break;
            }
        }
        for (std::size_t j = 0; j < p; ++j) x[j] = static_cast<double>((chosen >> j) & 1u);
    } else {
        const Eigen::MatrixXd sample = gibbs_sample(gamma, 1, 100, rng);
        x.vec_map() = sample.col(0);
    }
    return x;
}

}  // namespace ising

Tensor IsingFamily::mean(const GmlmParams& params, const Tensor& f) const {
    const ising::Moments mo = ising::exact_moments(ising::gamma_from_gmlm(params, f));
    Tensor g1(params.eta_bar.dims());
    g1.vec_map() = mo.m2.diagonal();
    return g1;
}

Eigen::MatrixXd IsingFamily::second_moment(const GmlmParams& params, const Tensor& f) const {
    return ising::exact_moments(ising::gamma_from_gmlm(params, f)).m2;
}

double IsingFamily::log_partition(const GmlmParams& params, const Tensor& f) const {
    return ising::exact_moments(ising::gamma_from_gmlm(params, f)).log_z;
}

}  // namespace gmlm
