#pragma once

#include "gmlm/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace gmlm {

/// Natural parameters γ of a p-dimensional Ising model, indexed by the half
/// vectorization of x xᵀ: P_γ(x) = p₀(γ) exp(vech(x xᵀ)ᵀ γ).
struct IsingNaturalParams {
    std::size_t p = 0;
    Eigen::VectorXd gamma;  // length p(p+1)/2

    double& at(std::size_t j, std::size_t l);
    double at(std::size_t j, std::size_t l) const;
};

struct IsingFitConfig {
    std::size_t max_iter = 1000;
    double learning_rate = 1e-3;   // λ, fixed
    double decay = 0.9;            // ν, fixed
    double epsilon = 1.49e-8;      // ε, fixed
    std::size_t mc_threshold_p = 20;
    std::size_t mc_samples = 10000;  // Gibbs draws per observation per gradient step
    std::size_t burn_in = 100;
    double grad_tol = 1e-4;
    std::uint64_t seed = 0;
};

namespace ising {

/// γ_y = D_pᵀ vec(⊗_{k=r}^{1} Ω_k + diag(B vec 𝔉_y)); requires η̄ = 0.
IsingNaturalParams gamma_from_gmlm(const GmlmParams& params, const Tensor& f);

struct Moments {
    double p0 = 0.0;         // probability of the all-zero state
    double log_z = 0.0;      // log partition function (= −log p0)
    Eigen::MatrixXd m2;      // E[x xᵀ], p x p; first moment on the diagonal
    bool p0_reliable = true; // false for the Monte-Carlo estimate
};

/// Exact enumeration over all 2^p states (p capped for feasibility).
Moments exact_moments(const IsingNaturalParams& gamma);

/// Conditional single and pairwise probabilities
/// π_j = P(x_j = 1 | x_{−j} = 0), π_{jl} = P(x_j = x_l = 1 | x_{−j,−l} = 0).
struct ConditionalProbs {
    Eigen::VectorXd pi;      // length p
    Eigen::MatrixXd pi_pair; // p x p, off-diagonal entries meaningful
};
ConditionalProbs probs_from_gamma(const IsingNaturalParams& gamma);
IsingNaturalParams gamma_from_probs(const ConditionalProbs& probs);

/// Single-site-sweep Gibbs sampler; one sample per sweep after burn_in,
/// thinning 1. Columns of the result are the binary samples. `state` may seed
/// the chain and receives the final state (persistent-chain support).
Eigen::MatrixXd gibbs_sample(const IsingNaturalParams& gamma, std::size_t n_samples,
                             std::size_t burn_in, std::mt19937_64& rng,
                             Eigen::VectorXd* state = nullptr);

/// Monte-Carlo moments from Gibbs draws; p0 (zero-state frequency) is rough.
Moments mc_moments(const IsingNaturalParams& gamma, std::size_t n_samples,
                   std::size_t burn_in, std::mt19937_64& rng);

/// Mode-moment initialization of the Ω_k: M̂₂₍ₖ₎ = (p_k/np) Σᵢ (𝔛ᵢ)₍ₖ₎(𝔛ᵢ)₍ₖ₎ᵀ
/// with degenerate entries clamped to p_k/(np) and 1 − p_k/(np); Ω_k diagonal
/// zero, off-diagonals via the two-way log-odds formula.
std::vector<Eigen::MatrixXd> initialize_omegas(const Dataset& data);

/// RMSprop maximum-likelihood fit with exact moments for p ≤ mc_threshold_p
/// and persistent-chain Monte-Carlo moments otherwise; η̄ fixed to 0.
FitResult fit(const Dataset& data, const IsingFitConfig& config = {});

/// Draw X | Y = y: exact inverse-CDF over enumerated states for small p,
/// Gibbs otherwise.
Tensor sample_conditional(const GmlmParams& params, const Tensor& f, std::mt19937_64& rng);

}  // namespace ising

/// ExponentialFamily view of the Ising model with exact moments (small p).
class IsingFamily final : public ExponentialFamily {
public:
    double scale() const override { return 1.0; }
    Tensor mean(const GmlmParams& params, const Tensor& f) const override;
    Eigen::MatrixXd second_moment(const GmlmParams& params, const Tensor& f) const override;
    double log_partition(const GmlmParams& params, const Tensor& f) const override;
};

}  // namespace gmlm
