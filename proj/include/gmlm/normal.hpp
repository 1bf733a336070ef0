#pragma once

#include "gmlm/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace gmlm {

/// Multi-linear normal family: c = −1/2, conditional mean μ_y with covariance
/// Σ = ⊗_{k=r}^{1} Ω_k⁻¹, log-partition in closed form via the factor
/// structure (no p x p matrices are formed).
class NormalFamily final : public ExponentialFamily {
public:
    double scale() const override { return -0.5; }
    Tensor mean(const GmlmParams& params, const Tensor& f) const override;
    Eigen::MatrixXd second_moment(const GmlmParams& params, const Tensor& f) const override;
    double log_partition(const GmlmParams& params, const Tensor& f) const override;
};

struct NormalFitConfig {
    std::size_t max_iter = 100;
    double rel_tol = 1e-6;
    double cond_threshold = 1e-10;  // reciprocal condition number trigger
    double reg_coeff = 0.2;         // fixed ridge weight relative to λ₁
};

namespace normal {

/// μ_y = 𝔉_y ×ₖ Ω_k⁻¹β_k (η̄ assumed zero after demeaning).
Tensor conditional_mean(const GmlmParams& params, const Tensor& f);

/// μ_y + 𝔚 ×ₖ Σ_k^{1/2} with i.i.d. standard normal 𝔚 and Σ_k = Ω_k⁻¹
/// (symmetric square roots). η̄ enters through the family mean.
Tensor sample_conditional(const GmlmParams& params, const Tensor& f, std::mt19937_64& rng);

/// Mode-wise marginal-covariance initialization:
/// β_k⁽⁰⁾ = U_k √D_k V_kᵀ from the leading q_k eigenpairs of Σ̂_k(𝔛) and
/// Σ̂_k(𝔉); D_k diag entries √(λ_j(Σ̂_k(𝔛))·λ_j(Σ̂_k(𝔉))), non-positive
/// eigenvalues padded with 1e-8; Ω_k⁽⁰⁾ = I. Expects demeaned data.
GmlmParams initialize(const Dataset& data);

/// Closed-form stationary β_j given all other parameters.
Eigen::MatrixXd beta_update(std::size_t j, const GmlmParams& params, const Dataset& data);

/// Residual-moment Ω estimates: Σ̃_j from mode-j residual covariances, scaled
/// by s̃ so the mean squared error matches Π tr(Ω̂_k⁻¹); regularized inverse
/// (s̃Σ̃_j + reg·λ₁ I)⁻¹ when ill-conditioned.
std::vector<Eigen::MatrixXd> omega_update(const GmlmParams& params, const Dataset& data,
                                          const NormalFitConfig& config);

/// Flip-flop estimation: demean X, center F, initialize, alternate β sweeps
/// and simultaneous Ω updates until the relative objective change drops
/// below rel_tol. Returns normalized parameters with the objective trace.
FitResult fit(const Dataset& data, const NormalFitConfig& config = {});

}  // namespace normal

}  // namespace gmlm
