#pragma once

#include "gmlm/tensor.hpp"

#include <vector>

namespace gmlm {

/// Parameters of the generalized multi-linear model: η̄ plus per-mode factors
/// β_k (p_k x q_k) and symmetric Ω_k (p_k x p_k). The Kronecker-level
/// parameters are B = ⊗_{k=r}^{1} β_k and Ω = ⊗_{k=r}^{1} Ω_k.
struct GmlmParams {
    Tensor eta_bar;
    std::vector<Eigen::MatrixXd> betas;
    std::vector<Eigen::MatrixXd> omegas;

    std::size_t order() const { return betas.size(); }
    std::vector<std::size_t> p_dims() const;
    std::vector<std::size_t> q_dims() const;

    Eigen::MatrixXd big_beta() const;   // ⊗_{k=r}^{1} β_k
    Eigen::MatrixXd big_omega() const;  // ⊗_{k=r}^{1} Ω_k

    void validate() const;  // throws on inconsistent shapes / asymmetric Ω_k
};

/// Observations (X_i, F_{y_i}); y kept only for record-keeping.
struct Dataset {
    std::vector<Tensor> X;
    std::vector<Tensor> F;
    std::vector<double> y;

    std::size_t n() const { return X.size(); }
    void validate() const;
};

/// Quadratic exponential family contract: scaling constant c, inverse links
/// g1 (conditional mean tensor) and g2 (conditional second moment of vec X,
/// p x p), and the log-partition b(η_y) where available. T₂ is fixed to the
/// identity, so G₂ = g₂ throughout.
class ExponentialFamily {
public:
    virtual ~ExponentialFamily() = default;

    virtual double scale() const = 0;
    virtual Tensor mean(const GmlmParams& params, const Tensor& f) const = 0;
    virtual Eigen::MatrixXd second_moment(const GmlmParams& params, const Tensor& f) const = 0;
    virtual bool has_log_partition() const { return true; }
    virtual double log_partition(const GmlmParams& params, const Tensor& f) const = 0;
};

struct GradientBundle {
    Tensor eta_bar;
    std::vector<Eigen::MatrixXd> betas;
    std::vector<Eigen::MatrixXd> omegas;
};

struct FitResult {
    GmlmParams params;
    std::size_t iterations = 0;
    std::vector<double> objective_trace;   // per-sweep log-likelihood (normal fitter)
    std::vector<double> grad_norm_trace;   // per-step gradient norm (Ising fitter)
    Tensor mean_x;                         // sample mean removed before fitting
    bool converged = false;
};

/// η̄ + 𝔉_y ×ₖ β_k; vectorizes to vec(η̄) + B vec(f).
Tensor natural_param_eta1(const GmlmParams& params, const Tensor& f);

/// ℛ(x) = (x − E x) ×ₖ β_kᵀ, so vec ℛ = Bᵀ vec(x − mean_x).
Tensor sufficient_reduction(const GmlmParams& params, const Tensor& x, const Tensor& mean_x);

/// Empirical log-likelihood
/// (1/n) Σᵢ [⟨η̄ + 𝔉_{yᵢ} ×ₖ β_k, Xᵢ⟩ + c⟨Xᵢ ×ₖ Ω_k, Xᵢ⟩ − b(η_{yᵢ})],
/// additive constants dropped. OpenMP over observations with a fixed
/// reduction order; the _serial variant is the reference implementation.
double log_likelihood(const GmlmParams& params, const Dataset& data,
                      const ExponentialFamily& family);
double log_likelihood_serial(const GmlmParams& params, const Dataset& data,
                             const ExponentialFamily& family);

/// Partial gradients of the log-likelihood with respect to η̄, β_j, Ω_j.
GradientBundle gradients(const GmlmParams& params, const Dataset& data,
                         const ExponentialFamily& family);
GradientBundle gradients_serial(const GmlmParams& params, const Dataset& data,
                                const ExponentialFamily& family);

/// Assemble the partial gradients from precomputed per-observation
/// inverse-link values (g1 tensors, g2 matrices); used by fitters that obtain
/// moments outside the ExponentialFamily interface (e.g. Monte-Carlo).
GradientBundle gradients_from_moments(const GmlmParams& params, const Dataset& data, double c,
                                      const std::vector<Tensor>& means,
                                      const std::vector<Eigen::MatrixXd>& second_moments);

/// Identifiability normalization: unit Frobenius norm for factors k = 2..r
/// with the scale absorbed into factor 1, and sign fixed so the
/// largest-magnitude entry of each normalized factor is positive. Leaves the
/// Kronecker products unchanged.
GmlmParams normalize(const GmlmParams& params);

}  // namespace gmlm
