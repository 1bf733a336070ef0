#pragma once

#include "gmlm/tensor.hpp"

#include <cstddef>
#include <vector>

namespace gmlm {

/// Index of entry (row, col), row >= col not required, in the column-stacked
/// lower-triangle half vectorization of a p x p matrix.
std::size_t vech_index(std::size_t p, std::size_t row, std::size_t col);

std::size_t vech_length(std::size_t p);

/// vech of a square matrix (on-and-below-diagonal entries, column by column).
Eigen::VectorXd vech(const Eigen::MatrixXd& m);

/// Permutation stored as an index map: applying it to a vector v yields w
/// with w[i] = v[perm[i]].
using Permutation = std::vector<std::size_t>;

Eigen::VectorXd apply_permutation(const Permutation& perm, const Eigen::VectorXd& v);
Eigen::MatrixXd permutation_matrix(const Permutation& perm);

/// Commutation matrix K_{p,q} as an index map: K vec(A) = vec(A^T) for p x q A.
Permutation commutation_perm(std::size_t p, std::size_t q);
Eigen::MatrixXd commutation_matrix(std::size_t p, std::size_t q);

/// Duplication matrix D_p (p^2 x p(p+1)/2): D_p vech(A) = vec(A) for symmetric A.
Eigen::MatrixXd duplication_matrix(std::size_t p);

/// Moore-Penrose pseudo-inverse of D_p from the closed form (D^T D)^{-1} D^T
/// with D^T D diagonal.
Eigen::MatrixXd duplication_pinv(std::size_t p);

/// Symmetrizer N_p = D_p D_p^+ : N_p vec(A) = vec((A + A^T)/2).
Eigen::MatrixXd symmetrizer(std::size_t p);

/// Action of D_p^T on vec(M) without materializing D_p: sums symmetric pairs.
Eigen::VectorXd duplication_t_apply(std::size_t p, const Eigen::MatrixXd& m);

/// Permutation S_{p,q} with vec(⊗_{k=r}^{1} A_k) = S_{p,q} vec(∘_{k=1}^{r} A_k)
/// for A_k of dimension p_k x q_k, built by the recursion with base case
/// I_{q2} ⊗ K_{q1,p2} ⊗ I_{p1}. Requires r >= 2.
Permutation s_pq_perm(const std::vector<std::size_t>& p, const std::vector<std::size_t>& q);
Eigen::MatrixXd s_pq_matrix(const std::vector<std::size_t>& p, const std::vector<std::size_t>& q);

/// Span of the tangent space of the Kronecker-product set {⊗_{k=r}^{1} A_k} at
/// the given factors, with full Euclidean factor manifolds:
/// P = S_{p,q} [Γ_1, ..., Γ_r], Γ_j = ⊗_{k=r}^{1}(I if k==j else vec A_k).
Eigen::MatrixXd tangent_span(const std::vector<Eigen::MatrixXd>& factors);

}  // namespace gmlm
