#include "gmlm/struct_mat.hpp"

#include <numeric>
#include <stdexcept>

namespace gmlm {

std::size_t vech_length(std::size_t p) { return p * (p + 1) / 2; }

std::size_t vech_index(std::size_t p, std::size_t row, std::size_t col) {
    if (row >= p || col >= p) throw std::out_of_range("vech_index: out of range");
    if (row < col) std::swap(row, col);
    // entries of column c occupy positions c(2p-c-1)/2 + c .. c(2p-c-1)/2 + p-1
    return col * (2 * p - col - 1) / 2 + row;
}

Eigen::VectorXd vech(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("vech: matrix not square");
    const std::size_t p = static_cast<std::size_t>(m.rows());
    Eigen::VectorXd v(static_cast<Eigen::Index>(vech_length(p)));
    std::size_t idx = 0;
    for (std::size_t c = 0; c < p; ++c)
        for (std::size_t r = c; r < p; ++r)
            v[static_cast<Eigen::Index>(idx++)] = m(static_cast<Eigen::Index>(r),
                                                    static_cast<Eigen::Index>(c));
    return v;
}

Eigen::VectorXd apply_permutation(const Permutation& perm, const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != perm.size())
        throw std::invalid_argument("apply_permutation: size mismatch");
    Eigen::VectorXd w(v.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        w[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(perm[i])];
    return w;
}

Eigen::MatrixXd permutation_matrix(const Permutation& perm) {
    const Eigen::Index n = static_cast<Eigen::Index>(perm.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        m(i, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])) = 1.0;
    return m;
}

Permutation commutation_perm(std::size_t p, std::size_t q) {
    // vec(A^T)[j + q i] = A(i, j) = vec(A)[i + p j]
    Permutation perm(p * q);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < q; ++j) perm[j + q * i] = i + p * j;
    return perm;
}

Eigen::MatrixXd commutation_matrix(std::size_t p, std::size_t q) {
    return permutation_matrix(commutation_perm(p, q));
}

Eigen::MatrixXd duplication_matrix(std::size_t p) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p * p),
                                              static_cast<Eigen::Index>(vech_length(p)));
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < p; ++i)
            d(static_cast<Eigen::Index>(i + p * j),
              static_cast<Eigen::Index>(vech_index(p, i, j))) = 1.0;
    return d;
}

Eigen::MatrixXd duplication_pinv(std::size_t p) {
    // D^+ = (D^T D)^{-1} D^T with D^T D diagonal: entry 1 for diagonal
    // positions of vech, 2 for off-diagonal ones.
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vech_length(p)),
                                              static_cast<Eigen::Index>(p * p));
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < p; ++i)
            d(static_cast<Eigen::Index>(vech_index(p, i, j)),
              static_cast<Eigen::Index>(i + p * j)) = (i == j) ? 1.0 : 0.5;
    return d;
}

Eigen::MatrixXd symmetrizer(std::size_t p) {
    return duplication_matrix(p) * duplication_pinv(p);
}

Eigen::VectorXd duplication_t_apply(std::size_t p, const Eigen::MatrixXd& m) {
    if (static_cast<std::size_t>(m.rows()) != p || static_cast<std::size_t>(m.cols()) != p)
        throw std::invalid_argument("duplication_t_apply: shape mismatch");
    Eigen::VectorXd v(static_cast<Eigen::Index>(vech_length(p)));
    std::size_t idx = 0;
    for (std::size_t c = 0; c < p; ++c)
        for (std::size_t r = c; r < p; ++r)
            v[static_cast<Eigen::Index>(idx++)] =
                (r == c) ? m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))
                         : m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +
                               m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
    return v;
}

namespace {

Permutation identity_perm(std::size_t n) {
    Permutation perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    return perm;
}

// (S1 S2) v = S1 (S2 v): perm[i] = perm2[perm1[i]]
Permutation compose_perm(const Permutation& perm1, const Permutation& perm2) {
    Permutation perm(perm1.size());
    for (std::size_t i = 0; i < perm1.size(); ++i) perm[i] = perm2[perm1[i]];
    return perm;
}

// A ⊗ B for permutations a (size n_a) and b (size n_b):
// w[iB + n_b iA] = v[b[iB] + n_b a[iA]]
Permutation kron_perm(const Permutation& a, const Permutation& b) {
    const std::size_t nb = b.size();
    Permutation perm(a.size() * nb);
    for (std::size_t ia = 0; ia < a.size(); ++ia)
        for (std::size_t ib = 0; ib < nb; ++ib)
            perm[ib + nb * ia] = b[ib] + nb * a[ia];
    return perm;
}

Permutation s_pq_base(std::size_t p1, std::size_t p2, std::size_t q1, std::size_t q2) {
    // I_{q2} ⊗ K_{q1,p2} ⊗ I_{p1}
    return kron_perm(identity_perm(q2), kron_perm(commutation_perm(q1, p2), identity_perm(p1)));
}

}  // namespace

Permutation s_pq_perm(const std::vector<std::size_t>& p, const std::vector<std::size_t>& q) {
    if (p.size() != q.size() || p.size() < 2)
        throw std::invalid_argument("s_pq_perm: need matching p, q of length >= 2");
    const std::size_t r = p.size();
    if (r == 2) return s_pq_base(p[0], p[1], q[0], q[1]);

    std::vector<std::size_t> p_head(p.begin(), p.end() - 1), q_head(q.begin(), q.end() - 1);
    const std::size_t p_prod =
        std::accumulate(p_head.begin(), p_head.end(), std::size_t{1}, std::multiplies<>());
    const std::size_t q_prod =
        std::accumulate(q_head.begin(), q_head.end(), std::size_t{1}, std::multiplies<>());

    // S_{p,q} = S_{(Πp_k, p_r),(Πq_k, q_r)} (I_{p_r q_r} ⊗ S_{head})
    Permutation outer = s_pq_base(p_prod, p[r - 1], q_prod, q[r - 1]);
    Permutation inner = kron_perm(identity_perm(p[r - 1] * q[r - 1]), s_pq_perm(p_head, q_head));
    return compose_perm(outer, inner);
}

Eigen::MatrixXd s_pq_matrix(const std::vector<std::size_t>& p, const std::vector<std::size_t>& q) {
    return permutation_matrix(s_pq_perm(p, q));
}

Eigen::MatrixXd tangent_span(const std::vector<Eigen::MatrixXd>& factors) {
    const std::size_t r = factors.size();
    if (r == 0) throw std::invalid_argument("tangent_span: no factors");

    std::vector<std::size_t> p(r), q(r), pq(r);
    std::size_t total = 1, d_sum = 0;
    for (std::size_t k = 0; k < r; ++k) {
        p[k] = static_cast<std::size_t>(factors[k].rows());
        q[k] = static_cast<std::size_t>(factors[k].cols());
        pq[k] = p[k] * q[k];
        total *= pq[k];
        d_sum += pq[k];
    }
    if (r == 1) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(total),
                                                 static_cast<Eigen::Index>(total));

    Eigen::MatrixXd span(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d_sum));
    Eigen::Index col0 = 0;
    for (std::size_t j = 0; j < r; ++j) {
        // Γ_j = ⊗_{k=r}^{1}(I_{p_k q_k} if k == j else vec A_k)
        std::vector<Eigen::MatrixXd> parts(r);
        for (std::size_t k = 0; k < r; ++k) {
            if (k == j)
                parts[k] = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(pq[k]),
                                                     static_cast<Eigen::Index>(pq[k]));
            else
                parts[k] = Eigen::Map<const Eigen::MatrixXd>(
                    factors[k].data(), static_cast<Eigen::Index>(pq[k]), 1);
        }
        span.middleCols(col0, static_cast<Eigen::Index>(pq[j])) = kron_reversed(parts);
        col0 += static_cast<Eigen::Index>(pq[j]);
    }

    const Permutation perm = s_pq_perm(p, q);
    Eigen::MatrixXd out(span.rows(), span.cols());
    for (std::size_t i = 0; i < perm.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = span.row(static_cast<Eigen::Index>(perm[i]));
    return out;
}

}  // namespace gmlm
