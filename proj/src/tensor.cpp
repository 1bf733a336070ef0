#include "gmlm/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gmlm {

namespace {

std::size_t checked_size(const std::vector<std::size_t>& dims) {
    if (dims.empty()) throw std::invalid_argument("Tensor: order must be >= 1");
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims)), data_(checked_size(dims_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    if (checked_size(dims_) != data_.size())
        throw std::invalid_argument("Tensor: data length does not match dims");
}

Tensor Tensor::from_matrix(const Eigen::MatrixXd& m) {
    Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    Eigen::Map<Eigen::MatrixXd>(t.data_.data(), m.rows(), m.cols()) = m;
    return t;
}

Tensor Tensor::from_vector(const Eigen::VectorXd& v) {
    Tensor t({static_cast<std::size_t>(v.size())});
    t.vec_map() = v;
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t({1});
    t[0] = v;
    return t;
}

std::size_t Tensor::flat_index(std::span<const std::size_t> idx) const {
    if (idx.size() != dims_.size()) throw std::invalid_argument("Tensor: index arity mismatch");
    std::size_t flat = 0, stride = 1;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (idx[k] >= dims_[k]) throw std::out_of_range("Tensor: index out of range");
        flat += idx[k] * stride;
        stride *= dims_[k];
    }
    return flat;
}

Eigen::MatrixXd Tensor::as_matrix() const {
    if (order() == 1)
        return Eigen::Map<const Eigen::MatrixXd>(data_.data(), dims_[0], 1);
    if (order() == 2)
        return Eigen::Map<const Eigen::MatrixXd>(data_.data(), dims_[0], dims_[1]);
    throw std::logic_error("Tensor::as_matrix: order must be 1 or 2");
}

Tensor& Tensor::operator+=(const Tensor& o) {
    if (!same_dims(o)) throw std::invalid_argument("Tensor: dims mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
    if (!same_dims(o)) throw std::invalid_argument("Tensor: dims mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Tensor Tensor::operator+(const Tensor& o) const { Tensor t = *this; t += o; return t; }
Tensor Tensor::operator-(const Tensor& o) const { Tensor t = *this; t -= o; return t; }
Tensor Tensor::operator*(double s) const { Tensor t = *this; t *= s; return t; }

Eigen::MatrixXd unfold(const Tensor& t, std::size_t mode) {
    const std::size_t r = t.order();
    if (mode >= r) throw std::invalid_argument("unfold: mode out of range");
    const std::size_t pk = t.dim(mode);
    const std::size_t cols = t.size() / pk;
    Eigen::MatrixXd m(pk, cols);

    // stride of the mode in flat storage, and strides below/above it
    std::size_t inner = 1;
    for (std::size_t k = 0; k < mode; ++k) inner *= t.dim(k);
    const std::size_t outer = t.size() / (inner * pk);

    // flat = lo + inner*ik + inner*pk*hi ; column j = lo + inner*hi
    for (std::size_t hi = 0; hi < outer; ++hi)
        for (std::size_t ik = 0; ik < pk; ++ik)
            for (std::size_t lo = 0; lo < inner; ++lo)
                m(static_cast<Eigen::Index>(ik),
                  static_cast<Eigen::Index>(lo + inner * hi)) =
                    t[lo + inner * (ik + pk * hi)];
    return m;
}

Tensor refold(const Eigen::MatrixXd& m, std::size_t mode, std::vector<std::size_t> dims) {
    const std::size_t r = dims.size();
    if (mode >= r) throw std::invalid_argument("refold: mode out of range");
    const std::size_t pk = dims[mode];
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    if (static_cast<std::size_t>(m.rows()) != pk ||
        static_cast<std::size_t>(m.cols()) != total / pk)
        throw std::invalid_argument("refold: matrix shape inconsistent with dims");

    Tensor t(std::move(dims));
    std::size_t inner = 1;
    for (std::size_t k = 0; k < mode; ++k) inner *= t.dim(k);
    const std::size_t outer = total / (inner * pk);
    for (std::size_t hi = 0; hi < outer; ++hi)
        for (std::size_t ik = 0; ik < pk; ++ik)
            for (std::size_t lo = 0; lo < inner; ++lo)
                t[lo + inner * (ik + pk * hi)] =
                    m(static_cast<Eigen::Index>(ik),
                      static_cast<Eigen::Index>(lo + inner * hi));
    return t;
}

Tensor mode_product(const Tensor& t, std::size_t mode, const Eigen::MatrixXd& m) {
    if (mode >= t.order()) throw std::invalid_argument("mode_product: mode out of range");
    if (static_cast<std::size_t>(m.cols()) != t.dim(mode))
        throw std::invalid_argument("mode_product: factor columns do not match mode dim");
    Eigen::MatrixXd prod = m * unfold(t, mode);
    std::vector<std::size_t> dims = t.dims();
    dims[mode] = static_cast<std::size_t>(m.rows());
    return refold(prod, mode, std::move(dims));
}

Tensor multi_linear_product(const Tensor& t,
                            const std::vector<std::pair<std::size_t, Eigen::MatrixXd>>& factors) {
    Tensor out = t;
    for (const auto& [mode, m] : factors) out = mode_product(out, mode, m);
    return out;
}

Tensor multi_linear_product(const Tensor& t, const std::vector<Eigen::MatrixXd>& factors) {
    if (factors.size() != t.order())
        throw std::invalid_argument("multi_linear_product: factor count != order");
    Tensor out = t;
    for (std::size_t k = 0; k < factors.size(); ++k) out = mode_product(out, k, factors[k]);
    return out;
}

double inner(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("inner: size mismatch");
    return a.vec_map().dot(b.vec_map());
}

double frob_norm(const Tensor& a) { return std::sqrt(inner(a, a)); }

Tensor outer(const Tensor& a, const Tensor& b) {
    std::vector<std::size_t> dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    Tensor t(std::move(dims));
    const std::size_t na = a.size();
    for (std::size_t j = 0; j < b.size(); ++j)
        for (std::size_t i = 0; i < na; ++i) t[i + na * j] = a[i] * b[j];
    return t;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::MatrixXd kron_reversed(const std::vector<Eigen::MatrixXd>& factors) {
    if (factors.empty()) throw std::invalid_argument("kron_reversed: no factors");
    Eigen::MatrixXd out = factors.back();
    for (std::size_t k = factors.size() - 1; k-- > 0;) out = kron(out, factors[k]);
    return out;
}

}  // namespace gmlm
