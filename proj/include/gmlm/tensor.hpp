#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gmlm {

/// Dense tensor of order r with flat storage in vec order: the first index
/// varies fastest, so vec(T) is the storage itself and an order-2 tensor
/// coincides with a column-major matrix.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> dims);
    Tensor(std::vector<std::size_t> dims, std::vector<double> data);

    static Tensor from_matrix(const Eigen::MatrixXd& m);
    static Tensor from_vector(const Eigen::VectorXd& v);
    static Tensor scalar(double v);

    std::size_t order() const { return dims_.size(); }
    std::size_t dim(std::size_t k) const { return dims_[k]; }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double& operator[](std::size_t flat) { return data_[flat]; }

    double at(std::span<const std::size_t> idx) const { return data_[flat_index(idx)]; }
    double& at(std::span<const std::size_t> idx) { return data_[flat_index(idx)]; }
    double at(std::initializer_list<std::size_t> idx) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }
    double& at(std::initializer_list<std::size_t> idx) {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

    std::size_t flat_index(std::span<const std::size_t> idx) const;

    const std::vector<double>& vec() const { return data_; }
    std::vector<double>& vec() { return data_; }

    Eigen::Map<const Eigen::VectorXd> vec_map() const {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }
    Eigen::Map<Eigen::VectorXd> vec_map() {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }

    /// Order-1 or order-2 tensors viewed as a column-major matrix.
    Eigen::MatrixXd as_matrix() const;

    bool same_dims(const Tensor& o) const { return dims_ == o.dims_; }

    Tensor& operator+=(const Tensor& o);
    Tensor& operator-=(const Tensor& o);
    Tensor& operator*=(double s);
    Tensor operator+(const Tensor& o) const;
    Tensor operator-(const Tensor& o) const;
    Tensor operator*(double s) const;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

/// k-mode unfolding (0-based mode): dim(k) x prod of remaining dims, column j
/// enumerates the remaining indices with the lowest remaining mode fastest.
Eigen::MatrixXd unfold(const Tensor& t, std::size_t mode);

/// Inverse of unfold for a tensor of the given dims.
Tensor refold(const Eigen::MatrixXd& m, std::size_t mode, std::vector<std::size_t> dims);

/// k-mode product: result dims equal dims(t) with entry k replaced by m.rows().
Tensor mode_product(const Tensor& t, std::size_t mode, const Eigen::MatrixXd& m);

/// Tucker operator over the given (mode, factor) pairs; modes must be distinct.
Tensor multi_linear_product(const Tensor& t,
                            const std::vector<std::pair<std::size_t, Eigen::MatrixXd>>& factors);

/// Tucker operator over all modes, factors[k] applied to mode k.
Tensor multi_linear_product(const Tensor& t, const std::vector<Eigen::MatrixXd>& factors);

double inner(const Tensor& a, const Tensor& b);
double frob_norm(const Tensor& a);

/// Outer product: order(a)+order(b) tensor with vec identification
/// a∘b = vec(a) vec(b)^T.
Tensor outer(const Tensor& a, const Tensor& b);

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Iterated Kronecker product factors[r-1] ⊗ ... ⊗ factors[0]
/// (mode-1 factor innermost, matching the vec order of mode products).
Eigen::MatrixXd kron_reversed(const std::vector<Eigen::MatrixXd>& factors);

}  // namespace gmlm
