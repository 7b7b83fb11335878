#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

namespace convpers {

/// Dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    /// Dense matrix from (row, col, value) triplets; repeated entries add up.
    static Matrix from_triplets(std::size_t rows, std::size_t cols,
                                std::span<const std::tuple<std::size_t, std::size_t, double>> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Matrix transpose() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    std::vector<double> apply(std::span<const double> x) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct EigenDecomposition {
    std::vector<double> values;          // non-increasing
    std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};

/// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
/// Frobenius mass drops below `tolerance`.
EigenDecomposition symmetric_eigen(const Matrix& symmetric, double tolerance = 1e-12,
                                   std::size_t max_sweeps = 100);

/// Numerical rank by Gaussian elimination with partial pivoting; pivots with
/// magnitude ≤ tolerance count as zero.
std::size_t numerical_rank(Matrix m, double tolerance);

/// Orthonormal basis of {x : M x = 0}, from the eigenvectors of MᵀM whose
/// eigenvalues fall below tolerance.
std::vector<std::vector<double>> null_space(const Matrix& m, double tolerance = 1e-10);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace convpers
