#include "convpers/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "convpers/error.hpp"

namespace convpers {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) fail(ErrorKind::LengthMismatch, "matrix data length mismatch");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) fail(ErrorKind::ShapeMismatch, "ragged matrix rows");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

Matrix Matrix::from_triplets(std::size_t rows, std::size_t cols,
                             std::span<const std::tuple<std::size_t, std::size_t, double>> entries) {
    Matrix m(rows, cols);
    for (const auto& [r, c, v] : entries) {
        if (r >= rows || c >= cols) fail(ErrorKind::DimMismatch, "triplet outside matrix bounds");
        m(r, c) += v;
    }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    }
    return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) fail(ErrorKind::DimMismatch, "matrix product dimension mismatch");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double a = (*this)(r, k);
            for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
        }
    }
    return out;
}

Matrix Matrix::operator-(const Matrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) fail(ErrorKind::DimMismatch, "matrix difference shape mismatch");
    Matrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

std::vector<double> Matrix::apply(std::span<const double> x) const {
    if (x.size() != cols_) fail(ErrorKind::DimMismatch, "matrix-vector dimension mismatch");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
        y[r] = acc;
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorKind::LengthMismatch, "dot product length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

EigenDecomposition symmetric_eigen(const Matrix& symmetric, double tolerance, std::size_t max_sweeps) {
    const std::size_t n = symmetric.rows();
    if (n != symmetric.cols()) fail(ErrorKind::DimMismatch, "eigendecomposition needs a square matrix");
    Matrix a = symmetric;
    Matrix v = Matrix::identity(n);

    auto off_diagonal = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        }
        return std::sqrt(s);
    };

    for (std::size_t sweep = 0; sweep < max_sweeps && off_diagonal() >= tolerance; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    for (std::size_t i : order) {
        out.values.push_back(a(i, i));
        std::vector<double> vec(n);
        for (std::size_t k = 0; k < n; ++k) vec[k] = v(k, i);
        out.vectors.push_back(std::move(vec));
    }
    return out;
}

std::size_t numerical_rank(Matrix m, double tolerance) {
    std::size_t rank = 0;
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (std::abs(m(r, c)) > std::abs(m(pivot, c))) pivot = r;
        }
        if (std::abs(m(pivot, c)) <= tolerance) continue;
        for (std::size_t k = 0; k < cols; ++k) std::swap(m(pivot, k), m(rank, k));
        for (std::size_t r = rank + 1; r < rows; ++r) {
            const double factor = m(r, c) / m(rank, c);
            for (std::size_t k = c; k < cols; ++k) m(r, k) -= factor * m(rank, k);
        }
        ++rank;
    }
    return rank;
}

std::vector<std::vector<double>> null_space(const Matrix& m, double tolerance) {
    const auto eig = symmetric_eigen(m.transpose() * m);
    std::vector<std::vector<double>> basis;
    for (std::size_t i = 0; i < eig.values.size(); ++i) {
        if (std::abs(eig.values[i]) <= tolerance) basis.push_back(eig.vectors[i]);
    }
    return basis;
}

}  // namespace convpers
