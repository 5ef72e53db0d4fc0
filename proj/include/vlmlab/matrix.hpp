// Dense row-major matrix of doubles plus the small set of reductions
// (row softmax, mean pooling) everything else in the library builds on.

#ifndef VLMLAB_MATRIX_HPP
#define VLMLAB_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlmlab {

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_data(std::size_t rows, std::size_t cols, std::vector<double> data) {
        if (data.size() != rows * cols) {
            throw std::invalid_argument("Matrix: data length " + std::to_string(data.size()) +
                                        " != rows*cols " + std::to_string(rows * cols));
        }
        Matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.data_ = std::move(data);
        return m;
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.size() ? rows.begin()->size() : 0;
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_) throw std::invalid_argument("Matrix: ragged rows");
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
    }

    void set_row(std::size_t i, std::span<const double> values) {
        if (values.size() != cols_) throw std::invalid_argument("set_row: dimension mismatch");
        std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < a.cols(); ++c) s += a(i, c) * b(c, j);
            out(i, j) = s;
        }
    }
    return out;
}

/// a^T * b without materializing the transpose.
inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_at_b: row mismatch");
    Matrix out(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * b(r, j);
            out(i, j) = s;
        }
    }
    return out;
}

/// a * b^T.
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_a_bt: column mismatch");
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < a.cols(); ++c) s += a(i, c) * b(j, c);
            out(i, j) = s;
        }
    }
    return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// In-place softmax of one row, stabilized by max subtraction.
inline void softmax_inplace(std::span<double> row) {
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& x : row) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : row) x /= sum;
}

/// Row-wise softmax. Each output row sums to 1, entries in (0,1].
inline Matrix softmax_rows(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("softmax_rows: empty input");
    if (!m.all_finite()) throw std::invalid_argument("softmax_rows: non-finite input");
    Matrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i) softmax_inplace(out.row(i));
    return out;
}

/// Component-wise arithmetic mean of the selected rows.
inline std::vector<double> mean_pool(const Matrix& m, std::span<const std::size_t> idx) {
    if (idx.empty()) throw std::invalid_argument("mean_pool: empty selection");
    std::vector<double> acc(m.cols(), 0.0);
    for (std::size_t i : idx) {
        if (i >= m.rows()) throw std::out_of_range("mean_pool: index " + std::to_string(i) + " out of range");
        auto r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) acc[j] += r[j];
    }
    const double inv = 1.0 / static_cast<double>(idx.size());
    for (double& x : acc) x *= inv;
    return acc;
}

inline std::vector<double> mean_pool(const Matrix& m, const std::vector<std::size_t>& idx) {
    return mean_pool(m, std::span<const std::size_t>(idx));
}

} // namespace vlmlab

#endif // VLMLAB_MATRIX_HPP
