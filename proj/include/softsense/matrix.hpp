#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace softsense {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Problem sizes are small (tens of nodes,
// embedding dims in the low hundreds), so plain loops beat the overhead of a
// full linear-algebra dependency and keep the gradient code auditable.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// m (r x c) * v (c) -> r
inline Vec matvec(const Matrix& m, std::span<const double> v) {
    Vec out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
    return out;
}

// m^T (c x r) * v (r) -> c
inline Vec matvec_t(const Matrix& m, std::span<const double> v) {
    Vec out(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double vr = v[r];
        auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) out[c] += vr * row[c];
    }
    return out;
}

// acc += u v^T, acc is (|u| x |v|)
inline void outer_acc(Matrix& acc, std::span<const double> u, std::span<const double> v) {
    for (std::size_t r = 0; r < u.size(); ++r) {
        const double ur = u[r];
        auto row = acc.row(r);
        for (std::size_t c = 0; c < v.size(); ++c) row[c] += ur * v[c];
    }
}

}  // namespace softsense
