#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace powermap {

// Dense row-major matrix. Sized for this library's needs (designs up to a
// few hundred rows, parameter blocks up to ~25 columns).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::vector<double> row(std::size_t i) const {
        return {data_.begin() + static_cast<long>(i * cols_),
                data_.begin() + static_cast<long>((i + 1) * cols_)};
    }

    std::vector<double> col(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void set_row(std::size_t i, const std::vector<double>& values) {
        for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = values[j];
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

namespace linalg {

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline std::vector<double> multiply(const Matrix& a, const std::vector<double>& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("multiply: shape mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

// A^T A and A^T y in one pass; the workhorse of the fitting code.
inline Matrix gram(const Matrix& a) {
    Matrix g(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = j; k < a.cols(); ++k) g(j, k) += aij * a(i, k);
        }
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t k = 0; k < j; ++k) g(j, k) = g(k, j);
    return g;
}

inline std::vector<double> tmultiply(const Matrix& a, const std::vector<double>& y) {
    if (a.rows() != y.size()) throw std::invalid_argument("tmultiply: shape mismatch");
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a(i, j) * y[i];
    return out;
}

// Cholesky factorization of a symmetric positive-definite matrix.
// Returns false if the matrix is not numerically positive definite.
inline bool cholesky(const Matrix& a, Matrix& lower) {
    const std::size_t n = a.rows();
    lower = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double diag = std::sqrt(d);
        lower(j, j) = diag;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / diag;
        }
    }
    return true;
}

inline std::vector<double> cholesky_solve(const Matrix& lower, std::vector<double> b) {
    const std::size_t n = lower.rows();
    // forward L z = b
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * b[k];
        b[i] = s / lower(i, i);
    }
    // backward L^T x = z
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * b[k];
        b[ii] = s / lower(ii, ii);
    }
    return b;
}

// Solve SPD system a x = b; false on rank deficiency.
inline bool spd_solve(const Matrix& a, const std::vector<double>& b, std::vector<double>& x) {
    Matrix lower;
    if (!cholesky(a, lower)) return false;
    x = cholesky_solve(lower, b);
    return true;
}

// Inverse of an SPD matrix via its Cholesky factor.
inline bool spd_inverse(const Matrix& a, Matrix& inv) {
    Matrix lower;
    if (!cholesky(a, lower)) return false;
    const std::size_t n = a.rows();
    inv = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        const auto col = cholesky_solve(lower, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return true;
}

struct EigenDecomposition {
    std::vector<double> values;  // descending
    Matrix vectors;              // columns are eigenvectors, same order
};

// Cyclic Jacobi rotations for a symmetric matrix; adequate and robust for
// the small (p <= ~25) matrices this library produces.
inline EigenDecomposition jacobi_eigen(Matrix a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("jacobi_eigen: matrix must be square");
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    EigenDecomposition out;
    out.values.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
    std::sort(order.begin(), order.end(),
              [&diag](std::size_t l, std::size_t r) { return diag[l] > diag[r]; });
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

}  // namespace linalg
}  // namespace powermap
