#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "boilnet/common.hpp"

namespace boilnet {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. The only linear algebra the networks
/// need is matrix-vector and small matrix-matrix products, implemented below
/// with a fixed ascending summation order so results are reproducible.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// y = a·x + bias, accumulated as bias + sum over columns in ascending order.
inline Vec matvec_bias(const Matrix& a, const Vec& x, const Vec& bias) {
    if (x.size() != a.cols || bias.size() != a.rows) {
        fail("dimension", "matvec_bias: shape mismatch");
    }
    Vec y(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* row = &a.data[i * a.cols];
        double acc = bias[i];
        for (std::size_t p = 0; p < a.cols; ++p) {
            acc += row[p] * x[p];
        }
        y[i] = acc;
    }
    return y;
}

/// y = aᵀ·x  (a is rows×cols, x has length rows, y has length cols).
inline Vec matvec_transposed(const Matrix& a, const Vec& x) {
    if (x.size() != a.rows) {
        fail("dimension", "matvec_transposed: shape mismatch");
    }
    Vec y(a.cols, 0.0);
    for (std::size_t p = 0; p < a.rows; ++p) {
        const double* row = &a.data[p * a.cols];
        const double xv = x[p];
        for (std::size_t i = 0; i < a.cols; ++i) {
            y[i] += row[i] * xv;
        }
    }
    return y;
}

/// c += a·b. Loop order keeps the innermost loop over contiguous memory.
inline void gemm_nn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) {
        fail("dimension", "gemm_nn_acc: shape mismatch");
    }
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* crow = &c.data[i * c.cols];
        for (std::size_t p = 0; p < a.cols; ++p) {
            const double av = a(i, p);
            const double* brow = &b.data[p * b.cols];
            for (std::size_t j = 0; j < b.cols; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

/// c = aᵀ·b  (a is k×m, b is k×n, c is m×n).
inline void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols) {
        fail("dimension", "gemm_tn: shape mismatch");
    }
    std::fill(c.data.begin(), c.data.end(), 0.0);
    for (std::size_t p = 0; p < a.rows; ++p) {
        const double* arow = &a.data[p * a.cols];
        const double* brow = &b.data[p * b.cols];
        for (std::size_t i = 0; i < a.cols; ++i) {
            double* crow = &c.data[i * c.cols];
            const double av = arow[i];
            for (std::size_t j = 0; j < b.cols; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

/// c += a·bᵀ  (a is m×k, b is n×k, c is m×n), summed over k in ascending order.
inline void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows) {
        fail("dimension", "gemm_nt_acc: shape mismatch");
    }
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = &a.data[i * a.cols];
        double* crow = &c.data[i * c.cols];
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = &b.data[j * b.cols];
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                acc += arow[k] * brow[k];
            }
            crow[j] += acc;
        }
    }
}

}  // namespace boilnet
