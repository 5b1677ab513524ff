// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal dense linear algebra used by every model: row-major 64-bit
// matrices, elementwise activations, and multiply-accumulate counting
// hooks for the structural benchmarks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cwrnn {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Multiply-accumulate counts for one forward step, split by weight path.
struct OpCount {
    std::uint64_t recurrent = 0;
    std::uint64_t input = 0;
    std::uint64_t output = 0;

    std::uint64_t total() const { return recurrent + input + output; }

    OpCount& operator+=(const OpCount& o) {
        recurrent += o.recurrent;
        input += o.input;
        output += o.output;
        return *this;
    }
    friend bool operator==(const OpCount&, const OpCount&) = default;
};

// Dot product of row r of m against v over the half-open column range
// [col_begin, col_end). Accumulates left to right so callers that share
// this primitive produce bit-identical sums. When macs is non-null it is
// incremented by the number of multiply-accumulates performed.
double row_dot(const Matrix& m, std::size_t r, const Vector& v,
               std::size_t col_begin, std::size_t col_end,
               std::uint64_t* macs = nullptr);

// out[i] = sum_j m(i,j) * v[j]; throws std::invalid_argument on mismatch.
Vector matvec(const Matrix& m, const Vector& v, std::uint64_t* macs = nullptr);

// out[j] = sum_i m(i,j) * v[i] (transpose product, used by the backward passes).
Vector matvec_transposed(const Matrix& m, const Vector& v);

Vector tanh_vec(const Vector& v);

// Shift-invariant softmax: the max entry is subtracted before exponentiation.
Vector softmax_vec(const Vector& v);

double sigmoid(double x);

bool all_finite(const Vector& v);

// 17-significant-digit decimal form shared by every text format; parses
// back to the exact same double.
std::string format_real(double x);

}  // namespace cwrnn
