// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cwrnn {

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double x) { return std::isfinite(x); });
}

bool all_finite(const Vector& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
}

double row_dot(const Matrix& m, std::size_t r, const Vector& v,
               std::size_t col_begin, std::size_t col_end, std::uint64_t* macs) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t j = col_begin; j < col_end; ++j) {
        acc += row[j] * v[j];
    }
    if (macs != nullptr) {
        *macs += col_end - col_begin;
    }
    return acc;
}

Vector matvec(const Matrix& m, const Vector& v, std::uint64_t* macs) {
    if (m.cols() != v.size()) {
        throw std::invalid_argument("matvec: matrix has " + std::to_string(m.cols()) +
                                    " columns but vector has " + std::to_string(v.size()) +
                                    " entries");
    }
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out[i] = row_dot(m, i, v, 0, m.cols(), macs);
    }
    return out;
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
    if (m.rows() != v.size()) {
        throw std::invalid_argument("matvec_transposed: matrix has " +
                                    std::to_string(m.rows()) + " rows but vector has " +
                                    std::to_string(v.size()) + " entries");
    }
    Vector out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        const double vi = v[i];
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out[j] += row[j] * vi;
        }
    }
    return out;
}

Vector tanh_vec(const Vector& v) {
    Vector out(v.size());
    std::transform(v.begin(), v.end(), out.begin(),
                   [](double x) { return std::tanh(x); });
    return out;
}

Vector softmax_vec(const Vector& v) {
    if (v.empty()) {
        throw std::invalid_argument("softmax_vec: empty input");
    }
    const double shift = *std::max_element(v.begin(), v.end());
    Vector out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - shift);
        sum += out[i];
    }
    for (double& x : out) {
        x /= sum;
    }
    return out;
}

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace cwrnn
