// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace cwrnn {

namespace {

void check_same_shape(const std::vector<NamedBlock>& a, const std::vector<NamedBlock>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("parameter block count mismatch");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].data.size() != b[i].data.size()) {
            throw std::invalid_argument("parameter block '" + a[i].name + "' size mismatch");
        }
    }
}

}  // namespace

void copy_params(SequenceModel& dst, SequenceModel& src) {
    auto d = dst.param_blocks();
    auto s = src.param_blocks();
    check_same_shape(d, s);
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::copy(s[i].data.begin(), s[i].data.end(), d[i].data.begin());
    }
}

void axpy_params(SequenceModel& dst, double alpha, SequenceModel& src) {
    auto d = dst.param_blocks();
    auto s = src.param_blocks();
    check_same_shape(d, s);
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d[i].data.size(); ++j) {
            d[i].data[j] += alpha * s[i].data[j];
        }
    }
}

void zero_params(SequenceModel& m) {
    for (auto& block : m.param_blocks()) {
        std::fill(block.data.begin(), block.data.end(), 0.0);
    }
}

Vector apply_output_activation(OutputActivation act, const Vector& z) {
    switch (act) {
        case OutputActivation::Identity:
            return z;
        case OutputActivation::Softmax:
            return softmax_vec(z);
    }
    throw std::logic_error("unknown output activation");
}

}  // namespace cwrnn
