// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/analysis.hpp"

#include <numeric>
#include <stdexcept>

namespace cwrnn {

std::uint64_t recurrent_param_count(const ClockSpec& spec) {
    return spec.recurrent_weight_count();
}

std::uint64_t schedule_lcm(const ClockSpec& spec) {
    std::uint64_t l = 1;
    for (std::uint64_t p : spec.periods()) {
        l = std::lcm(l, p);
    }
    return l;
}

OpCount ops_per_step(const ClockSpec& spec, std::size_t input_size, std::uint64_t t) {
    if (t == 0) {
        throw std::invalid_argument("ops_per_step: timesteps start at 1");
    }
    const std::size_t n = spec.total_size();
    OpCount ops;
    for (std::size_t g = 0; g < spec.group_count(); ++g) {
        if (t % spec.period(g) == 0) {
            ops.recurrent += static_cast<std::uint64_t>(spec.size(g)) * (n - spec.offset(g));
            ops.input += static_cast<std::uint64_t>(spec.size(g)) * input_size;
        }
    }
    ops.output = n;  // single output unit reads the full hidden vector
    return ops;
}

AvgOps avg_ops(const ClockSpec& spec, std::size_t input_size, std::uint64_t window) {
    const std::uint64_t cycle = schedule_lcm(spec);
    if (window == 0) {
        window = cycle;
    }
    if (window % cycle != 0) {
        throw std::invalid_argument("avg_ops: window must be a multiple of the schedule cycle (" +
                                    std::to_string(cycle) + ")");
    }
    AvgOps avg;
    avg.window = window;
    for (std::uint64_t t = 1; t <= window; ++t) {
        avg.totals += ops_per_step(spec, input_size, t);
    }
    return avg;
}

double speedup_vs_rnn(const ClockSpec& spec, std::size_t input_size) {
    const auto n = static_cast<double>(spec.total_size());
    const auto m = static_cast<double>(input_size);
    const AvgOps avg = avg_ops(spec, input_size);
    const double dense = n * n + n * m + n;
    const double clocked = avg.recurrent() + avg.input() + 2.0 * n;
    return dense / clocked;
}

}  // namespace cwrnn
