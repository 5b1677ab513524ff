// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Structural accounting for the clockwork schedule: exact nonzero counts
// of the recurrent matrix, per-step multiply-accumulate counts, and the
// op-count speedup over a dense RNN of the same width. Everything here is
// computed by enumerating the schedule, not by trusting closed forms; the
// closed forms live in the tests as the cross-check.

#pragma once

#include <cstdint>

#include "cwrnn/clockwork.hpp"
#include "cwrnn/numerics.hpp"

namespace cwrnn {

// Steady-state multiply-accumulate averages over a window of steps.
struct AvgOps {
    OpCount totals;
    std::uint64_t window = 0;

    double recurrent() const { return static_cast<double>(totals.recurrent) / window; }
    double input() const { return static_cast<double>(totals.input) / window; }
    double output() const { return static_cast<double>(totals.output) / window; }
};

// Number of structurally nonzero recurrent weights, by block enumeration.
// Equals n^2/2 + nk/2 when all g modules share one size k.
std::uint64_t recurrent_param_count(const ClockSpec& spec);

// Least common multiple of the module periods: one full schedule cycle.
std::uint64_t schedule_lcm(const ClockSpec& spec);

// Multiply-accumulates the forward step performs at timestep t, counting
// weight applications only (activation functions are free). The output
// path is counted for a single output unit, matching the speedup ratio's
// accounting.
OpCount ops_per_step(const ClockSpec& spec, std::size_t input_size, std::uint64_t t);

// Sums ops_per_step over t = 1..window. window = 0 means one full schedule
// cycle; otherwise window must be a multiple of the cycle so the average
// is a steady-state value.
AvgOps avg_ops(const ClockSpec& spec, std::size_t input_size, std::uint64_t window = 0);

// Enumerated op-count ratio of a dense n-unit RNN over the clockwork
// schedule: (n^2 + n*m + n) / (avg recurrent + avg input + 2n). For
// exponential periods with g >= 2 the ratio is bounded below by g/4; for
// g < 2 the ratio is still returned but no bound is claimed.
double speedup_vs_rnn(const ClockSpec& spec, std::size_t input_size);

}  // namespace cwrnn
