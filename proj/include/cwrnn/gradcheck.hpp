// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference verification of the analytic BPTT gradients.
// The checker only ever calls the forward pass, so it stays independent
// of the backward implementations it validates.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cwrnn/model.hpp"
#include "cwrnn/rng.hpp"

namespace cwrnn {

struct GradCheckOptions {
    std::size_t steps = 8;
    double step_size = 1e-5;  // finite-difference h
    double tolerance = 1e-6;
    // Test hook: added to one analytic gradient entry so harness failures
    // are detectable end to end.
    double corruption = 0.0;
};

struct GradCheckReport {
    struct Block {
        std::string name;
        double max_rel_err = 0.0;
    };
    std::vector<Block> blocks;
    double max_rel_err = 0.0;
    std::string worst_block;

    bool passed(double tolerance) const { return max_rel_err < tolerance; }
};

// Runs the model on a random input sequence against a fixed random linear
// loss (identity outputs) or a per-step cross-entropy (softmax outputs),
// then compares every analytic parameter gradient with a central finite
// difference. Relative error uses max(|analytic|, |numeric|, 1) in the
// denominator so near-zero gradients are judged on absolute scale, which
// the h^2 truncation of the difference quotient requires.
GradCheckReport gradcheck(SequenceModel& model, Rng& rng, const GradCheckOptions& opts = {});

}  // namespace cwrnn
