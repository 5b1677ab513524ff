// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace cwrnn {

namespace {

// Scalar loss over the model outputs. Identity outputs are scored with a
// fixed random linear functional; softmax outputs with summed per-step
// cross-entropy against fixed random classes.
double loss_of(OutputActivation act, const std::vector<Vector>& outputs,
               const std::vector<Vector>& lin_weights, const std::vector<std::size_t>& classes) {
    double loss = 0.0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        if (act == OutputActivation::Identity) {
            for (std::size_t k = 0; k < outputs[t].size(); ++k) {
                loss += lin_weights[t][k] * outputs[t][k];
            }
        } else {
            loss += -std::log(outputs[t][classes[t]]);
        }
    }
    return loss;
}

}  // namespace

GradCheckReport gradcheck(SequenceModel& model, Rng& rng, const GradCheckOptions& opts) {
    const std::size_t steps = opts.steps;
    const std::size_t o = model.output_size();

    std::vector<Vector> inputs(steps, Vector(model.input_size()));
    for (auto& x : inputs) {
        for (double& v : x) {
            v = rng.gaussian(0.0, 1.0);
        }
    }
    std::vector<Vector> lin_weights(steps, Vector(o));
    std::vector<std::size_t> classes(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        for (double& w : lin_weights[t]) {
            w = rng.gaussian(0.0, 1.0);
        }
        classes[t] = static_cast<std::size_t>(rng.uniform_below(o));
    }

    // Analytic gradients.
    auto tape = model.make_tape();
    const auto outputs = model.forward(inputs, tape.get());
    std::vector<Vector> output_grads(steps, Vector(o, 0.0));
    for (std::size_t t = 0; t < steps; ++t) {
        if (model.output_activation() == OutputActivation::Identity) {
            output_grads[t] = lin_weights[t];
        } else {
            output_grads[t] = outputs[t];  // dL/dz of -log p[c] is p - onehot
            output_grads[t][classes[t]] -= 1.0;
        }
    }
    auto grads = model.zeros_like();
    model.accumulate_grads(*tape, output_grads, *grads);

    auto grad_blocks = grads->param_blocks();
    if (opts.corruption != 0.0 && !grad_blocks.empty() && !grad_blocks[0].data.empty()) {
        grad_blocks[0].data[0] += opts.corruption;
    }

    GradCheckReport report;
    auto param_blocks = model.param_blocks();
    for (std::size_t b = 0; b < param_blocks.size(); ++b) {
        GradCheckReport::Block block{param_blocks[b].name, 0.0};
        for (std::size_t i = 0; i < param_blocks[b].data.size(); ++i) {
            double& w = param_blocks[b].data[i];
            const double saved = w;
            w = saved + opts.step_size;
            const double up = loss_of(model.output_activation(), model.forward(inputs),
                                      lin_weights, classes);
            w = saved - opts.step_size;
            const double down = loss_of(model.output_activation(), model.forward(inputs),
                                        lin_weights, classes);
            w = saved;

            const double numeric = (up - down) / (2.0 * opts.step_size);
            const double analytic = grad_blocks[b].data[i];
            const double rel = std::abs(analytic - numeric) /
                               std::max({std::abs(analytic), std::abs(numeric), 1.0});
            block.max_rel_err = std::max(block.max_rel_err, rel);
        }
        if (block.max_rel_err > report.max_rel_err) {
            report.max_rel_err = block.max_rel_err;
            report.worst_block = block.name;
        }
        report.blocks.push_back(std::move(block));
    }
    return report;
}

}  // namespace cwrnn
