// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <string>

#include "cwrnn/baselines.hpp"

namespace cwrnn {

SrnParams init_srn_params(std::size_t hidden, std::size_t input_size, std::size_t output_size,
                          Rng& rng, double stddev) {
    if (stddev <= 0.0) {
        throw std::invalid_argument("init_srn_params: stddev must be positive");
    }
    SrnParams p{Matrix(hidden, input_size), Matrix(hidden, hidden), Matrix(output_size, hidden),
                Vector(hidden, 0.0), Vector(output_size, 0.0)};
    for (double& w : p.w_rec.values()) {
        w = rng.gaussian(0.0, stddev);
    }
    for (double& w : p.w_in.values()) {
        w = rng.gaussian(0.0, stddev);
    }
    for (double& w : p.w_out.values()) {
        w = rng.gaussian(0.0, stddev);
    }
    return p;
}

void SrnTape::clear() {
    initial_hidden.clear();
    inputs.clear();
    hidden.clear();
}

Vector srn_forward_step(const SrnParams& params, NetState& state, const Vector& x,
                        OutputActivation act) {
    const std::size_t n = params.hidden_size();
    if (x.size() != params.input_size()) {
        throw std::invalid_argument("srn_forward_step: input has " + std::to_string(x.size()) +
                                    " entries, expected " + std::to_string(params.input_size()));
    }
    if (state.hidden.size() != n || state.t == 0) {
        throw std::invalid_argument("srn_forward_step: state size mismatch");
    }
    const Vector prev = state.hidden;
    for (std::size_t u = 0; u < n; ++u) {
        const double z = row_dot(params.w_rec, u, prev, 0, n) +
                         row_dot(params.w_in, u, x, 0, x.size()) + params.b_h[u];
        state.hidden[u] = std::tanh(z);
    }
    Vector z_out(params.output_size());
    for (std::size_t k = 0; k < z_out.size(); ++k) {
        z_out[k] = row_dot(params.w_out, k, state.hidden, 0, n) + params.b_out[k];
    }
    ++state.t;
    return apply_output_activation(act, z_out);
}

std::vector<Vector> srn_forward(const SrnParams& params, std::span<const Vector> inputs,
                                OutputActivation act, SrnTape* tape) {
    NetState state(params.hidden_size());
    std::vector<Vector> outputs;
    outputs.reserve(inputs.size());
    if (tape != nullptr) {
        tape->clear();
        tape->initial_hidden = state.hidden;
    }
    for (const Vector& x : inputs) {
        outputs.push_back(srn_forward_step(params, state, x, act));
        if (tape != nullptr) {
            tape->inputs.push_back(x);
            tape->hidden.push_back(state.hidden);
        }
    }
    return outputs;
}

void srn_backward(const SrnParams& params, const SrnTape& tape,
                  std::span<const Vector> output_grads, SrnParams& grads) {
    const std::size_t n = params.hidden_size();
    const std::size_t steps = tape.steps();
    if (output_grads.size() != steps) {
        throw std::invalid_argument("srn_backward: tape/gradient length mismatch");
    }
    Vector err(n, 0.0);
    for (std::size_t s = steps; s-- > 0;) {
        const Vector& y = tape.hidden[s];
        const Vector& y_prev = s > 0 ? tape.hidden[s - 1] : tape.initial_hidden;
        const Vector& x = tape.inputs[s];
        const Vector& g_out = output_grads[s];

        for (std::size_t k = 0; k < g_out.size(); ++k) {
            const double gk = g_out[k];
            grads.b_out[k] += gk;
            for (std::size_t j = 0; j < n; ++j) {
                grads.w_out(k, j) += gk * y[j];
                err[j] += params.w_out(k, j) * gk;
            }
        }

        Vector prev_err(n, 0.0);
        for (std::size_t u = 0; u < n; ++u) {
            const double dz = err[u] * (1.0 - y[u] * y[u]);
            grads.b_h[u] += dz;
            for (std::size_t j = 0; j < n; ++j) {
                grads.w_rec(u, j) += dz * y_prev[j];
                prev_err[j] += params.w_rec(u, j) * dz;
            }
            for (std::size_t j = 0; j < x.size(); ++j) {
                grads.w_in(u, j) += dz * x[j];
            }
        }
        err = std::move(prev_err);
    }
}

Srn::Srn(std::size_t hidden, std::size_t input_size, std::size_t output_size,
         OutputActivation act)
    : params_{Matrix(hidden, input_size), Matrix(hidden, hidden), Matrix(output_size, hidden),
              Vector(hidden, 0.0), Vector(output_size, 0.0)},
      act_(act) {}

Srn::Srn(SrnParams params, OutputActivation act) : params_(std::move(params)), act_(act) {}

std::size_t Srn::param_count() const {
    return param_count_srn(input_size(), hidden_size(), output_size());
}

std::vector<NamedBlock> Srn::param_blocks() {
    const std::size_t n = hidden_size();
    return {
        {"w_in", params_.w_in.values(), n, input_size()},
        {"w_rec", params_.w_rec.values(), n, n},
        {"w_out", params_.w_out.values(), output_size(), n},
        {"b_h", params_.b_h, n, 0},
        {"b_out", params_.b_out, output_size(), 0},
    };
}

std::unique_ptr<SequenceModel> Srn::clone() const {
    return std::make_unique<Srn>(*this);
}

std::unique_ptr<SequenceModel> Srn::zeros_like() const {
    return std::make_unique<Srn>(hidden_size(), input_size(), output_size(), act_);
}

std::vector<Vector> Srn::forward(std::span<const Vector> inputs, Tape* tape,
                                 OpCount* ops) const {
    auto* t = dynamic_cast<SrnTape*>(tape);
    if (tape != nullptr && t == nullptr) {
        throw std::invalid_argument("Srn::forward: tape of wrong model kind");
    }
    if (ops != nullptr) {
        const std::size_t n = hidden_size();
        ops->recurrent += inputs.size() * n * n;
        ops->input += inputs.size() * n * input_size();
        ops->output += inputs.size() * output_size() * n;
    }
    return srn_forward(params_, inputs, act_, t);
}

std::unique_ptr<Tape> Srn::make_tape() const {
    return std::make_unique<SrnTape>();
}

void Srn::accumulate_grads(const Tape& tape, std::span<const Vector> output_grads,
                           SequenceModel& grads) const {
    const auto& t = dynamic_cast<const SrnTape&>(tape);
    auto& g = dynamic_cast<Srn&>(grads);
    srn_backward(params_, t, output_grads, g.params_);
}

std::size_t param_count_srn(std::size_t input_size, std::size_t hidden,
                            std::size_t output_size) {
    return hidden * hidden + hidden * input_size + output_size * hidden + hidden + output_size;
}

std::size_t param_count_lstm(std::size_t input_size, std::size_t cells,
                             std::size_t output_size) {
    return 4 * (cells * input_size + cells * cells + cells) + output_size * cells + output_size;
}

std::size_t param_count_cwrnn(const ClockSpec& spec, std::size_t input_size,
                              std::size_t output_size) {
    const std::size_t n = spec.total_size();
    return static_cast<std::size_t>(spec.recurrent_weight_count()) + n * input_size +
           output_size * n + n + output_size + spec.group_count();
}

}  // namespace cwrnn
