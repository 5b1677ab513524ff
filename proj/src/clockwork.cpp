// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/clockwork.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cwrnn {

ClockSpec::ClockSpec(std::vector<std::size_t> sizes, std::vector<std::uint64_t> periods)
    : sizes_(std::move(sizes)), periods_(std::move(periods)) {
    if (sizes_.empty() || sizes_.size() != periods_.size()) {
        throw std::invalid_argument("ClockSpec: need one size per period, at least one module");
    }
    offsets_.resize(sizes_.size());
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] == 0) {
            throw std::invalid_argument("ClockSpec: module sizes must be >= 1");
        }
        if (periods_[i] == 0 || (i > 0 && periods_[i] <= periods_[i - 1])) {
            throw std::invalid_argument("ClockSpec: periods must be positive and strictly increasing");
        }
        offsets_[i] = total_;
        total_ += sizes_[i];
    }
}

ClockSpec ClockSpec::exponential(std::size_t hidden, std::size_t groups) {
    if (groups == 0 || hidden < groups) {
        throw std::invalid_argument("ClockSpec::exponential: need 1 <= groups <= hidden");
    }
    if (groups > 63) {
        throw std::invalid_argument("ClockSpec::exponential: too many groups for 2^(g-1) periods");
    }
    std::vector<std::size_t> sizes(groups, hidden / groups);
    for (std::size_t i = 0; i < hidden % groups; ++i) {
        ++sizes[i];
    }
    std::vector<std::uint64_t> periods(groups);
    for (std::size_t i = 0; i < groups; ++i) {
        periods[i] = std::uint64_t{1} << i;
    }
    return ClockSpec(std::move(sizes), std::move(periods));
}

std::uint64_t ClockSpec::recurrent_weight_count() const {
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < group_count(); ++i) {
        count += static_cast<std::uint64_t>(sizes_[i]) * (total_ - offsets_[i]);
    }
    return count;
}

std::vector<std::size_t> active_modules(const ClockSpec& spec, std::uint64_t t) {
    if (t == 0) {
        throw std::invalid_argument("active_modules: timesteps start at 1");
    }
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < spec.group_count(); ++i) {
        if (t % spec.period(i) == 0) {
            active.push_back(i + 1);
        }
    }
    return active;
}

CwRnnParams init_cwrnn_params(const ClockSpec& spec, std::size_t input_size,
                              std::size_t output_size, Rng& rng, double stddev) {
    if (stddev <= 0.0) {
        throw std::invalid_argument("init_cwrnn_params: stddev must be positive");
    }
    const std::size_t n = spec.total_size();
    CwRnnParams p{spec, Matrix(n, input_size), Matrix(n, n), Matrix(output_size, n),
                  Vector(n, 0.0), Vector(output_size, 0.0)};
    for (std::size_t g = 0; g < spec.group_count(); ++g) {
        for (std::size_t u = spec.offset(g); u < spec.offset(g) + spec.size(g); ++u) {
            for (std::size_t v = spec.offset(g); v < n; ++v) {
                p.w_rec(u, v) = rng.gaussian(0.0, stddev);
            }
        }
    }
    for (double& w : p.w_in.values()) {
        w = rng.gaussian(0.0, stddev);
    }
    for (double& w : p.w_out.values()) {
        w = rng.gaussian(0.0, stddev);
    }
    return p;
}

bool zero_blocks_intact(const CwRnnParams& params) {
    const auto& spec = params.spec;
    for (std::size_t g = 1; g < spec.group_count(); ++g) {
        for (std::size_t u = spec.offset(g); u < spec.offset(g) + spec.size(g); ++u) {
            for (std::size_t v = 0; v < spec.offset(g); ++v) {
                if (params.w_rec(u, v) != 0.0) {
                    return false;
                }
            }
        }
    }
    return true;
}

void CwRnnTape::clear() {
    initial_hidden.clear();
    inputs.clear();
    hidden.clear();
    executed.clear();
}

Vector cwrnn_forward_step(const CwRnnParams& params, NetState& state, const Vector& x,
                          OutputActivation act, OpCount* ops) {
    const auto& spec = params.spec;
    const std::size_t n = spec.total_size();
    if (x.size() != params.input_size()) {
        throw std::invalid_argument("cwrnn_forward_step: input has " + std::to_string(x.size()) +
                                    " entries, expected " + std::to_string(params.input_size()));
    }
    if (state.hidden.size() != n || state.t == 0) {
        throw std::invalid_argument("cwrnn_forward_step: state does not match the clock spec");
    }

    std::uint64_t* rec_macs = ops != nullptr ? &ops->recurrent : nullptr;
    std::uint64_t* in_macs = ops != nullptr ? &ops->input : nullptr;
    std::uint64_t* out_macs = ops != nullptr ? &ops->output : nullptr;

    // All executed modules read the state from step t-1, so the new values
    // are written to a copy while dot products run over the old vector.
    const Vector prev = state.hidden;
    for (std::size_t g = 0; g < spec.group_count(); ++g) {
        if (state.t % spec.period(g) != 0) {
            continue;  // idle module: retains its previous output
        }
        const std::size_t col_begin = spec.offset(g);
        for (std::size_t u = col_begin; u < col_begin + spec.size(g); ++u) {
            const double z = row_dot(params.w_rec, u, prev, col_begin, n, rec_macs) +
                             row_dot(params.w_in, u, x, 0, x.size(), in_macs) + params.b_h[u];
            state.hidden[u] = std::tanh(z);
        }
    }

    Vector z_out(params.output_size());
    for (std::size_t k = 0; k < z_out.size(); ++k) {
        z_out[k] = row_dot(params.w_out, k, state.hidden, 0, n, out_macs) + params.b_out[k];
    }
    ++state.t;
    return apply_output_activation(act, z_out);
}

std::vector<Vector> cwrnn_forward(const CwRnnParams& params, std::span<const Vector> inputs,
                                  OutputActivation act, CwRnnTape* tape, OpCount* ops) {
    NetState state(params.hidden_size());
    std::vector<Vector> outputs;
    outputs.reserve(inputs.size());
    if (tape != nullptr) {
        tape->clear();
        tape->initial_hidden = state.hidden;
    }
    for (const Vector& x : inputs) {
        const std::uint64_t t = state.t;
        outputs.push_back(cwrnn_forward_step(params, state, x, act, ops));
        if (tape != nullptr) {
            tape->inputs.push_back(x);
            tape->hidden.push_back(state.hidden);
            tape->executed.push_back(active_modules(params.spec, t));
        }
    }
    return outputs;
}

void cwrnn_backward(const CwRnnParams& params, const CwRnnTape& tape,
                    std::span<const Vector> output_grads, CwRnnParams& grads) {
    const auto& spec = params.spec;
    const std::size_t n = spec.total_size();
    const std::size_t steps = tape.steps();
    if (output_grads.size() != steps) {
        throw std::invalid_argument("cwrnn_backward: tape has " + std::to_string(steps) +
                                    " steps but got " + std::to_string(output_grads.size()) +
                                    " output gradients");
    }

    Vector err(n, 0.0);  // dL/dy at the step being processed
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

        Vector prev_err(n, 0.0);  // dL/dy at step t-1
        std::vector<bool> is_active(n, false);
        for (std::size_t id : tape.executed[s]) {
            const std::size_t g = id - 1;
            const std::size_t col_begin = spec.offset(g);
            for (std::size_t u = col_begin; u < col_begin + spec.size(g); ++u) {
                is_active[u] = true;
                const double dz = err[u] * (1.0 - y[u] * y[u]);
                grads.b_h[u] += dz;
                for (std::size_t j = col_begin; j < n; ++j) {
                    grads.w_rec(u, j) += dz * y_prev[j];
                    prev_err[j] += params.w_rec(u, j) * dz;
                }
                for (std::size_t j = 0; j < x.size(); ++j) {
                    grads.w_in(u, j) += dz * x[j];
                }
            }
        }
        // Idle modules copied their state forward, so their error is
        // carried back unchanged and added to whatever flowed in above.
        for (std::size_t u = 0; u < n; ++u) {
            if (!is_active[u]) {
                prev_err[u] += err[u];
            }
        }
        err = std::move(prev_err);
    }
}

CwRnn::CwRnn(ClockSpec spec, std::size_t input_size, std::size_t output_size,
             OutputActivation act)
    : params_{std::move(spec), Matrix(0, 0), Matrix(0, 0), Matrix(0, 0), {}, {}}, act_(act) {
    const std::size_t n = params_.spec.total_size();
    params_.w_in = Matrix(n, input_size);
    params_.w_rec = Matrix(n, n);
    params_.w_out = Matrix(output_size, n);
    params_.b_h = Vector(n, 0.0);
    params_.b_out = Vector(output_size, 0.0);
}

CwRnn::CwRnn(CwRnnParams params, OutputActivation act)
    : params_(std::move(params)), act_(act) {}

std::size_t CwRnn::param_count() const {
    const std::size_t n = hidden_size();
    // Clock periods are counted as parameters alongside weights and biases.
    return params_.spec.recurrent_weight_count() + n * input_size() + output_size() * n + n +
           output_size() + params_.spec.group_count();
}

std::vector<NamedBlock> CwRnn::param_blocks() {
    const std::size_t n = hidden_size();
    return {
        {"w_in", params_.w_in.values(), n, input_size()},
        {"w_rec", params_.w_rec.values(), n, n},
        {"w_out", params_.w_out.values(), output_size(), n},
        {"b_h", params_.b_h, n, 0},
        {"b_out", params_.b_out, output_size(), 0},
    };
}

std::unique_ptr<SequenceModel> CwRnn::clone() const {
    return std::make_unique<CwRnn>(*this);
}

std::unique_ptr<SequenceModel> CwRnn::zeros_like() const {
    return std::make_unique<CwRnn>(params_.spec, input_size(), output_size(), act_);
}

std::vector<Vector> CwRnn::forward(std::span<const Vector> inputs, Tape* tape,
                                   OpCount* ops) const {
    auto* t = dynamic_cast<CwRnnTape*>(tape);
    if (tape != nullptr && t == nullptr) {
        throw std::invalid_argument("CwRnn::forward: tape of wrong model kind");
    }
    return cwrnn_forward(params_, inputs, act_, t, ops);
}

std::unique_ptr<Tape> CwRnn::make_tape() const {
    return std::make_unique<CwRnnTape>();
}

void CwRnn::accumulate_grads(const Tape& tape, std::span<const Vector> output_grads,
                             SequenceModel& grads) const {
    const auto& t = dynamic_cast<const CwRnnTape&>(tape);
    auto& g = dynamic_cast<CwRnn&>(grads);
    cwrnn_backward(params_, t, output_grads, g.params_);
}

}  // namespace cwrnn
