// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <string>

#include "cwrnn/baselines.hpp"

namespace cwrnn {

LstmParams init_lstm_params(std::size_t cells, std::size_t input_size, std::size_t output_size,
                            Rng& rng, double stddev, double forget_bias) {
    if (stddev <= 0.0) {
        throw std::invalid_argument("init_lstm_params: stddev must be positive");
    }
    LstmParams p{Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, 0.0),
                 Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, forget_bias),
                 Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, 0.0),
                 Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, 0.0),
                 Matrix(output_size, cells), Vector(output_size, 0.0)};
    for (Matrix* m : {&p.w_xi, &p.w_hi, &p.w_xf, &p.w_hf, &p.w_xz, &p.w_hz, &p.w_xo, &p.w_ho,
                      &p.w_out}) {
        for (double& w : m->values()) {
            w = rng.gaussian(0.0, stddev);
        }
    }
    return p;
}

void LstmTape::clear() {
    initial_h.clear();
    initial_c.clear();
    inputs.clear();
    gate_i.clear();
    gate_f.clear();
    gate_z.clear();
    gate_o.clear();
    cell.clear();
    cell_tanh.clear();
    hidden.clear();
}

Vector lstm_forward_step(const LstmParams& params, LstmState& state, const Vector& x,
                         OutputActivation act, LstmTape* tape) {
    const std::size_t c = params.cell_size();
    if (x.size() != params.input_size()) {
        throw std::invalid_argument("lstm_forward_step: input has " + std::to_string(x.size()) +
                                    " entries, expected " + std::to_string(params.input_size()));
    }
    if (state.h.size() != c || state.c.size() != c) {
        throw std::invalid_argument("lstm_forward_step: state size mismatch");
    }

    const Vector h_prev = state.h;
    Vector gi(c), gf(c), gz(c), go(c), tc(c);
    for (std::size_t u = 0; u < c; ++u) {
        const double ai = row_dot(params.w_xi, u, x, 0, x.size()) +
                          row_dot(params.w_hi, u, h_prev, 0, c) + params.b_i[u];
        const double af = row_dot(params.w_xf, u, x, 0, x.size()) +
                          row_dot(params.w_hf, u, h_prev, 0, c) + params.b_f[u];
        const double az = row_dot(params.w_xz, u, x, 0, x.size()) +
                          row_dot(params.w_hz, u, h_prev, 0, c) + params.b_z[u];
        const double ao = row_dot(params.w_xo, u, x, 0, x.size()) +
                          row_dot(params.w_ho, u, h_prev, 0, c) + params.b_o[u];
        gi[u] = sigmoid(ai);
        gf[u] = sigmoid(af);
        gz[u] = std::tanh(az);
        go[u] = sigmoid(ao);
        state.c[u] = gf[u] * state.c[u] + gi[u] * gz[u];
        tc[u] = std::tanh(state.c[u]);
        state.h[u] = go[u] * tc[u];
    }

    Vector z_out(params.output_size());
    for (std::size_t k = 0; k < z_out.size(); ++k) {
        z_out[k] = row_dot(params.w_out, k, state.h, 0, c) + params.b_out[k];
    }
    ++state.t;

    if (tape != nullptr) {
        tape->inputs.push_back(x);
        tape->gate_i.push_back(std::move(gi));
        tape->gate_f.push_back(std::move(gf));
        tape->gate_z.push_back(std::move(gz));
        tape->gate_o.push_back(std::move(go));
        tape->cell.push_back(state.c);
        tape->cell_tanh.push_back(std::move(tc));
        tape->hidden.push_back(state.h);
    }
    return apply_output_activation(act, z_out);
}

std::vector<Vector> lstm_forward(const LstmParams& params, std::span<const Vector> inputs,
                                 OutputActivation act, LstmTape* tape) {
    LstmState state(params.cell_size());
    if (tape != nullptr) {
        tape->clear();
        tape->initial_h = state.h;
        tape->initial_c = state.c;
    }
    std::vector<Vector> outputs;
    outputs.reserve(inputs.size());
    for (const Vector& x : inputs) {
        outputs.push_back(lstm_forward_step(params, state, x, act, tape));
    }
    return outputs;
}

void lstm_backward(const LstmParams& params, const LstmTape& tape,
                   std::span<const Vector> output_grads, LstmParams& grads) {
    const std::size_t c = params.cell_size();
    const std::size_t steps = tape.steps();
    if (output_grads.size() != steps) {
        throw std::invalid_argument("lstm_backward: tape/gradient length mismatch");
    }

    Vector dh(c, 0.0);
    Vector dc(c, 0.0);
    for (std::size_t s = steps; s-- > 0;) {
        const Vector& x = tape.inputs[s];
        const Vector& h = tape.hidden[s];
        const Vector& h_prev = s > 0 ? tape.hidden[s - 1] : tape.initial_h;
        const Vector& c_prev = s > 0 ? tape.cell[s - 1] : tape.initial_c;
        const Vector& gi = tape.gate_i[s];
        const Vector& gf = tape.gate_f[s];
        const Vector& gz = tape.gate_z[s];
        const Vector& go = tape.gate_o[s];
        const Vector& tc = tape.cell_tanh[s];
        const Vector& g_out = output_grads[s];

        for (std::size_t k = 0; k < g_out.size(); ++k) {
            const double gk = g_out[k];
            grads.b_out[k] += gk;
            for (std::size_t j = 0; j < c; ++j) {
                grads.w_out(k, j) += gk * h[j];
                dh[j] += params.w_out(k, j) * gk;
            }
        }

        Vector dh_prev(c, 0.0);
        for (std::size_t u = 0; u < c; ++u) {
            const double da_o = dh[u] * tc[u] * go[u] * (1.0 - go[u]);
            dc[u] += dh[u] * go[u] * (1.0 - tc[u] * tc[u]);
            const double da_f = dc[u] * c_prev[u] * gf[u] * (1.0 - gf[u]);
            const double da_i = dc[u] * gz[u] * gi[u] * (1.0 - gi[u]);
            const double da_z = dc[u] * gi[u] * (1.0 - gz[u] * gz[u]);

            grads.b_i[u] += da_i;
            grads.b_f[u] += da_f;
            grads.b_z[u] += da_z;
            grads.b_o[u] += da_o;
            for (std::size_t j = 0; j < x.size(); ++j) {
                grads.w_xi(u, j) += da_i * x[j];
                grads.w_xf(u, j) += da_f * x[j];
                grads.w_xz(u, j) += da_z * x[j];
                grads.w_xo(u, j) += da_o * x[j];
            }
            for (std::size_t j = 0; j < c; ++j) {
                grads.w_hi(u, j) += da_i * h_prev[j];
                grads.w_hf(u, j) += da_f * h_prev[j];
                grads.w_hz(u, j) += da_z * h_prev[j];
                grads.w_ho(u, j) += da_o * h_prev[j];
                dh_prev[j] += params.w_hi(u, j) * da_i + params.w_hf(u, j) * da_f +
                              params.w_hz(u, j) * da_z + params.w_ho(u, j) * da_o;
            }
            dc[u] *= gf[u];  // carried through the constant error carousel
        }
        dh = std::move(dh_prev);
    }
}

Lstm::Lstm(std::size_t cells, std::size_t input_size, std::size_t output_size,
           OutputActivation act)
    : params_{Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, 0.0),
              Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, 0.0),
              Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, 0.0),
              Matrix(cells, input_size), Matrix(cells, cells), Vector(cells, 0.0),
              Matrix(output_size, cells), Vector(output_size, 0.0)},
      act_(act) {}

Lstm::Lstm(LstmParams params, OutputActivation act) : params_(std::move(params)), act_(act) {}

std::size_t Lstm::param_count() const {
    return param_count_lstm(input_size(), hidden_size(), output_size());
}

std::vector<NamedBlock> Lstm::param_blocks() {
    const std::size_t c = hidden_size();
    const std::size_t m = input_size();
    const std::size_t o = output_size();
    return {
        {"w_xi", params_.w_xi.values(), c, m}, {"w_hi", params_.w_hi.values(), c, c},
        {"b_i", params_.b_i, c, 0},
        {"w_xf", params_.w_xf.values(), c, m}, {"w_hf", params_.w_hf.values(), c, c},
        {"b_f", params_.b_f, c, 0},
        {"w_xz", params_.w_xz.values(), c, m}, {"w_hz", params_.w_hz.values(), c, c},
        {"b_z", params_.b_z, c, 0},
        {"w_xo", params_.w_xo.values(), c, m}, {"w_ho", params_.w_ho.values(), c, c},
        {"b_o", params_.b_o, c, 0},
        {"w_out", params_.w_out.values(), o, c}, {"b_out", params_.b_out, o, 0},
    };
}

std::unique_ptr<SequenceModel> Lstm::clone() const {
    return std::make_unique<Lstm>(*this);
}

std::unique_ptr<SequenceModel> Lstm::zeros_like() const {
    return std::make_unique<Lstm>(hidden_size(), input_size(), output_size(), act_);
}

std::vector<Vector> Lstm::forward(std::span<const Vector> inputs, Tape* tape,
                                  OpCount* ops) const {
    auto* t = dynamic_cast<LstmTape*>(tape);
    if (tape != nullptr && t == nullptr) {
        throw std::invalid_argument("Lstm::forward: tape of wrong model kind");
    }
    if (ops != nullptr) {
        const std::size_t c = hidden_size();
        ops->recurrent += inputs.size() * 4 * c * c;
        ops->input += inputs.size() * 4 * c * input_size();
        ops->output += inputs.size() * output_size() * c;
    }
    return lstm_forward(params_, inputs, act_, t);
}

std::unique_ptr<Tape> Lstm::make_tape() const {
    return std::make_unique<LstmTape>();
}

void Lstm::accumulate_grads(const Tape& tape, std::span<const Vector> output_grads,
                            SequenceModel& grads) const {
    const auto& t = dynamic_cast<const LstmTape&>(tape);
    auto& g = dynamic_cast<Lstm&>(grads);
    lstm_backward(params_, t, output_grads, g.params_);
}

}  // namespace cwrnn
