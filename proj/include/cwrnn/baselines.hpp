// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference models for head-to-head comparisons at matched parameter
// budgets: an Elman-style simple recurrent network (the one-module,
// period-1 degenerate case of the clockwork model) and an LSTM with
// input/forget/output gates, no peephole connections, tanh cell input
// and output nonlinearities and logistic gates.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cwrnn/clockwork.hpp"
#include "cwrnn/model.hpp"
#include "cwrnn/numerics.hpp"
#include "cwrnn/rng.hpp"

namespace cwrnn {

// ---------------------------------------------------------------------------
// Simple recurrent network
// ---------------------------------------------------------------------------

struct SrnParams {
    Matrix w_in;   // n x m
    Matrix w_rec;  // n x n, dense
    Matrix w_out;  // o x n
    Vector b_h;    // n
    Vector b_out;  // o

    std::size_t input_size() const { return w_in.cols(); }
    std::size_t output_size() const { return w_out.rows(); }
    std::size_t hidden_size() const { return w_rec.rows(); }
};

SrnParams init_srn_params(std::size_t hidden, std::size_t input_size, std::size_t output_size,
                          Rng& rng, double stddev);

struct SrnTape final : Tape {
    Vector initial_hidden;
    std::vector<Vector> inputs;
    std::vector<Vector> hidden;

    std::size_t steps() const { return hidden.size(); }
    void clear();
};

Vector srn_forward_step(const SrnParams& params, NetState& state, const Vector& x,
                        OutputActivation act);
std::vector<Vector> srn_forward(const SrnParams& params, std::span<const Vector> inputs,
                                OutputActivation act, SrnTape* tape = nullptr);
void srn_backward(const SrnParams& params, const SrnTape& tape,
                  std::span<const Vector> output_grads, SrnParams& grads);

class Srn final : public SequenceModel {
public:
    Srn(std::size_t hidden, std::size_t input_size, std::size_t output_size,
        OutputActivation act);
    Srn(SrnParams params, OutputActivation act);

    SrnParams& params() { return params_; }
    const SrnParams& params() const { return params_; }

    std::string kind() const override { return "srn"; }
    std::size_t input_size() const override { return params_.input_size(); }
    std::size_t output_size() const override { return params_.output_size(); }
    std::size_t hidden_size() const override { return params_.hidden_size(); }
    OutputActivation output_activation() const override { return act_; }
    std::size_t param_count() const override;
    std::vector<NamedBlock> param_blocks() override;
    std::unique_ptr<SequenceModel> clone() const override;
    std::unique_ptr<SequenceModel> zeros_like() const override;
    std::vector<Vector> forward(std::span<const Vector> inputs, Tape* tape = nullptr,
                                OpCount* ops = nullptr) const override;
    std::unique_ptr<Tape> make_tape() const override;
    void accumulate_grads(const Tape& tape, std::span<const Vector> output_grads,
                          SequenceModel& grads) const override;

private:
    SrnParams params_;
    OutputActivation act_;
};

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

struct LstmParams {
    // Gate order: input gate (i), forget gate (f), cell candidate (z),
    // output gate (o). w_x* are c x m, w_h* are c x c, biases length c.
    Matrix w_xi, w_hi;
    Vector b_i;
    Matrix w_xf, w_hf;
    Vector b_f;
    Matrix w_xz, w_hz;
    Vector b_z;
    Matrix w_xo, w_ho;
    Vector b_o;
    Matrix w_out;  // o x c
    Vector b_out;  // o

    std::size_t input_size() const { return w_xi.cols(); }
    std::size_t output_size() const { return w_out.rows(); }
    std::size_t cell_size() const { return w_hi.rows(); }
};

// Weights ~ N(0, std^2); biases zero except the forget-gate bias, which is
// set to forget_bias to keep the cells remembering early in training.
LstmParams init_lstm_params(std::size_t cells, std::size_t input_size, std::size_t output_size,
                            Rng& rng, double stddev, double forget_bias);

struct LstmState {
    Vector h;  // hidden output
    Vector c;  // cell state
    std::uint64_t t = 1;

    explicit LstmState(std::size_t cells) : h(cells, 0.0), c(cells, 0.0) {}
};

struct LstmTape final : Tape {
    Vector initial_h, initial_c;
    std::vector<Vector> inputs;
    // Per-step gate activations and states needed by the backward pass.
    std::vector<Vector> gate_i, gate_f, gate_z, gate_o;
    std::vector<Vector> cell, cell_tanh, hidden;

    std::size_t steps() const { return hidden.size(); }
    void clear();
};

Vector lstm_forward_step(const LstmParams& params, LstmState& state, const Vector& x,
                         OutputActivation act, LstmTape* tape = nullptr);
std::vector<Vector> lstm_forward(const LstmParams& params, std::span<const Vector> inputs,
                                 OutputActivation act, LstmTape* tape = nullptr);
void lstm_backward(const LstmParams& params, const LstmTape& tape,
                   std::span<const Vector> output_grads, LstmParams& grads);

class Lstm final : public SequenceModel {
public:
    Lstm(std::size_t cells, std::size_t input_size, std::size_t output_size,
         OutputActivation act);
    Lstm(LstmParams params, OutputActivation act);

    LstmParams& params() { return params_; }
    const LstmParams& params() const { return params_; }

    std::string kind() const override { return "lstm"; }
    std::size_t input_size() const override { return params_.input_size(); }
    std::size_t output_size() const override { return params_.output_size(); }
    std::size_t hidden_size() const override { return params_.cell_size(); }
    OutputActivation output_activation() const override { return act_; }
    std::size_t param_count() const override;
    std::vector<NamedBlock> param_blocks() override;
    std::unique_ptr<SequenceModel> clone() const override;
    std::unique_ptr<SequenceModel> zeros_like() const override;
    std::vector<Vector> forward(std::span<const Vector> inputs, Tape* tape = nullptr,
                                OpCount* ops = nullptr) const override;
    std::unique_ptr<Tape> make_tape() const override;
    void accumulate_grads(const Tape& tape, std::span<const Vector> output_grads,
                          SequenceModel& grads) const override;

private:
    LstmParams params_;
    OutputActivation act_;
};

// ---------------------------------------------------------------------------
// Parameter accounting (budget-table convention: biases included, no
// peepholes, clock periods counted for the clockwork model)
// ---------------------------------------------------------------------------

std::size_t param_count_srn(std::size_t input_size, std::size_t hidden, std::size_t output_size);
std::size_t param_count_lstm(std::size_t input_size, std::size_t cells, std::size_t output_size);
std::size_t param_count_cwrnn(const ClockSpec& spec, std::size_t input_size,
                              std::size_t output_size);

}  // namespace cwrnn
