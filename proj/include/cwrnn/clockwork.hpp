// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Clockwork RNN: the hidden layer is split into modules, each with an
// integer clock period. At step t only modules whose period divides t
// recompute their activations; the rest retain their previous output.
// Modules are sorted by increasing period and a module only receives
// recurrent input from modules at the same or slower rate, which makes
// the recurrent matrix block-upper triangular under the partition.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cwrnn/model.hpp"
#include "cwrnn/numerics.hpp"
#include "cwrnn/rng.hpp"

namespace cwrnn {

class ClockSpec {
public:
    // sizes[i] >= 1 hidden units in module i; periods strictly increasing.
    ClockSpec(std::vector<std::size_t> sizes, std::vector<std::uint64_t> periods);

    // g modules with periods 1, 2, 4, ..., 2^(g-1). When hidden is not a
    // multiple of g the remainder is spread one extra unit per module
    // starting from the fastest.
    static ClockSpec exponential(std::size_t hidden, std::size_t groups);

    std::size_t group_count() const { return sizes_.size(); }
    std::size_t total_size() const { return total_; }
    std::size_t size(std::size_t group) const { return sizes_[group]; }
    std::uint64_t period(std::size_t group) const { return periods_[group]; }
    std::size_t offset(std::size_t group) const { return offsets_[group]; }

    const std::vector<std::size_t>& sizes() const { return sizes_; }
    const std::vector<std::uint64_t>& periods() const { return periods_; }

    // Exact number of structurally nonzero entries of the recurrent matrix,
    // by block enumeration: module i connects to columns offset(i)..n-1.
    std::uint64_t recurrent_weight_count() const;

    friend bool operator==(const ClockSpec&, const ClockSpec&) = default;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::uint64_t> periods_;
    std::vector<std::size_t> offsets_;
    std::size_t total_ = 0;
};

// 1-based indices of the modules executed at timestep t >= 1, ascending:
// exactly { i : t mod T_i == 0 }.
std::vector<std::size_t> active_modules(const ClockSpec& spec, std::uint64_t t);

struct CwRnnParams {
    ClockSpec spec;
    Matrix w_in;   // n x m
    Matrix w_rec;  // n x n, block-upper triangular under spec
    Matrix w_out;  // o x n
    Vector b_h;    // n
    Vector b_out;  // o

    std::size_t input_size() const { return w_in.cols(); }
    std::size_t output_size() const { return w_out.rows(); }
    std::size_t hidden_size() const { return spec.total_size(); }
};

// Nonzero blocks drawn from N(0, std^2) in a documented order (recurrent,
// then input, then output weights, each row-major over allowed columns);
// structurally zero blocks stay exactly zero and biases start at zero.
CwRnnParams init_cwrnn_params(const ClockSpec& spec, std::size_t input_size,
                              std::size_t output_size, Rng& rng, double stddev);

// True iff every structurally-zero entry of w_rec is exactly 0.0.
bool zero_blocks_intact(const CwRnnParams& params);

struct NetState {
    Vector hidden;        // n entries, initially all zero
    std::uint64_t t = 1;  // timestep about to be computed; first step is t=1

    explicit NetState(std::size_t n) : hidden(n, 0.0) {}
};

struct CwRnnTape final : Tape {
    Vector initial_hidden;
    std::vector<Vector> inputs;
    std::vector<Vector> hidden;                      // state after each step
    std::vector<std::vector<std::size_t>> executed;  // active module ids per step

    std::size_t steps() const { return hidden.size(); }
    void clear();
};

// One update of Eq-style dynamics: executed modules i recompute
//   y[u] = tanh( W_rec[u, offset(i):n) . y_prev + W_in[u, :] . x + b_h[u] )
// from the previous state, other modules keep their values, and the output
// y_out = f_out(W_out . y + b_out) is evaluated every step from the full
// (partly retained) hidden vector. Advances state.t.
Vector cwrnn_forward_step(const CwRnnParams& params, NetState& state, const Vector& x,
                          OutputActivation act, OpCount* ops = nullptr);

// Runs all inputs from the zero state at t=1; records a tape when given.
std::vector<Vector> cwrnn_forward(const CwRnnParams& params, std::span<const Vector> inputs,
                                  OutputActivation act, CwRnnTape* tape = nullptr,
                                  OpCount* ops = nullptr);

// Masked BPTT. output_grads[t] is dL/d(output pre-activation) at step t.
// Error flows through tanh only for modules executed at t; error on idle
// modules is carried to step t-1 unchanged and added there. Gradients are
// accumulated into grads, whose structurally-zero blocks are never touched.
void cwrnn_backward(const CwRnnParams& params, const CwRnnTape& tape,
                    std::span<const Vector> output_grads, CwRnnParams& grads);

class CwRnn final : public SequenceModel {
public:
    CwRnn(ClockSpec spec, std::size_t input_size, std::size_t output_size,
          OutputActivation act);
    CwRnn(CwRnnParams params, OutputActivation act);

    CwRnnParams& params() { return params_; }
    const CwRnnParams& params() const { return params_; }

    std::string kind() const override { return "cwrnn"; }
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
    CwRnnParams params_;
    OutputActivation act_;
};

}  // namespace cwrnn
