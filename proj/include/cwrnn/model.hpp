// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Model-agnostic surface shared by the clockwork network and the SRN/LSTM
// baselines so one training loop serves all three. Parameters are exposed
// as named flat blocks; gradients and optimizer velocity reuse the model
// shape, which keeps every block update a span-for-span walk.

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cwrnn/numerics.hpp"

namespace cwrnn {

enum class OutputActivation {
    Identity,  // linear readout, paired with squared-error losses
    Softmax,   // probability readout, paired with cross-entropy
};

// Per-model BPTT storage; concrete models define what they record.
struct Tape {
    virtual ~Tape() = default;
};

struct NamedBlock {
    std::string name;
    std::span<double> data;
    // Matrix blocks carry rows x cols; plain vectors have cols == 0.
    std::size_t rows = 0;
    std::size_t cols = 0;
};

class SequenceModel {
public:
    virtual ~SequenceModel() = default;

    virtual std::string kind() const = 0;
    virtual std::size_t input_size() const = 0;
    virtual std::size_t output_size() const = 0;
    virtual std::size_t hidden_size() const = 0;
    virtual OutputActivation output_activation() const = 0;

    // Total parameter count under the budget-table convention (includes the
    // clock periods for the clockwork model).
    virtual std::size_t param_count() const = 0;

    // Mutable views over every trainable value, in a fixed documented order.
    virtual std::vector<NamedBlock> param_blocks() = 0;

    virtual std::unique_ptr<SequenceModel> clone() const = 0;

    // Same shapes, all trainable values zero; used for gradients and velocity.
    virtual std::unique_ptr<SequenceModel> zeros_like() const = 0;

    // Runs the sequence from the zero initial state. When tape is non-null
    // it is filled with everything the backward pass needs. Output MAC
    // counts are accumulated into ops when non-null.
    virtual std::vector<Vector> forward(std::span<const Vector> inputs,
                                        Tape* tape = nullptr,
                                        OpCount* ops = nullptr) const = 0;

    virtual std::unique_ptr<Tape> make_tape() const = 0;

    // Accumulates dL/dparam into grads given dL/d(output pre-activation)
    // per step. grads must come from zeros_like() of a same-shape model.
    virtual void accumulate_grads(const Tape& tape,
                                  std::span<const Vector> output_grads,
                                  SequenceModel& grads) const = 0;
};

// Block arithmetic helpers shared by the optimizer and training loops.
void copy_params(SequenceModel& dst, SequenceModel& src);
void axpy_params(SequenceModel& dst, double alpha, SequenceModel& src);  // dst += alpha * src
void zero_params(SequenceModel& m);

// Applies the output nonlinearity to a pre-activation vector.
Vector apply_output_activation(OutputActivation act, const Vector& z);

}  // namespace cwrnn
