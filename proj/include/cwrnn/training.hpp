// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Losses, Nesterov-momentum SGD, and the two task protocols: sequence
// generation (memorize a target signal with an input-free network) and
// sequence classification (softmax readout, noisy inputs during training,
// early stopping on the noise-free training loss).

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cwrnn/model.hpp"
#include "cwrnn/numerics.hpp"
#include "cwrnn/rng.hpp"

namespace cwrnn {

enum class Readout {
    FinalStep,      // classify from the softmax output at the last timestep
    MeanOverSteps,  // average per-step log-probabilities over the sequence
};

struct TrainConfig {
    double learning_rate = 3e-4;
    double momentum = 0.9;
    std::size_t epochs = 100;
    double noise_std = 0.0;   // stddev of Gaussian input noise during training
    std::size_t patience = 5; // consecutive non-improving epochs before stopping
    std::uint64_t seed = 1;
    Readout readout = Readout::FinalStep;
    double grad_clip = 0.0;   // global-norm clip; 0 disables

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> noise_free_loss;
    std::optional<double> task_metric;  // NMSE (generation) or test error (classification)
};

struct Metrics {
    std::vector<EpochStats> epochs;
    double final_metric = 0.0;
};

// Streams per-epoch rows to a CSV with the frozen schema
//   epoch,train_loss,noise_free_loss,test_metric
// leaving cells empty where a column does not apply. Reals are printed
// with 17 significant digits so reruns are byte-identical.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& path);
    void write(const EpochStats& row);

private:
    std::ofstream out_;
};

// Sum-of-squares objective over a sequence: 1/2 sum_t |y_t - d_t|^2 with
// per-step gradient y_t - d_t. Summing rather than averaging over steps
// keeps the gradient scale independent of sequence length, which the
// per-sequence SGD protocols assume.
std::pair<double, std::vector<Vector>> squared_error_loss(std::span<const Vector> outputs,
                                                          std::span<const Vector> targets);

// Multinomial cross-entropy of a softmax output sequence against one class
// index. The returned gradients are with respect to the softmax
// pre-activations: p - onehot at the step(s) the readout uses, zero
// elsewhere.
std::pair<double, std::vector<Vector>> xent_loss(std::span<const Vector> softmax_outputs,
                                                 std::size_t target_class, Readout readout);

// Mean squared error divided by the population variance of the target, so
// predicting the target mean scores exactly 1.
double nmse(std::span<const Vector> predicted, std::span<const Vector> target);

// One lookahead-form Nesterov update: v <- mu*v - lr*g, p <- p + v. The
// gradient must have been evaluated at p + mu*v by the caller.
void nesterov_step(std::span<double> params, std::span<double> velocity,
                   std::span<const double> grads, double lr, double mu);
void nesterov_step(SequenceModel& params, SequenceModel& velocity, SequenceModel& grads,
                   double lr, double mu);

struct LabeledSequence {
    std::vector<Vector> frames;
    std::size_t label = 0;
};

struct ClassDataset {
    std::vector<LabeledSequence> train;
    std::vector<LabeledSequence> test;
    std::size_t class_count = 0;
};

// Trains an input-free model to reproduce target (one update per epoch,
// full-sequence BPTT). Returns per-epoch stats with the NMSE of the
// updated model as the task metric.
Metrics train_generation(SequenceModel& model, const std::vector<Vector>& target,
                         const TrainConfig& cfg, MetricsWriter* csv = nullptr);

// Per-sequence SGD with Gaussian input noise; stops when the noise-free
// training loss has not improved for cfg.patience consecutive epochs
// (at least one). The task metric is the test error rate.
Metrics train_classification(SequenceModel& model, const ClassDataset& data,
                             const TrainConfig& cfg, MetricsWriter* csv = nullptr);

std::size_t classify(const SequenceModel& model, const std::vector<Vector>& frames,
                     Readout readout);
double classification_error(const SequenceModel& model, std::span<const LabeledSequence> set,
                            Readout readout);

}  // namespace cwrnn
