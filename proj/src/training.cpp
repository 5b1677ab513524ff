// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cwrnn {

namespace {

double global_norm(SequenceModel& grads) {
    double sq = 0.0;
    for (const auto& block : grads.param_blocks()) {
        for (double g : block.data) {
            sq += g * g;
        }
    }
    return std::sqrt(sq);
}

void scale_params(SequenceModel& m, double factor) {
    for (auto& block : m.param_blocks()) {
        for (double& g : block.data) {
            g *= factor;
        }
    }
}

void maybe_clip(SequenceModel& grads, double clip) {
    if (clip <= 0.0) {
        return;
    }
    const double norm = global_norm(grads);
    if (norm > clip) {
        scale_params(grads, clip / norm);
    }
}

std::vector<Vector> add_input_noise(const std::vector<Vector>& frames, double std, Rng& rng) {
    std::vector<Vector> noisy = frames;
    for (auto& frame : noisy) {
        for (double& v : frame) {
            v += rng.gaussian(0.0, std);
        }
    }
    return noisy;
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) {
        throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    }
    if (momentum < 0.0 || momentum >= 1.0) {
        throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
    }
    if (noise_std < 0.0) {
        throw std::invalid_argument("TrainConfig: noise_std must be non-negative");
    }
    if (epochs == 0) {
        throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    }
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) {
        throw std::runtime_error("cannot open metrics file " + path.string());
    }
    out_ << "epoch,train_loss,noise_free_loss,test_metric\n";
}

void MetricsWriter::write(const EpochStats& row) {
    out_ << row.epoch << ',' << format_real(row.train_loss) << ',';
    if (row.noise_free_loss) {
        out_ << format_real(*row.noise_free_loss);
    }
    out_ << ',';
    if (row.task_metric) {
        out_ << format_real(*row.task_metric);
    }
    out_ << '\n';
    out_.flush();
}

std::pair<double, std::vector<Vector>> squared_error_loss(std::span<const Vector> outputs,
                                                          std::span<const Vector> targets) {
    if (outputs.size() != targets.size()) {
        throw std::invalid_argument("squared_error_loss: length mismatch");
    }
    double loss = 0.0;
    std::vector<Vector> grads(outputs.size());
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        if (outputs[t].size() != targets[t].size()) {
            throw std::invalid_argument("squared_error_loss: channel mismatch at step " +
                                        std::to_string(t));
        }
        grads[t].resize(outputs[t].size());
        for (std::size_t k = 0; k < outputs[t].size(); ++k) {
            const double diff = outputs[t][k] - targets[t][k];
            loss += 0.5 * diff * diff;
            grads[t][k] = diff;
        }
    }
    return {loss, std::move(grads)};
}

std::pair<double, std::vector<Vector>> xent_loss(std::span<const Vector> softmax_outputs,
                                                 std::size_t target_class, Readout readout) {
    if (softmax_outputs.empty()) {
        throw std::invalid_argument("xent_loss: empty output sequence");
    }
    const std::size_t classes = softmax_outputs.front().size();
    if (target_class >= classes) {
        throw std::invalid_argument("xent_loss: class index " + std::to_string(target_class) +
                                    " out of range for " + std::to_string(classes) + " classes");
    }
    const std::size_t steps = softmax_outputs.size();
    std::vector<Vector> grads(steps);
    double loss = 0.0;
    if (readout == Readout::FinalStep) {
        for (std::size_t t = 0; t + 1 < steps; ++t) {
            grads[t].assign(classes, 0.0);
        }
        const Vector& p = softmax_outputs.back();
        loss = -std::log(p[target_class]);
        grads[steps - 1] = p;
        grads[steps - 1][target_class] -= 1.0;
    } else {
        const double w = 1.0 / static_cast<double>(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            const Vector& p = softmax_outputs[t];
            loss += -std::log(p[target_class]) * w;
            grads[t] = p;
            grads[t][target_class] -= 1.0;
            for (double& g : grads[t]) {
                g *= w;
            }
        }
    }
    return {loss, std::move(grads)};
}

double nmse(std::span<const Vector> predicted, std::span<const Vector> target) {
    if (predicted.size() != target.size() || target.size() < 2) {
        throw std::invalid_argument("nmse: sequences must have equal length >= 2");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (const Vector& frame : target) {
        for (double v : frame) {
            sum += v;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    double var = 0.0;
    double mse = 0.0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        if (predicted[t].size() != target[t].size()) {
            throw std::invalid_argument("nmse: channel mismatch at step " + std::to_string(t));
        }
        for (std::size_t k = 0; k < target[t].size(); ++k) {
            const double d = target[t][k] - mean;
            var += d * d;
            const double e = predicted[t][k] - target[t][k];
            mse += e * e;
        }
    }
    if (var == 0.0) {
        throw std::invalid_argument("nmse: target has zero variance");
    }
    return mse / var;
}

void nesterov_step(std::span<double> params, std::span<double> velocity,
                   std::span<const double> grads, double lr, double mu) {
    if (params.size() != velocity.size() || params.size() != grads.size()) {
        throw std::invalid_argument("nesterov_step: shape mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = mu * velocity[i] - lr * grads[i];
        params[i] += velocity[i];
    }
}

void nesterov_step(SequenceModel& params, SequenceModel& velocity, SequenceModel& grads,
                   double lr, double mu) {
    auto p = params.param_blocks();
    auto v = velocity.param_blocks();
    auto g = grads.param_blocks();
    if (p.size() != v.size() || p.size() != g.size()) {
        throw std::invalid_argument("nesterov_step: model shape mismatch");
    }
    for (std::size_t b = 0; b < p.size(); ++b) {
        nesterov_step(p[b].data, v[b].data, g[b].data, lr, mu);
    }
}

Metrics train_generation(SequenceModel& model, const std::vector<Vector>& target,
                         const TrainConfig& cfg, MetricsWriter* csv) {
    cfg.validate();
    if (model.input_size() != 0) {
        throw std::invalid_argument("train_generation: model must take no input");
    }
    if (target.size() < 2) {
        throw std::invalid_argument("train_generation: target sequence too short");
    }
    const std::vector<Vector> inputs(target.size(), Vector{});

    auto velocity = model.zeros_like();
    auto grads = model.zeros_like();
    auto lookahead = model.clone();
    auto tape = model.make_tape();

    Metrics metrics;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        copy_params(*lookahead, model);
        axpy_params(*lookahead, cfg.momentum, *velocity);
        const auto outputs = lookahead->forward(inputs, tape.get());
        auto [loss, output_grads] = squared_error_loss(outputs, target);
        zero_params(*grads);
        lookahead->accumulate_grads(*tape, output_grads, *grads);
        maybe_clip(*grads, cfg.grad_clip);
        nesterov_step(model, *velocity, *grads, cfg.learning_rate, cfg.momentum);

        EpochStats row;
        row.epoch = epoch;
        row.train_loss = loss;
        row.task_metric = nmse(model.forward(inputs), target);
        if (csv != nullptr) {
            csv->write(row);
        }
        metrics.epochs.push_back(row);
    }
    metrics.final_metric = *metrics.epochs.back().task_metric;
    return metrics;
}

std::size_t classify(const SequenceModel& model, const std::vector<Vector>& frames,
                     Readout readout) {
    const auto outputs = model.forward(frames);
    if (outputs.empty()) {
        throw std::invalid_argument("classify: empty sequence");
    }
    Vector score(model.output_size(), 0.0);
    if (readout == Readout::FinalStep) {
        score = outputs.back();
    } else {
        for (const Vector& p : outputs) {
            for (std::size_t k = 0; k < p.size(); ++k) {
                score[k] += std::log(p[k]);
            }
        }
    }
    return static_cast<std::size_t>(
        std::max_element(score.begin(), score.end()) - score.begin());
}

double classification_error(const SequenceModel& model, std::span<const LabeledSequence> set,
                            Readout readout) {
    if (set.empty()) {
        throw std::invalid_argument("classification_error: empty set");
    }
    std::size_t wrong = 0;
    for (const auto& example : set) {
        if (classify(model, example.frames, readout) != example.label) {
            ++wrong;
        }
    }
    return static_cast<double>(wrong) / static_cast<double>(set.size());
}

Metrics train_classification(SequenceModel& model, const ClassDataset& data,
                             const TrainConfig& cfg, MetricsWriter* csv) {
    cfg.validate();
    if (data.train.empty()) {
        throw std::invalid_argument("train_classification: empty training set");
    }
    if (model.output_activation() != OutputActivation::Softmax) {
        throw std::invalid_argument("train_classification: model needs a softmax output");
    }
    for (const auto& ex : data.train) {
        if (ex.label >= data.class_count) {
            throw std::invalid_argument("train_classification: label out of range");
        }
    }

    Rng rng(cfg.seed);
    auto velocity = model.zeros_like();
    auto grads = model.zeros_like();
    auto lookahead = model.clone();
    auto tape = model.make_tape();

    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);

    Metrics metrics;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_improvement = 0;
    // "patience epochs without improvement" always means at least one.
    const std::size_t stop_after = std::max<std::size_t>(cfg.patience, 1);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates reshuffle of the presentation order each epoch.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_below(i)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t idx : order) {
            const auto& example = data.train[idx];
            const auto noisy = cfg.noise_std > 0.0
                                   ? add_input_noise(example.frames, cfg.noise_std, rng)
                                   : example.frames;
            copy_params(*lookahead, model);
            axpy_params(*lookahead, cfg.momentum, *velocity);
            const auto outputs = lookahead->forward(noisy, tape.get());
            auto [loss, output_grads] = xent_loss(outputs, example.label, cfg.readout);
            epoch_loss += loss;
            zero_params(*grads);
            lookahead->accumulate_grads(*tape, output_grads, *grads);
            maybe_clip(*grads, cfg.grad_clip);
            nesterov_step(model, *velocity, *grads, cfg.learning_rate, cfg.momentum);
        }

        double noise_free = 0.0;
        for (const auto& example : data.train) {
            const auto outputs = model.forward(example.frames);
            noise_free += xent_loss(outputs, example.label, cfg.readout).first;
        }
        noise_free /= static_cast<double>(data.train.size());

        EpochStats row;
        row.epoch = epoch;
        row.train_loss = epoch_loss / static_cast<double>(data.train.size());
        row.noise_free_loss = noise_free;
        if (!data.test.empty()) {
            row.task_metric = classification_error(model, data.test, cfg.readout);
        }
        if (csv != nullptr) {
            csv->write(row);
        }
        metrics.epochs.push_back(row);

        if (noise_free < best_loss) {
            best_loss = noise_free;
            since_improvement = 0;
        } else if (++since_improvement >= stop_after) {
            break;
        }
    }
    metrics.final_metric = data.test.empty()
                               ? 0.0
                               : classification_error(model, data.test, cfg.readout);
    return metrics;
}

}  // namespace cwrnn
