// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "cwrnn/baselines.hpp"
#include "cwrnn/clockwork.hpp"
#include "cwrnn/training.hpp"

using namespace cwrnn;

namespace {

std::vector<Vector> sine_target(std::size_t steps) {
    std::vector<Vector> target(steps, Vector(1));
    for (std::size_t t = 0; t < steps; ++t) {
        target[t][0] = 0.8 * std::sin(2.0 * std::numbers::pi * t / 20.0);
    }
    return target;
}

ClassDataset tiny_dataset(std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    ClassDataset data;
    data.class_count = classes;
    for (std::size_t c = 0; c < classes; ++c) {
        for (int example = 0; example < 3; ++example) {
            LabeledSequence seq;
            seq.label = c;
            seq.frames.assign(6, Vector(2));
            for (auto& frame : seq.frames) {
                frame[0] = rng.gaussian(static_cast<double>(c), 0.3);
                frame[1] = rng.gaussian(-0.5 * static_cast<double>(c), 0.3);
            }
            (example < 2 ? data.train : data.test).push_back(std::move(seq));
        }
    }
    return data;
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("nesterov step follows the scalar quadratic-bowl oracle") {
    // f(w) = w^2/2, lr = 0.1, mu = 0.9, w0 = 1; gradient evaluated at the
    // lookahead point each step.
    double w = 1.0, v = 0.0;
    const double lr = 0.1, mu = 0.9;
    const double expected[3] = {0.9, 0.729, 0.51759};
    for (int step = 0; step < 3; ++step) {
        const double grad_at_lookahead = w + mu * v;
        double pw[1] = {w}, pv[1] = {v}, pg[1] = {grad_at_lookahead};
        nesterov_step(std::span<double>(pw, 1), std::span<double>(pv, 1),
                      std::span<const double>(pg, 1), lr, mu);
        w = pw[0];
        v = pv[0];
        CHECK(w == doctest::Approx(expected[step]).epsilon(1e-12));
    }
}

TEST_CASE("momentum-free nesterov is plain gradient descent") {
    double w[2] = {1.0, -2.0}, v[2] = {0.0, 0.0};
    const double g[2] = {0.5, -1.0};
    nesterov_step(std::span<double>(w, 2), std::span<double>(v, 2),
                  std::span<const double>(g, 2), 0.1, 0.0);
    CHECK(w[0] == doctest::Approx(1.0 - 0.05));
    CHECK(w[1] == doctest::Approx(-2.0 + 0.1));
}

TEST_CASE("zero gradient and zero velocity leave parameters unchanged") {
    double w[2] = {0.3, 0.7}, v[2] = {0.0, 0.0};
    const double g[2] = {0.0, 0.0};
    nesterov_step(std::span<double>(w, 2), std::span<double>(v, 2),
                  std::span<const double>(g, 2), 0.1, 0.9);
    CHECK(w[0] == 0.3);
    CHECK(w[1] == 0.7);
}

TEST_CASE("squared error of a perfect fit is zero") {
    const std::vector<Vector> outputs{{0.5}, {-0.25}};
    const auto [loss, grads] = squared_error_loss(outputs, outputs);
    CHECK(loss == 0.0);
    for (const auto& g : grads) {
        CHECK(g == Vector{0.0});
    }
}

TEST_CASE("cross entropy closed forms") {
    const std::vector<Vector> outputs{Vector{0.25, 0.75}};
    const auto [loss, grads] = xent_loss(outputs, 1, Readout::FinalStep);
    CHECK(loss == doctest::Approx(-std::log(0.75)).epsilon(1e-14));
    CHECK(loss == doctest::Approx(0.2876820724517809).epsilon(1e-12));
    CHECK(grads[0][0] == doctest::Approx(0.25));
    CHECK(grads[0][1] == doctest::Approx(-0.25));

    const std::vector<Vector> uniform{Vector(25, 1.0 / 25.0)};
    CHECK(xent_loss(uniform, 7, Readout::FinalStep).first ==
          doctest::Approx(std::log(25.0)).epsilon(1e-14));

    CHECK_THROWS_AS(xent_loss(outputs, 2, Readout::FinalStep), std::invalid_argument);
}

TEST_CASE("nmse anchors") {
    const std::vector<Vector> target{{-1.0}, {1.0}};
    CHECK(nmse(target, target) == 0.0);
    const std::vector<Vector> zeros{{0.0}, {0.0}};
    CHECK(nmse(zeros, target) == doctest::Approx(1.0));

    // Predicting the mean of any target scores exactly 1.
    const std::vector<Vector> tgt{{0.2}, {0.9}, {-0.4}, {0.5}};
    const double mean = (0.2 + 0.9 - 0.4 + 0.5) / 4.0;
    const std::vector<Vector> mean_pred(4, Vector{mean});
    CHECK(nmse(mean_pred, tgt) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(nmse(zeros, zeros), std::invalid_argument);  // zero variance
}

TEST_CASE("generation training fits a short sine") {
    Rng rng(5);
    CwRnn model(init_cwrnn_params(ClockSpec::exponential(8, 3), 0, 1, rng, 0.1),
                OutputActivation::Identity);
    TrainConfig cfg;
    cfg.learning_rate = 3e-3;
    cfg.momentum = 0.9;
    cfg.epochs = 300;
    cfg.seed = 5;
    const auto target = sine_target(40);
    const Metrics metrics = train_generation(model, target, cfg);
    REQUIRE(metrics.epochs.size() == 300);
    CHECK(metrics.final_metric < *metrics.epochs.front().task_metric);
    CHECK(metrics.final_metric < 0.2);
}

TEST_CASE("generation training rejects models with inputs") {
    CwRnn model(ClockSpec::exponential(4, 2), 2, 1, OutputActivation::Identity);
    TrainConfig cfg;
    CHECK_THROWS_AS(train_generation(model, sine_target(10), cfg), std::invalid_argument);
}

TEST_CASE("optimizer updates preserve the structural zero blocks") {
    Rng rng(17);
    CwRnn model(init_cwrnn_params(ClockSpec::exponential(9, 3), 0, 1, rng, 0.1),
                OutputActivation::Identity);
    TrainConfig cfg;
    cfg.learning_rate = 3e-3;
    cfg.momentum = 0.95;
    cfg.epochs = 100;  // one update per epoch
    train_generation(model, sine_target(32), cfg);
    CHECK(zero_blocks_intact(model.params()));
}

TEST_CASE("vanishing learning rate freezes the metrics") {
    Rng rng(23);
    CwRnn model(init_cwrnn_params(ClockSpec::exponential(6, 2), 0, 1, rng, 0.1),
                OutputActivation::Identity);
    TrainConfig cfg;
    cfg.learning_rate = 1e-15;
    cfg.momentum = 0.9;
    cfg.epochs = 4;
    const Metrics metrics = train_generation(model, sine_target(24), cfg);
    for (const auto& row : metrics.epochs) {
        CHECK(*row.task_metric ==
              doctest::Approx(*metrics.epochs.front().task_metric).epsilon(1e-9));
    }
}

TEST_CASE("single-class training stops immediately with zero patience and zero error") {
    Rng rng(31);
    Srn model(init_srn_params(4, 2, 1, rng, 0.1), OutputActivation::Softmax);
    ClassDataset data = tiny_dataset(1, 31);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.momentum = 0.0;
    cfg.epochs = 50;
    cfg.patience = 0;
    cfg.seed = 31;
    const Metrics metrics = train_classification(model, data, cfg);
    // One class: the softmax is identically 1, the loss is exactly zero,
    // so epoch 2 is the first non-improving epoch.
    CHECK(metrics.epochs.size() == 2);
    CHECK(metrics.final_metric == 0.0);
}

TEST_CASE("classification training is deterministic for a fixed seed") {
    ClassDataset data = tiny_dataset(3, 77);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.momentum = 0.9;
    cfg.epochs = 6;
    cfg.patience = 5;
    cfg.noise_std = 0.6;
    cfg.seed = 99;

    auto run = [&]() {
        Rng rng(7);
        Srn model(init_srn_params(5, 2, 3, rng, 0.1), OutputActivation::Softmax);
        return train_classification(model, data, cfg);
    };
    const Metrics a = run();
    const Metrics b = run();
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        CHECK(a.epochs[i].train_loss == b.epochs[i].train_loss);
        CHECK(*a.epochs[i].noise_free_loss == *b.epochs[i].noise_free_loss);
    }
    CHECK(a.final_metric == b.final_metric);
}

TEST_CASE("classification improves on an easy separable set") {
    ClassDataset data = tiny_dataset(3, 13);
    Rng rng(13);
    Srn model(init_srn_params(6, 2, 3, rng, 0.1), OutputActivation::Softmax);
    TrainConfig cfg;
    cfg.learning_rate = 5e-3;
    cfg.momentum = 0.9;
    cfg.epochs = 60;
    cfg.patience = 60;  // effectively disabled
    cfg.seed = 13;
    const Metrics metrics = train_classification(model, data, cfg);
    CHECK(*metrics.epochs.back().noise_free_loss < *metrics.epochs.front().noise_free_loss);
    CHECK(metrics.final_metric < 0.5);
}

TEST_CASE("metrics CSV uses the frozen schema") {
    const auto path = std::filesystem::temp_directory_path() / "cwrnn_metrics_test.csv";
    {
        MetricsWriter writer(path);
        EpochStats row;
        row.epoch = 1;
        row.train_loss = 0.5;
        writer.write(row);
        row.epoch = 2;
        row.train_loss = 0.25;
        row.noise_free_loss = 0.125;
        row.task_metric = 1.0;
        writer.write(row);
    }
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    CHECK(buffer.str() == "epoch,train_loss,noise_free_loss,test_metric\n"
                          "1,0.5,,\n"
                          "2,0.25,0.125,1\n");
    std::filesystem::remove(path);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.learning_rate = 1e-3;
    cfg.momentum = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.momentum = 0.9;
    cfg.noise_std = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_SUITE_END();
