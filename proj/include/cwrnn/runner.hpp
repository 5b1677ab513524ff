// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// Config-driven experiment runs: JSON run configs are schema-validated
// (unknown keys rejected), models are built deterministically from the
// training seed, and every run writes a metrics CSV plus a checkpoint so
// identical configs reproduce identical bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cwrnn/clockwork.hpp"
#include "cwrnn/data_io.hpp"
#include "cwrnn/model.hpp"
#include "cwrnn/training.hpp"

namespace cwrnn {

// Invalid configuration or incompatible inputs; the CLI maps this to
// exit code 2 (usage error) as opposed to runtime failures (exit 1).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    std::string type;  // "cwrnn" | "srn" | "lstm"
    std::size_t hidden = 0;
    std::optional<std::size_t> groups;                  // cwrnn, exponential periods
    std::optional<std::vector<std::uint64_t>> periods;  // cwrnn, explicit periods
    double init_std = 0.1;
    double forget_bias = 5.0;  // lstm forget-gate bias at init
};

struct TaskConfig {
    std::string type;  // "generation" | "classification"
    // Sequence CSV or manifest path, or "synth:waveform[:seed]" /
    // "synth:words[:seed]" for the bundled generators.
    std::string data;
};

struct OutConfig {
    std::string metrics_csv;
    std::string checkpoint;
};

struct RunConfig {
    ModelConfig model;
    TaskConfig task;
    TrainConfig train;
    OutConfig out;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Builds a model with weights drawn from a stream derived from seed, so a
// run is fully determined by its config.
std::unique_ptr<SequenceModel> build_model(const ModelConfig& cfg, std::size_t input_size,
                                           std::size_t output_size, OutputActivation act,
                                           std::uint64_t seed);

ClockSpec clock_spec_from_config(const ModelConfig& cfg);

// Replaces a "synth:words" data URI by a concrete on-disk dataset under
// base_dir (generated files are a pure function of the seed). Other data
// values are left alone. Call once before spawning parallel seed runs.
void materialize_dataset(RunConfig& cfg, const std::filesystem::path& base_dir);

// "out/run.csv" -> "out/run_seed7.csv"
std::filesystem::path path_with_seed(const std::filesystem::path& path, std::uint64_t seed);

struct RunResult {
    Metrics metrics;
    std::filesystem::path metrics_csv;
    std::filesystem::path checkpoint;
};

// Trains per the config and writes both outputs. A seed override also
// suffixes the output paths, for multi-seed sweeps.
RunResult run_training(RunConfig cfg, std::optional<std::uint64_t> seed_override = {});

// Loads a checkpoint and scores it: NMSE against a target sequence for
// generation models, test error rate on a manifest for classifiers.
// Returns the metric name and value.
std::pair<std::string, double> evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                                   const std::string& data);

// Free-runs an input-free checkpoint for the given number of steps.
std::vector<Vector> generate_from_checkpoint(const std::filesystem::path& checkpoint,
                                             std::size_t steps);

// Parses "synth:waveform[:seed]" / loads a CSV into a generation target.
std::vector<Vector> load_generation_target(const std::string& data);

}  // namespace cwrnn
