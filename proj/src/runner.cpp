// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cwrnn/baselines.hpp"
#include "cwrnn/clockwork.hpp"
#include "cwrnn/rng.hpp"

namespace cwrnn {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            throw ConfigError("config: unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        throw ConfigError("config: missing key '" + std::string(key) + "' in " + where);
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: key '" + std::string(key) + "' in " + where +
                          " has the wrong type");
    }
}

template <typename T>
T optional_or(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: key '" + std::string(key) + "' in " + where +
                          " has the wrong type");
    }
}

RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    check_keys(j, {"model", "task", "train", "out"}, "the top level");
    for (const char* key : {"model", "task", "train", "out"}) {
        if (!j.contains(key) || !j.at(key).is_object()) {
            throw ConfigError("config: missing or non-object section '" + std::string(key) + "'");
        }
    }

    RunConfig cfg;
    const json& model = j.at("model");
    check_keys(model, {"type", "hidden", "groups", "periods", "init_std", "forget_bias"},
               "'model'");
    cfg.model.type = require<std::string>(model, "type", "'model'");
    if (cfg.model.type != "cwrnn" && cfg.model.type != "srn" && cfg.model.type != "lstm") {
        throw ConfigError("config: model.type must be cwrnn, srn or lstm");
    }
    cfg.model.hidden = require<std::size_t>(model, "hidden", "'model'");
    if (cfg.model.hidden == 0) {
        throw ConfigError("config: model.hidden must be >= 1");
    }
    if (model.contains("groups")) {
        cfg.model.groups = require<std::size_t>(model, "groups", "'model'");
    }
    if (model.contains("periods")) {
        const json& p = model.at("periods");
        if (p.is_string()) {
            if (p.get<std::string>() != "exponential") {
                throw ConfigError("config: model.periods must be \"exponential\" or an array");
            }
        } else if (p.is_array()) {
            cfg.model.periods = p.get<std::vector<std::uint64_t>>();
        } else {
            throw ConfigError("config: model.periods must be \"exponential\" or an array");
        }
    }
    cfg.model.init_std = optional_or<double>(model, "init_std", "'model'", 0.1);
    cfg.model.forget_bias = optional_or<double>(model, "forget_bias", "'model'", 5.0);
    if (cfg.model.type == "cwrnn" && !cfg.model.groups && !cfg.model.periods) {
        throw ConfigError("config: a cwrnn model needs 'groups' or an explicit 'periods' array");
    }
    if (cfg.model.groups && cfg.model.periods &&
        *cfg.model.groups != cfg.model.periods->size()) {
        throw ConfigError("config: model.groups disagrees with the length of model.periods");
    }

    const json& task = j.at("task");
    check_keys(task, {"type", "data"}, "'task'");
    cfg.task.type = require<std::string>(task, "type", "'task'");
    if (cfg.task.type != "generation" && cfg.task.type != "classification") {
        throw ConfigError("config: task.type must be generation or classification");
    }
    cfg.task.data = require<std::string>(task, "data", "'task'");

    const json& train = j.at("train");
    check_keys(train,
               {"lr", "momentum", "epochs", "seed", "noise_std", "patience", "readout",
                "grad_clip"},
               "'train'");
    cfg.train.learning_rate = require<double>(train, "lr", "'train'");
    cfg.train.momentum = require<double>(train, "momentum", "'train'");
    cfg.train.epochs = require<std::size_t>(train, "epochs", "'train'");
    cfg.train.seed = require<std::uint64_t>(train, "seed", "'train'");
    cfg.train.noise_std = optional_or<double>(train, "noise_std", "'train'", 0.0);
    cfg.train.patience = optional_or<std::size_t>(train, "patience", "'train'", 5);
    cfg.train.grad_clip = optional_or<double>(train, "grad_clip", "'train'", 0.0);
    const std::string readout = optional_or<std::string>(train, "readout", "'train'", "final");
    if (readout == "final") {
        cfg.train.readout = Readout::FinalStep;
    } else if (readout == "mean") {
        cfg.train.readout = Readout::MeanOverSteps;
    } else {
        throw ConfigError("config: train.readout must be \"final\" or \"mean\"");
    }
    try {
        cfg.train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    const json& out = j.at("out");
    check_keys(out, {"metrics_csv", "checkpoint"}, "'out'");
    cfg.out.metrics_csv = require<std::string>(out, "metrics_csv", "'out'");
    cfg.out.checkpoint = require<std::string>(out, "checkpoint", "'out'");
    return cfg;
}

// Splits "synth:waveform:123" into its kind and optional seed.
struct SynthUri {
    std::string kind;
    std::uint64_t seed;
};

std::optional<SynthUri> parse_synth_uri(const std::string& data, std::uint64_t default_seed) {
    if (data.rfind("synth:", 0) != 0) {
        return std::nullopt;
    }
    std::string rest = data.substr(6);
    std::uint64_t seed = default_seed;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
        try {
            seed = std::stoull(rest.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("config: bad synth seed in '" + data + "'");
        }
        rest = rest.substr(0, colon);
    }
    if (rest != "waveform" && rest != "words") {
        throw ConfigError("config: unknown synthetic dataset '" + data + "'");
    }
    return SynthUri{rest, seed};
}

void create_parent_dirs(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
}

std::vector<LabeledSequence> remap_labels(std::vector<LabeledSequence> split,
                                          const std::vector<std::string>& from_classes,
                                          const std::vector<std::string>& to_classes) {
    for (auto& seq : split) {
        const std::string& name = from_classes.at(seq.label);
        const auto it = std::find(to_classes.begin(), to_classes.end(), name);
        if (it == to_classes.end()) {
            throw ConfigError("class '" + name + "' is unknown to the checkpoint");
        }
        seq.label = static_cast<std::size_t>(it - to_classes.begin());
    }
    return split;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_run_config(j);
}

ClockSpec clock_spec_from_config(const ModelConfig& cfg) {
    if (cfg.periods) {
        const std::size_t groups = cfg.periods->size();
        if (groups == 0 || cfg.hidden < groups) {
            throw ConfigError("config: need 1 <= periods <= hidden units");
        }
        std::vector<std::size_t> sizes(groups, cfg.hidden / groups);
        for (std::size_t i = 0; i < cfg.hidden % groups; ++i) {
            ++sizes[i];
        }
        return ClockSpec(std::move(sizes), *cfg.periods);
    }
    return ClockSpec::exponential(cfg.hidden, cfg.groups.value_or(1));
}

std::unique_ptr<SequenceModel> build_model(const ModelConfig& cfg, std::size_t input_size,
                                           std::size_t output_size, OutputActivation act,
                                           std::uint64_t seed) {
    Rng rng(derive_seed(seed, 1));
    if (cfg.type == "cwrnn") {
        return std::make_unique<CwRnn>(
            init_cwrnn_params(clock_spec_from_config(cfg), input_size, output_size, rng,
                              cfg.init_std),
            act);
    }
    if (cfg.type == "srn") {
        return std::make_unique<Srn>(
            init_srn_params(cfg.hidden, input_size, output_size, rng, cfg.init_std), act);
    }
    if (cfg.type == "lstm") {
        return std::make_unique<Lstm>(init_lstm_params(cfg.hidden, input_size, output_size, rng,
                                                       cfg.init_std, cfg.forget_bias),
                                      act);
    }
    throw ConfigError("unknown model type '" + cfg.type + "'");
}

void materialize_dataset(RunConfig& cfg, const std::filesystem::path& base_dir) {
    const auto uri = parse_synth_uri(cfg.task.data, kDefaultWordsSeed);
    if (!uri || uri->kind != "words") {
        return;
    }
    const auto dir = base_dir / ("synth-words-" + std::to_string(uri->seed));
    cfg.task.data = write_wordlike_dataset(uri->seed, dir).string();
}

std::filesystem::path path_with_seed(const std::filesystem::path& path, std::uint64_t seed) {
    std::filesystem::path out = path;
    const std::string stem = out.stem().string() + "_seed" + std::to_string(seed);
    out.replace_filename(stem + out.extension().string());
    return out;
}

std::vector<Vector> load_generation_target(const std::string& data) {
    if (const auto uri = parse_synth_uri(data, kDefaultWaveformSeed)) {
        if (uri->kind != "waveform") {
            throw ConfigError("generation tasks need a sequence CSV or synth:waveform");
        }
        return synth_waveform(uri->seed);
    }
    if (!std::filesystem::exists(data)) {
        throw std::runtime_error("data file not found: " + data);
    }
    return load_sequence(data);
}

RunResult run_training(RunConfig cfg, std::optional<std::uint64_t> seed_override) {
    RunResult result;
    result.metrics_csv = cfg.out.metrics_csv;
    result.checkpoint = cfg.out.checkpoint;
    if (seed_override) {
        cfg.train.seed = *seed_override;
        result.metrics_csv = path_with_seed(result.metrics_csv, *seed_override);
        result.checkpoint = path_with_seed(result.checkpoint, *seed_override);
    }
    create_parent_dirs(result.metrics_csv);
    create_parent_dirs(result.checkpoint);

    if (cfg.task.type == "generation") {
        const auto target = load_generation_target(cfg.task.data);
        for (const auto& frame : target) {
            for (double v : frame) {
                if (std::abs(v) > 1.0 + 1e-9) {
                    throw std::runtime_error(
                        "generation target must be scaled to [-1, 1]; found " + format_real(v));
                }
            }
        }
        auto model = build_model(cfg.model, 0, target.front().size(),
                                 OutputActivation::Identity, cfg.train.seed);
        MetricsWriter csv(result.metrics_csv);
        result.metrics = train_generation(*model, target, cfg.train, &csv);
        save_checkpoint(result.checkpoint,
                        make_checkpoint(*model, std::nullopt, {}, cfg.train.seed));
        return result;
    }

    // Classification: materialize synthetic data next to the checkpoint,
    // then run the regular manifest path.
    materialize_dataset(cfg, result.checkpoint.parent_path());
    if (!std::filesystem::exists(cfg.task.data)) {
        throw std::runtime_error("data file not found: " + cfg.task.data);
    }
    const auto manifest_path = std::filesystem::path(cfg.task.data);
    const auto manifest = load_manifest(manifest_path);
    if (manifest.task != "classification") {
        throw ConfigError("manifest task '" + manifest.task +
                          "' does not match the classification run");
    }
    ClassDataset data;
    data.class_count = manifest.classes.size();
    data.train = load_split(manifest, manifest_path.parent_path(), Phase::Train);
    if (data.train.empty()) {
        throw std::runtime_error("manifest has no training sequences");
    }
    const NormStats stats = fit_normalization(data.train);
    normalize_in_place(stats, data.train);
    data.test = load_split(manifest, manifest_path.parent_path(), Phase::Test);
    normalize_in_place(stats, data.test);

    auto model = build_model(cfg.model, data.train.front().frames.front().size(),
                             data.class_count, OutputActivation::Softmax, cfg.train.seed);
    MetricsWriter csv(result.metrics_csv);
    result.metrics = train_classification(*model, data, cfg.train, &csv);
    save_checkpoint(result.checkpoint,
                    make_checkpoint(*model, stats, manifest.classes, cfg.train.seed));
    return result;
}

std::pair<std::string, double> evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                                   const std::string& data) {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const auto model = model_from_checkpoint(ckpt);

    if (ckpt.activation == OutputActivation::Identity) {
        if (model->input_size() != 0) {
            throw ConfigError("checkpoint expects inputs; free-running evaluation needs an "
                              "input-free model");
        }
        const auto target = load_generation_target(data);
        if (target.front().size() != model->output_size()) {
            throw ConfigError("target has " + std::to_string(target.front().size()) +
                              " channels but the checkpoint outputs " +
                              std::to_string(model->output_size()));
        }
        const std::vector<Vector> inputs(target.size(), Vector{});
        return {"nmse", nmse(model->forward(inputs), target)};
    }

    // Classification checkpoint: score the manifest's test split.
    if (!ckpt.norm) {
        throw ConfigError("classification checkpoint is missing normalization statistics");
    }
    std::vector<LabeledSequence> test;
    if (const auto uri = parse_synth_uri(data, kDefaultWordsSeed)) {
        if (uri->kind != "words") {
            throw ConfigError("a classification checkpoint needs a manifest or synth:words");
        }
        WordlikeDataset set = synth_wordlike(uri->seed);
        test = remap_labels(std::move(set.data.test), set.classes, ckpt.classes);
    } else {
        if (!std::filesystem::exists(data)) {
            throw std::runtime_error("data file not found: " + data);
        }
        const auto manifest_path = std::filesystem::path(data);
        const auto manifest = load_manifest(manifest_path);
        if (manifest.task != "classification") {
            throw ConfigError("manifest task does not match the classification checkpoint");
        }
        test = remap_labels(load_split(manifest, manifest_path.parent_path(), Phase::Test),
                            manifest.classes, ckpt.classes);
    }
    if (test.empty()) {
        throw std::runtime_error("no test sequences to evaluate");
    }
    normalize_in_place(*ckpt.norm, test);
    return {"test_error", classification_error(*model, test, Readout::FinalStep)};
}

std::vector<Vector> generate_from_checkpoint(const std::filesystem::path& checkpoint,
                                             std::size_t steps) {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const auto model = model_from_checkpoint(ckpt);
    if (model->input_size() != 0) {
        throw ConfigError("generate needs an input-free checkpoint");
    }
    const std::vector<Vector> inputs(steps, Vector{});
    return model->forward(inputs);
}

}  // namespace cwrnn
