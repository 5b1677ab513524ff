// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0

#include "cwrnn/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cwrnn/baselines.hpp"
#include "cwrnn/clockwork.hpp"
#include "cwrnn/rng.hpp"

namespace cwrnn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view token, const std::filesystem::path& path, std::size_t line) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        fail(path, line, "expected a finite real, got '" + std::string(token) + "'");
    }
    return value;
}

// ---------------------------------------------------------------------------
// Canonical JSON emission: sorted keys (nlohmann objects iterate sorted),
// reals with 17 significant digits, two-space indent, no trailing spaces.
// ---------------------------------------------------------------------------

void emit_json(std::ostream& out, const json& value, int indent) {
    const std::string pad(indent * 2, ' ');
    const std::string pad_in((indent + 1) * 2, ' ');
    switch (value.type()) {
        case json::value_t::object: {
            if (value.empty()) {
                out << "{}";
                return;
            }
            out << "{\n";
            bool first = true;
            for (const auto& [key, item] : value.items()) {
                if (!first) {
                    out << ",\n";
                }
                first = false;
                out << pad_in << json(key).dump() << ": ";
                emit_json(out, item, indent + 1);
            }
            out << '\n' << pad << '}';
            return;
        }
        case json::value_t::array: {
            if (value.empty()) {
                out << "[]";
                return;
            }
            out << '[';
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i > 0) {
                    out << ", ";
                }
                emit_json(out, value[i], indent);
            }
            out << ']';
            return;
        }
        case json::value_t::number_float:
            out << format_real(value.get<double>());
            return;
        default:
            out << value.dump();
            return;
    }
}

void write_canonical_json(const std::filesystem::path& path, const json& value) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    emit_json(out, value, 0);
    out << '\n';
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    json value;
    try {
        value = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sequence CSV
// ---------------------------------------------------------------------------

std::vector<Vector> load_sequence(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open sequence file " + path.string());
    }
    std::vector<Vector> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        Vector frame;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view token =
                std::string_view(line).substr(start, comma == std::string::npos
                                                         ? std::string::npos
                                                         : comma - start);
            frame.push_back(parse_real(token, path, line_no));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (!frames.empty() && frame.size() != frames.front().size()) {
            fail(path, line_no, "expected " + std::to_string(frames.front().size()) +
                                    " columns, got " + std::to_string(frame.size()));
        }
        frames.push_back(std::move(frame));
    }
    if (frames.empty()) {
        throw std::runtime_error(path.string() + ": no data rows");
    }
    return frames;
}

void save_sequence(const std::filesystem::path& path, std::span<const Vector> frames) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (const Vector& frame : frames) {
        for (std::size_t k = 0; k < frame.size(); ++k) {
            if (k > 0) {
                out << ',';
            }
            out << format_real(frame[k]);
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

// ---------------------------------------------------------------------------
// Dataset manifests
// ---------------------------------------------------------------------------

namespace {

json entry_to_json(const ManifestEntry& e) {
    json j;
    j["path"] = e.path;
    if (e.label) {
        j["label"] = *e.label;
    }
    return j;
}

ManifestEntry entry_from_json(const json& j, const std::filesystem::path& path) {
    if (!j.is_object() || !j.contains("path")) {
        throw std::runtime_error(path.string() + ": manifest entries need a 'path'");
    }
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    if (j.contains("label")) {
        e.label = j.at("label").get<std::string>();
    }
    return e;
}

void validate_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    if (m.task != "generation" && m.task != "classification") {
        throw std::runtime_error(path.string() + ": task must be 'generation' or 'classification'");
    }
    const bool classify = m.task == "classification";
    for (const auto* split : {&m.train, &m.test}) {
        for (const auto& e : *split) {
            if (classify) {
                if (!e.label) {
                    throw std::runtime_error(path.string() + ": classification entry '" + e.path +
                                             "' is missing a label");
                }
                if (std::find(m.classes.begin(), m.classes.end(), *e.label) == m.classes.end()) {
                    throw std::runtime_error(path.string() + ": label '" + *e.label +
                                             "' is not in the class list");
                }
            } else if (e.label) {
                throw std::runtime_error(path.string() + ": generation entry '" + e.path +
                                         "' must not carry a label");
            }
        }
    }
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    DatasetManifest m;
    if (!j.is_object() || !j.contains("task") || !j.contains("train")) {
        throw std::runtime_error(path.string() + ": manifest needs 'task' and 'train'");
    }
    m.task = j.at("task").get<std::string>();
    for (const auto& e : j.at("train")) {
        m.train.push_back(entry_from_json(e, path));
    }
    if (j.contains("test")) {
        for (const auto& e : j.at("test")) {
            m.test.push_back(entry_from_json(e, path));
        }
    }
    if (j.contains("classes")) {
        m.classes = j.at("classes").get<std::vector<std::string>>();
    }
    validate_manifest(m, path);
    return m;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    validate_manifest(manifest, path);
    json j;
    j["task"] = manifest.task;
    j["train"] = json::array();
    for (const auto& e : manifest.train) {
        j["train"].push_back(entry_to_json(e));
    }
    j["test"] = json::array();
    for (const auto& e : manifest.test) {
        j["test"].push_back(entry_to_json(e));
    }
    if (!manifest.classes.empty()) {
        j["classes"] = manifest.classes;
    }
    write_canonical_json(path, j);
}

std::vector<LabeledSequence> load_split(const DatasetManifest& manifest,
                                        const std::filesystem::path& manifest_dir, Phase phase) {
    const auto& entries = phase == Phase::Train ? manifest.train : manifest.test;
    std::vector<LabeledSequence> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        LabeledSequence seq;
        seq.frames = load_sequence(manifest_dir / e.path);
        if (e.label) {
            const auto it = std::find(manifest.classes.begin(), manifest.classes.end(), *e.label);
            seq.label = static_cast<std::size_t>(it - manifest.classes.begin());
        }
        out.push_back(std::move(seq));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

NormStats fit_normalization(std::span<const LabeledSequence> train) {
    std::size_t channels = 0;
    std::size_t count = 0;
    for (const auto& seq : train) {
        for (const auto& frame : seq.frames) {
            if (channels == 0) {
                channels = frame.size();
            }
            ++count;
        }
    }
    if (count < 2 || channels == 0) {
        throw std::invalid_argument("fit_normalization: need at least two frames");
    }
    NormStats stats{Vector(channels, 0.0), Vector(channels, 0.0)};
    for (const auto& seq : train) {
        for (const auto& frame : seq.frames) {
            for (std::size_t ch = 0; ch < channels; ++ch) {
                stats.mean[ch] += frame[ch];
            }
        }
    }
    for (double& m : stats.mean) {
        m /= static_cast<double>(count);
    }
    for (const auto& seq : train) {
        for (const auto& frame : seq.frames) {
            for (std::size_t ch = 0; ch < channels; ++ch) {
                const double d = frame[ch] - stats.mean[ch];
                stats.std[ch] += d * d;
            }
        }
    }
    for (std::size_t ch = 0; ch < channels; ++ch) {
        stats.std[ch] = std::sqrt(stats.std[ch] / static_cast<double>(count));
        if (stats.std[ch] == 0.0) {
            throw std::invalid_argument("fit_normalization: channel " + std::to_string(ch) +
                                        " is constant");
        }
    }
    return stats;
}

std::vector<Vector> apply_normalization(const NormStats& stats,
                                        const std::vector<Vector>& frames) {
    std::vector<Vector> out = frames;
    for (auto& frame : out) {
        if (frame.size() != stats.mean.size()) {
            throw std::invalid_argument("apply_normalization: channel count mismatch");
        }
        for (std::size_t ch = 0; ch < frame.size(); ++ch) {
            frame[ch] = (frame[ch] - stats.mean[ch]) / stats.std[ch];
        }
    }
    return out;
}

void normalize_in_place(const NormStats& stats, std::vector<LabeledSequence>& set) {
    for (auto& seq : set) {
        seq.frames = apply_normalization(stats, seq.frames);
    }
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

std::vector<Vector> synth_waveform(std::uint64_t seed, std::size_t length) {
    if (length == 0) {
        throw std::invalid_argument("synth_waveform: length must be >= 1");
    }
    Rng rng(seed);
    const std::size_t components = 3 + rng.uniform_below(3);
    struct Component {
        double amp, cycles, phase;
    };
    std::vector<Component> comps(components);
    for (auto& c : comps) {
        c.amp = 0.4 + 0.6 * rng.uniform01();
        c.cycles = 1.5 + 6.5 * rng.uniform01();
        c.phase = 2.0 * std::numbers::pi * rng.uniform01();
    }
    const double env_cycles = 0.4 + 1.1 * rng.uniform01();
    const double env_phase = 2.0 * std::numbers::pi * rng.uniform01();

    std::vector<Vector> frames(length, Vector(1));
    double peak = 0.0;
    for (std::size_t t = 0; t < length; ++t) {
        const double u = static_cast<double>(t) / static_cast<double>(length);
        double x = 0.0;
        for (const auto& c : comps) {
            x += c.amp * std::sin(2.0 * std::numbers::pi * c.cycles * u + c.phase);
        }
        x *= 1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * env_cycles * u + env_phase);
        frames[t][0] = x;
        peak = std::max(peak, std::abs(x));
    }
    for (auto& frame : frames) {
        frame[0] /= peak;
    }
    return frames;
}

namespace {

constexpr std::size_t kChannels = 13;
constexpr std::size_t kClusters = 5;
constexpr std::size_t kWordsPerCluster = 5;
constexpr std::size_t kClasses = kClusters * kWordsPerCluster;
constexpr std::size_t kTrainPerClass = 5;
constexpr std::size_t kExamplesPerClass = 7;
constexpr std::size_t kPrefixLen = 24;
constexpr std::size_t kSuffixLen = 40;
constexpr double kLengthJitter = 0.10;
constexpr double kPhaseJitter = 0.15;
constexpr double kAmpJitter = 0.10;
constexpr double kFrameNoise = 0.12;

struct SegmentParams {
    struct Component {
        double amp, period, phase;
    };
    std::array<double, kChannels> bias;
    std::array<std::array<Component, 2>, kChannels> comps;
};

SegmentParams random_segment(Rng& rng) {
    SegmentParams p;
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
        p.bias[ch] = rng.gaussian(0.0, 0.4);
        for (auto& c : p.comps[ch]) {
            c.amp = 0.35 + 0.65 * rng.uniform01();
            c.period = 6.0 + 26.0 * rng.uniform01();
            c.phase = 2.0 * std::numbers::pi * rng.uniform01();
        }
    }
    return p;
}

SegmentParams jitter_segment(const SegmentParams& base, Rng& rng, double jitter) {
    SegmentParams p = base;
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
        for (auto& c : p.comps[ch]) {
            c.amp *= 1.0 + rng.gaussian(0.0, kAmpJitter * jitter);
            c.phase += rng.gaussian(0.0, kPhaseJitter * jitter);
        }
    }
    return p;
}

void append_segment(std::vector<Vector>& frames, const SegmentParams& p, std::size_t length,
                    double warp, Rng& rng, double noise) {
    for (std::size_t t = 0; t < length; ++t) {
        Vector frame(kChannels);
        const double tw = static_cast<double>(t) * warp;
        for (std::size_t ch = 0; ch < kChannels; ++ch) {
            double x = p.bias[ch];
            for (const auto& c : p.comps[ch]) {
                x += c.amp * std::sin(2.0 * std::numbers::pi * tw / c.period + c.phase);
            }
            frame[ch] = x + (noise > 0.0 ? rng.gaussian(0.0, noise) : 0.0);
        }
        frames.push_back(std::move(frame));
    }
}

std::size_t jittered_length(std::size_t base, Rng& rng, double jitter) {
    const double f = 1.0 + jitter * (2.0 * rng.uniform01() - 1.0);
    const double len = std::max(4.0, std::round(static_cast<double>(base) * f));
    return static_cast<std::size_t>(len);
}

}  // namespace

WordlikeDataset synth_wordlike(std::uint64_t seed) {
    Rng master(seed);
    std::array<SegmentParams, kClusters> suffixes;
    for (auto& s : suffixes) {
        s = random_segment(master);
    }
    std::array<SegmentParams, kClasses> prefixes;
    for (auto& p : prefixes) {
        p = random_segment(master);
    }

    WordlikeDataset set;
    set.data.class_count = kClasses;
    for (std::size_t cls = 0; cls < kClasses; ++cls) {
        set.classes.push_back("c" + std::to_string(cls / kWordsPerCluster) + "w" +
                              std::to_string(cls % kWordsPerCluster));
        for (std::size_t ex = 0; ex < kExamplesPerClass; ++ex) {
            Rng rng(derive_seed(seed, 1 + cls * kExamplesPerClass + ex));
            const std::size_t prefix_len = jittered_length(kPrefixLen, rng, kLengthJitter);
            const std::size_t suffix_len = jittered_length(kSuffixLen, rng, kLengthJitter);
            const double warp_p = static_cast<double>(kPrefixLen) / prefix_len;
            const double warp_s = static_cast<double>(kSuffixLen) / suffix_len;
            const SegmentParams prefix = jitter_segment(prefixes[cls], rng);
            const SegmentParams suffix = jitter_segment(suffixes[cls / kWordsPerCluster], rng);

            LabeledSequence seq;
            seq.label = cls;
            append_segment(seq.frames, prefix, prefix_len, warp_p, rng, kFrameNoise);
            append_segment(seq.frames, suffix, suffix_len, warp_s, rng, kFrameNoise);
            if (ex < kTrainPerClass) {
                set.data.train.push_back(std::move(seq));
            } else {
                set.data.test.push_back(std::move(seq));
            }
        }
    }
    return set;
}

std::filesystem::path write_wordlike_dataset(std::uint64_t seed,
                                             const std::filesystem::path& dir) {
    const WordlikeDataset set = synth_wordlike(seed);
    std::filesystem::create_directories(dir);

    DatasetManifest manifest;
    manifest.task = "classification";
    manifest.classes = set.classes;
    std::array<std::size_t, kClasses> train_seen{};
    std::array<std::size_t, kClasses> test_seen{};
    for (const auto& seq : set.data.train) {
        const std::string name =
            "c" + std::to_string(seq.label) + "_e" + std::to_string(train_seen[seq.label]++) +
            ".csv";
        save_sequence(dir / name, seq.frames);
        manifest.train.push_back({name, set.classes[seq.label]});
    }
    for (const auto& seq : set.data.test) {
        const std::string name = "c" + std::to_string(seq.label) + "_e" +
                                 std::to_string(kTrainPerClass + test_seen[seq.label]++) + ".csv";
        save_sequence(dir / name, seq.frames);
        manifest.test.push_back({name, set.classes[seq.label]});
    }
    const auto manifest_path = dir / "manifest.json";
    save_manifest(manifest_path, manifest);
    return manifest_path;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

std::string activation_name(OutputActivation act) {
    return act == OutputActivation::Identity ? "identity" : "softmax";
}

OutputActivation activation_from_name(const std::string& name,
                                      const std::filesystem::path& path) {
    if (name == "identity") {
        return OutputActivation::Identity;
    }
    if (name == "softmax") {
        return OutputActivation::Softmax;
    }
    throw std::runtime_error(path.string() + ": unknown activation '" + name + "'");
}

}  // namespace

Checkpoint make_checkpoint(SequenceModel& model, std::optional<NormStats> norm,
                           std::vector<std::string> classes, std::uint64_t seed) {
    Checkpoint ckpt;
    ckpt.kind = model.kind();
    ckpt.activation = model.output_activation();
    ckpt.input_size = model.input_size();
    ckpt.output_size = model.output_size();
    ckpt.hidden = model.hidden_size();
    if (auto* cw = dynamic_cast<CwRnn*>(&model)) {
        ckpt.clock_sizes = cw->params().spec.sizes();
        ckpt.clock_periods = cw->params().spec.periods();
    }
    for (const auto& block : model.param_blocks()) {
        ckpt.weights.push_back({block.name, block.rows, block.cols,
                                std::vector<double>(block.data.begin(), block.data.end())});
    }
    ckpt.norm = std::move(norm);
    ckpt.classes = std::move(classes);
    ckpt.seed = seed;
    return ckpt;
}

std::unique_ptr<SequenceModel> model_from_checkpoint(const Checkpoint& ckpt) {
    std::unique_ptr<SequenceModel> model;
    if (ckpt.kind == "cwrnn") {
        ClockSpec spec(ckpt.clock_sizes, ckpt.clock_periods);
        model = std::make_unique<CwRnn>(std::move(spec), ckpt.input_size, ckpt.output_size,
                                        ckpt.activation);
    } else if (ckpt.kind == "srn") {
        model = std::make_unique<Srn>(ckpt.hidden, ckpt.input_size, ckpt.output_size,
                                      ckpt.activation);
    } else if (ckpt.kind == "lstm") {
        model = std::make_unique<Lstm>(ckpt.hidden, ckpt.input_size, ckpt.output_size,
                                       ckpt.activation);
    } else {
        throw std::runtime_error("checkpoint has unknown model kind '" + ckpt.kind + "'");
    }
    auto blocks = model->param_blocks();
    for (const auto& stored : ckpt.weights) {
        const auto it = std::find_if(blocks.begin(), blocks.end(),
                                     [&](const NamedBlock& b) { return b.name == stored.name; });
        if (it == blocks.end()) {
            throw std::runtime_error("checkpoint block '" + stored.name +
                                     "' does not exist in a " + ckpt.kind + " model");
        }
        if (it->data.size() != stored.values.size()) {
            throw std::runtime_error("checkpoint block '" + stored.name + "' has " +
                                     std::to_string(stored.values.size()) + " values, expected " +
                                     std::to_string(it->data.size()));
        }
        std::copy(stored.values.begin(), stored.values.end(), it->data.begin());
    }
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    json j;
    j["kind"] = ckpt.kind;
    j["activation"] = activation_name(ckpt.activation);
    j["input_size"] = ckpt.input_size;
    j["output_size"] = ckpt.output_size;
    j["hidden"] = ckpt.hidden;
    j["seed"] = ckpt.seed;
    j["classes"] = ckpt.classes;
    if (!ckpt.clock_sizes.empty()) {
        j["clock"] = {{"sizes", ckpt.clock_sizes}, {"periods", ckpt.clock_periods}};
    } else {
        j["clock"] = nullptr;
    }
    if (ckpt.norm) {
        j["norm"] = {{"mean", ckpt.norm->mean}, {"std", ckpt.norm->std}};
    } else {
        j["norm"] = nullptr;
    }
    json weights = json::object();
    for (const auto& block : ckpt.weights) {
        if (block.cols == 0) {
            weights[block.name] = block.values;
        } else {
            json rows = json::array();
            for (std::size_t r = 0; r < block.rows; ++r) {
                json row = json::array();
                for (std::size_t c = 0; c < block.cols; ++c) {
                    row.push_back(block.values[r * block.cols + c]);
                }
                rows.push_back(std::move(row));
            }
            weights[block.name] = std::move(rows);
        }
    }
    j["weights"] = std::move(weights);
    write_canonical_json(path, j);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    Checkpoint ckpt;
    try {
        ckpt.kind = j.at("kind").get<std::string>();
        ckpt.activation = activation_from_name(j.at("activation").get<std::string>(), path);
        ckpt.input_size = j.at("input_size").get<std::size_t>();
        ckpt.output_size = j.at("output_size").get<std::size_t>();
        ckpt.hidden = j.at("hidden").get<std::size_t>();
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("classes")) {
            ckpt.classes = j.at("classes").get<std::vector<std::string>>();
        }
        if (j.contains("clock") && !j.at("clock").is_null()) {
            ckpt.clock_sizes = j.at("clock").at("sizes").get<std::vector<std::size_t>>();
            ckpt.clock_periods = j.at("clock").at("periods").get<std::vector<std::uint64_t>>();
        }
        if (j.contains("norm") && !j.at("norm").is_null()) {
            NormStats stats;
            stats.mean = j.at("norm").at("mean").get<Vector>();
            stats.std = j.at("norm").at("std").get<Vector>();
            ckpt.norm = std::move(stats);
        }
        for (const auto& [name, value] : j.at("weights").items()) {
            WeightBlock block;
            block.name = name;
            if (!value.empty() && value.front().is_array()) {
                block.rows = value.size();
                block.cols = value.front().size();
                for (const auto& row : value) {
                    for (const auto& x : row) {
                        block.values.push_back(x.get<double>());
                    }
                }
            } else {
                block.rows = value.size();
                block.cols = 0;
                block.values = value.get<std::vector<double>>();
            }
            if (!all_finite(block.values)) {
                throw std::runtime_error("non-finite weight in block '" + name + "'");
            }
            ckpt.weights.push_back(std::move(block));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": malformed checkpoint: " + e.what());
    }
    return ckpt;
}

}  // namespace cwrnn
