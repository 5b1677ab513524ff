// Copyright (c) 2026 The cwrnn authors
// SPDX-License-Identifier: Apache-2.0
//
// File formats and bundled synthetic data. Sequences are CSV (one row per
// timestep, one column per channel, optional '#' header lines); manifests
// and checkpoints are canonical JSON: sorted keys, UTF-8, no trailing
// whitespace, reals printed with 17 significant digits so every file
// round-trips byte-identically.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cwrnn/model.hpp"
#include "cwrnn/numerics.hpp"
#include "cwrnn/training.hpp"

namespace cwrnn {

// ---------------------------------------------------------------------------
// Sequence CSV
// ---------------------------------------------------------------------------

// Rows must be rectangular finite reals; lines starting with '#' are
// skipped. Errors name the offending line number.
std::vector<Vector> load_sequence(const std::filesystem::path& path);
void save_sequence(const std::filesystem::path& path, std::span<const Vector> frames);

// ---------------------------------------------------------------------------
// Dataset manifests
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string path;                  // relative to the manifest's directory
    std::optional<std::string> label;  // class name; classification only
};

struct DatasetManifest {
    std::string task;  // "generation" | "classification"
    std::vector<ManifestEntry> train;
    std::vector<ManifestEntry> test;
    std::vector<std::string> classes;  // label universe; classification only
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

enum class Phase { Train, Test };

// Loads the sequences of one split. Files of the other split are never
// opened, so training runs cannot touch test data by construction.
std::vector<LabeledSequence> load_split(const DatasetManifest& manifest,
                                        const std::filesystem::path& manifest_dir, Phase phase);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

struct NormStats {
    Vector mean;  // per channel
    Vector std;   // per channel, population convention (divide by N)
};

// Fits per-channel statistics over every frame of the training sequences.
// A constant channel is an error.
NormStats fit_normalization(std::span<const LabeledSequence> train);
std::vector<Vector> apply_normalization(const NormStats& stats,
                                        const std::vector<Vector>& frames);
void normalize_in_place(const NormStats& stats, std::vector<LabeledSequence>& set);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

// Deterministic audio-like target: a sum of 3-5 random-phase sinusoids
// under a mild amplitude envelope, rescaled so max |x| = 1. One channel.
std::vector<Vector> synth_waveform(std::uint64_t seed, std::size_t length = 320);

inline constexpr std::uint64_t kDefaultWaveformSeed = 7;
inline constexpr std::uint64_t kDefaultWordsSeed = 7;

// Suffix-cluster classification set: 25 classes in 5 clusters of 5, with
// 13 channels and 7 examples per class (5 train / 2 test). Classes in one
// cluster share their suffix trajectory generator exactly; only the
// prefix identifies the class, so correct classification requires
// remembering early-sequence information across the whole suffix.
struct WordlikeDataset {
    ClassDataset data;                 // unnormalized
    std::vector<std::string> classes;  // size 25, cluster-major order
    std::size_t cluster_count = 5;
    std::size_t cluster_of(std::size_t label) const { return label / 5; }
};

// jitter scales the per-example variation (1 = bundled dataset, 0 = clean
// segment trajectories, useful for inspecting the construction).
WordlikeDataset synth_wordlike(std::uint64_t seed, double jitter = 1.0);

// Writes the generated set as sequence CSVs plus a manifest under dir,
// returning the manifest path. Regeneration with the same seed reproduces
// every file byte for byte.
std::filesystem::path write_wordlike_dataset(std::uint64_t seed,
                                             const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct WeightBlock {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;  // 0 for plain vectors
    std::vector<double> values;
};

struct Checkpoint {
    std::string kind;  // "cwrnn" | "srn" | "lstm"
    OutputActivation activation = OutputActivation::Identity;
    std::size_t input_size = 0;
    std::size_t output_size = 0;
    std::size_t hidden = 0;
    std::vector<std::size_t> clock_sizes;      // cwrnn only
    std::vector<std::uint64_t> clock_periods;  // cwrnn only
    std::vector<WeightBlock> weights;
    std::optional<NormStats> norm;
    std::vector<std::string> classes;  // classification only
    std::uint64_t seed = 0;
};

Checkpoint make_checkpoint(SequenceModel& model, std::optional<NormStats> norm,
                           std::vector<std::string> classes, std::uint64_t seed);
std::unique_ptr<SequenceModel> model_from_checkpoint(const Checkpoint& ckpt);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cwrnn
