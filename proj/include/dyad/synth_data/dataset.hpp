// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// On-disk datasets: a JSON-lines manifest (one conversation per line) next to
// binary facial streams and JSON audio-token arrays.
//
// Facial stream file: magic "DYADFACE", uint64 LE frame count, then
// frames x 64 little-endian float32.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dyad/synth_data/synth.hpp"

namespace dyad::synth {

enum class Split { Train, Val, Test };
std::string_view split_name(Split s);
Split parse_split(std::string_view s);

struct ManifestRecord {
  std::string id;
  Split split = Split::Train;
  Rational fps{10};
  std::size_t frames = 0;
  std::string speaker_faces;   // path relative to the manifest
  std::string listener_faces;
  chrono::TimedTranscript speaker_words{{}, chrono::Channel::Speaker};
  chrono::TimedTranscript listener_words{{}, chrono::Channel::Listener};
  std::string listener_audio_tokens;  // path to a JSON array
  Rational audio_tokens_per_frame{2};
  std::vector<double> voiceprint;
  std::string topic;
  std::size_t line = 0;
};

struct Manifest {
  std::string root;  // directory holding the manifest
  std::vector<ManifestRecord> records;

  std::size_t count(Split s) const;
  /// Reads the facial and audio files of one record.
  DyadSample load_sample(std::size_t index) const;
  std::vector<DyadSample> load_split(Split s) const;
};

/// Validates every record; errors name the line (and word position).
Manifest load_manifest(const std::string& path);

void write_faces(const std::string& path, const grad::Tensor& faces);
grad::Tensor read_faces(const std::string& path);

/// Sizes for n items under integer weights: every split but the last gets
/// floor(n * w / sum), the last takes the remainder (696 at 6:2:2 gives
/// 417 / 139 / 140).
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<std::size_t, 3>& weights);
/// Seeded shuffle, then consecutive blocks of split_sizes().
std::vector<Split> split_dataset(std::size_t n, const std::array<std::size_t, 3>& weights, std::uint64_t seed);

/// Writes faces, audio arrays and manifest.jsonl into `dir`.
void write_dataset(const std::string& dir, const std::vector<DyadSample>& samples, const std::vector<Split>& splits);

}  // namespace dyad::synth
