// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Toy audio codec: token v is a sine burst at base_hz + v * step_hz lasting
// one token slot (1 / (fps * r) seconds). Slot boundaries are computed with
// exact rational arithmetic, so n tokens always span
// floor(n * sample_rate / (fps * r)) samples.

#include <cstdint>
#include <string>
#include <vector>

#include "dyad/rational.hpp"

namespace dyad::voice {

struct CodecSpec {
  std::int64_t sample_rate = 16000;
  Rational fps{25};
  Rational tokens_per_frame{2};
  double base_hz = 200.0;
  double step_hz = 100.0;
  double amplitude = 0.5;
  std::size_t audio_vocab = 64;

  /// Sample index where token slot `mu` begins.
  std::int64_t boundary(std::int64_t mu) const;
  double frequency(std::int32_t token) const { return base_hz + step_hz * token; }
  /// Throws ConfigError when the highest token frequency reaches Nyquist or
  /// a slot is too short to separate neighbouring tones.
  void validate() const;
};

std::vector<double> toy_decode(const std::vector<std::int32_t>& tokens, const CodecSpec& spec);

/// Goertzel power at every token frequency per slot; the strongest wins.
std::vector<std::int32_t> detect_tokens(const std::vector<double>& wave, std::size_t n_tokens, const CodecSpec& spec);

/// 16-bit PCM mono RIFF/WAVE.
std::vector<std::uint8_t> wav_bytes(const std::vector<double>& wave, std::int64_t sample_rate);
void write_wav(const std::string& path, const std::vector<double>& wave, std::int64_t sample_rate);
/// Samples scaled back to [-1, 1]; throws ValidationError on a non-PCM16 mono file.
std::vector<double> read_wav(const std::string& path, std::int64_t* sample_rate = nullptr);

}  // namespace dyad::voice
