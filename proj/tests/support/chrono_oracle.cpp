// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "chrono_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace dyad::testing {

using chrono::TimedTranscript;
using chrono::TimedWord;

namespace {

// Independent of chrono::frame_of: exact rational arithmetic on a long double
// time rounded to nanoseconds.
std::int64_t quantize_floor(double seconds, Rational fps) {
  const long double ns = std::llround(static_cast<long double>(seconds) * 1e9L);
  const long double num = ns * fps.num();
  const long double den = 1e9L * fps.den();
  return static_cast<std::int64_t>(std::floor(num / den));
}

std::int64_t quantize_ceil(double seconds, Rational fps) {
  const long double ns = std::llround(static_cast<long double>(seconds) * 1e9L);
  return static_cast<std::int64_t>(std::ceil(ns * fps.num() / (1e9L * fps.den())));
}

}  // namespace

std::optional<TimedTranscript> occupancy_oracle(const TimedTranscript& t, Rational fps, std::size_t n_frames) {
  const std::size_t m = t.words.size();
  std::vector<std::int64_t> assigned(m), natural_end(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t best = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      best = std::max(best, quantize_floor(t.words[j].start, fps) + static_cast<std::int64_t>(i - j));
    }
    assigned[i] = best;
    natural_end[i] = quantize_ceil(t.words[i].end, fps) - 1;
    if (best >= static_cast<std::int64_t>(n_frames)) return std::nullopt;
  }
  // Per-frame occupant: the word with the greatest assigned start <= f, if
  // the frame lies inside that word's span.
  std::vector<std::int64_t> owner(n_frames, -1);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const auto fi = static_cast<std::int64_t>(f);
    std::int64_t latest = -1;
    for (std::size_t i = 0; i < m; ++i) {
      if (assigned[i] <= fi) latest = static_cast<std::int64_t>(i);
    }
    if (latest >= 0) {
      const auto k = static_cast<std::size_t>(latest);
      if (fi <= std::max(assigned[k], natural_end[k])) owner[f] = latest;
    }
  }
  TimedTranscript out;
  out.channel = t.channel;
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t last = -1;
    for (std::size_t f = 0; f < n_frames; ++f) {
      if (owner[f] == static_cast<std::int64_t>(i)) last = static_cast<std::int64_t>(f);
    }
    const auto seconds = [&](std::int64_t f) {
      return static_cast<double>(f) * static_cast<double>(fps.den()) / static_cast<double>(fps.num());
    };
    out.words.push_back({t.words[i].text, seconds(assigned[i]), seconds(last + 1)});
  }
  return out;
}

TimedTranscript random_transcript(std::mt19937_64& rng, Rational fps, std::size_t n_frames, bool dense) {
  static const char* kWords[] = {"hi", "ok", "yes", "no", "sure", "right", "well", "so", "and", "the"};
  const double duration = static_cast<double>(n_frames) * fps.den() / fps.num();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double frame = 1.0 / fps.to_double();
  TimedTranscript tr;
  double cursor = unit(rng) * frame * 3.0;
  while (true) {
    const double gap = dense ? unit(rng) * frame * 0.3 : unit(rng) * frame * 4.0;
    const double len = dense ? 1e-4 + unit(rng) * frame * 0.5 : 1e-3 + unit(rng) * frame * 5.0;
    const double start = cursor + gap;
    const double end = start + len;
    if (end > duration * (dense ? 0.5 : 0.8)) break;
    tr.words.push_back({kWords[rng() % 10], start, end});
    cursor = end;
  }
  return tr;
}

std::vector<chrono::ChronoToken> random_valid_tokens(std::mt19937_64& rng, std::size_t n) {
  std::vector<chrono::ChronoToken> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rng() % 3;
    if (r == 0 || (r == 2 && (i == 0 || out.back().is_pause()))) {
      out.push_back(chrono::ChronoToken::pause());
    } else if (r == 1) {
      out.push_back(chrono::ChronoToken::word("w" + std::to_string(rng() % 5)));
    } else {
      out.push_back(chrono::ChronoToken::lasting());
    }
  }
  return out;
}

}  // namespace dyad::testing
