// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/chrono_text/chrono.hpp"
#include "dyad/grad/tensor.hpp"
#include "dyad/rational.hpp"

namespace dyad::metrics {

using Tokens = std::vector<std::string>;

/// Whitespace split, lowercased, with [PAUSE] / [LASTING] dropped.
Tokens tokenize(std::string_view text);

/// LCS-based F1; 0 when either side is empty.
double rouge_l(const Tokens& reference, const Tokens& hypothesis);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// Unique bigrams over all bigrams, pooled across hypotheses (bigrams never
/// cross hypothesis boundaries). 0 when there is no bigram.
double distinct_2(const std::vector<Tokens>& hypotheses);

struct GaussianStats {
  std::vector<double> mean;
  grad::Tensor cov;  // d x d
  std::size_t count = 0;

  std::size_t dim() const { return mean.size(); }
  /// Throws ContractError on shape problems, count < 2 or asymmetry.
  void validate() const;
};

/// Sample mean and unbiased covariance of the rows of `x` (n x d, n >= 2).
GaussianStats gaussian_stats(const grad::Tensor& x);

/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)), with the trace of the
/// product root taken from the symmetric form S_a^(1/2) S_b S_a^(1/2).
/// Slightly negative eigenvalues from round-off are clamped to zero.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct LagEstimate {
  bool defined = false;     // false when no lag had variance on both sides
  int lag = 0;              // audio trails mouth by `lag` frames when positive
  double correlation = 0.0; // Pearson correlation at `lag`
  bool weak = false;        // correlation below the caller's threshold
};

/// Lag in [-max_lag, max_lag] maximising the Pearson correlation between
/// mouth[t] and audio[t + lag] over their overlap. Ties go to the smaller
/// |lag|. Requires equal lengths >= 4; max_lag is capped at n - 3.
LagEstimate sync_lag(const std::vector<double>& mouth_open, const std::vector<double>& audio_energy, int max_lag = 8,
                     double min_correlation = 0.3);

/// Turn-taking counts for one or more dialogues. A speaker turn is a maximal
/// run of non-pause speaker frames; it ends at the first pause after it.
struct TurnTaking {
  std::size_t speech_frames = 0, listener_pause_in_speech = 0;
  std::size_t turn_ends = 0, answered_turn_ends = 0;  // word within the response window

  double pause_rate() const;
  double response_rate() const;
  TurnTaking& operator+=(const TurnTaking& o);
};

/// Listener word counts as a response when it starts in the frames
/// [end, end + window_seconds * fps). Turns still open at the last frame are
/// not counted. Streams must have equal length.
TurnTaking turn_taking(const std::vector<chrono::ChronoToken>& speaker,
                       const std::vector<chrono::ChronoToken>& listener, Rational fps, double window_seconds = 1.0);

}  // namespace dyad::metrics
