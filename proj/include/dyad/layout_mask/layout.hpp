// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Token layout of one model window and the attention visibility derived from
// it. A window is a block of static prompt tokens followed, for each frame,
// by four dynamic slots (visual and text for each participant).

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/grad/ops.hpp"

namespace dyad::layout {

enum class Stream : std::uint8_t { Static, DynVisual, DynText };
enum class Participant : std::uint8_t { Speaker, Listener, None };

inline constexpr std::int64_t kNoTimestamp = -1;

struct TokenTag {
  Stream stream = Stream::Static;
  Participant participant = Participant::None;
  std::int64_t timestamp = kNoTimestamp;
  std::size_t position = 0;

  bool is_static() const { return stream == Stream::Static; }
  friend bool operator==(const TokenTag&, const TokenTag&) = default;
};

/// Short label such as "S", "V(s,3)", "T(l,0)".
std::string tag_label(const TokenTag& tag);

struct SlotKind {
  Stream stream;
  Participant participant;
  friend bool operator==(const SlotKind&, const SlotKind&) = default;
};

/// Per-frame order of the four dynamic slots.
using InterleaveOrder = std::array<SlotKind, 4>;

/// V(s), V(l), T(s), T(l).
InterleaveOrder default_order();
/// Parses a comma list of Vs, Vl, Ts, Tl naming each slot exactly once.
InterleaveOrder parse_order(std::string_view text);
std::string order_str(const InterleaveOrder& order);
/// Index of `kind` inside `order`.
std::size_t slot_index(const InterleaveOrder& order, SlotKind kind);

struct SequenceLayout {
  std::vector<TokenTag> tags;

  std::size_t size() const { return tags.size(); }
  std::size_t n_static() const;
  /// Throws ValidationError unless positions are 0..n-1, statics come first,
  /// dynamic tags carry timestamps, and timestamps never decrease within a
  /// (stream, participant) pair.
  void validate() const;
};

/// n_static Static tags, then frames x 4 dynamic tags in `order`, with
/// timestamps first_timestamp, first_timestamp + 1, ...
SequenceLayout build_layout(std::size_t n_static, std::size_t frames, const InterleaveOrder& order = default_order(),
                            std::int64_t first_timestamp = 0);

/// Row-major n x n visibility; allowed(i, j) means token i may attend token j.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool allowed(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v = true) { bits_[i * n_ + j] = v ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  grad::VisibilityView view() const { return {bits_.data(), n_, n_}; }

  /// One line of '0'/'1' characters per row.
  std::string dump() const;

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Omni-attention visibility:
///  - every token sees itself;
///  - static tokens see earlier static tokens only;
///  - dynamic tokens see every static token and every dynamic token with a
///    strictly earlier timestamp;
///  - with same_time_visible, dynamic tokens also see same-timestamp tokens
///    at earlier positions.
AttentionMask build_omni_mask(const SequenceLayout& layout, bool same_time_visible = false);

/// Literal per-pair evaluation of the same rules, for cross-checking.
AttentionMask mask_oracle(const SequenceLayout& layout, bool same_time_visible = false);

}  // namespace dyad::layout
