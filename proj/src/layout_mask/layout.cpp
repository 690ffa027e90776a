// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/layout_mask/layout.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "dyad/error.hpp"

namespace dyad::layout {

std::string tag_label(const TokenTag& tag) {
  if (tag.is_static()) return "S";
  std::string out = tag.stream == Stream::DynVisual ? "V(" : "T(";
  out += tag.participant == Participant::Speaker ? "s," : "l,";
  out += std::to_string(tag.timestamp);
  out += ')';
  return out;
}

InterleaveOrder default_order() {
  return {SlotKind{Stream::DynVisual, Participant::Speaker}, SlotKind{Stream::DynVisual, Participant::Listener},
          SlotKind{Stream::DynText, Participant::Speaker}, SlotKind{Stream::DynText, Participant::Listener}};
}

namespace {

std::string_view slot_code(SlotKind k) {
  if (k.stream == Stream::DynVisual) return k.participant == Participant::Speaker ? "Vs" : "Vl";
  return k.participant == Participant::Speaker ? "Ts" : "Tl";
}

}  // namespace

InterleaveOrder parse_order(std::string_view text) {
  InterleaveOrder out{};
  std::size_t count = 0;
  std::uint8_t seen = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find(',', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(begin, end - begin);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    std::size_t code = 4;
    for (std::size_t k = 0; k < 4; ++k) {
      if (item == slot_code(default_order()[k])) code = k;
    }
    if (code == 4 || (seen & (1u << code)) || count == 4) {
      throw ConfigError("bad interleave order '" + std::string(text) + "' (expected a permutation of Vs,Vl,Ts,Tl)");
    }
    seen |= static_cast<std::uint8_t>(1u << code);
    out[count++] = default_order()[code];
    begin = end + 1;
  }
  if (count != 4) throw ConfigError("bad interleave order '" + std::string(text) + "'");
  return out;
}

std::string order_str(const InterleaveOrder& order) {
  std::string out;
  for (std::size_t k = 0; k < 4; ++k) {
    if (k) out += ',';
    out += slot_code(order[k]);
  }
  return out;
}

std::size_t slot_index(const InterleaveOrder& order, SlotKind kind) {
  for (std::size_t k = 0; k < 4; ++k) {
    if (order[k] == kind) return k;
  }
  throw ContractError("slot kind missing from interleave order");
}

std::size_t SequenceLayout::n_static() const {
  return static_cast<std::size_t>(
      std::count_if(tags.begin(), tags.end(), [](const TokenTag& t) { return t.is_static(); }));
}

void SequenceLayout::validate() const {
  std::map<std::pair<Stream, Participant>, std::int64_t> last_ts;
  bool seen_dynamic = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const TokenTag& t = tags[i];
    if (t.position != i) throw ValidationError("layout position gap at index " + std::to_string(i));
    if (t.is_static()) {
      if (seen_dynamic) throw ValidationError("static token after dynamic tokens at " + std::to_string(i));
      if (t.timestamp != kNoTimestamp) throw ValidationError("static token with timestamp at " + std::to_string(i));
      continue;
    }
    seen_dynamic = true;
    if (t.timestamp < 0) throw ValidationError("dynamic token without timestamp at " + std::to_string(i));
    if (t.participant == Participant::None) throw ValidationError("dynamic token without participant");
    auto [it, fresh] = last_ts.try_emplace({t.stream, t.participant}, t.timestamp);
    if (!fresh) {
      if (t.timestamp < it->second) throw ValidationError("timestamps decrease at " + std::to_string(i));
      it->second = t.timestamp;
    }
  }
}

SequenceLayout build_layout(std::size_t n_static, std::size_t frames, const InterleaveOrder& order,
                            std::int64_t first_timestamp) {
  SequenceLayout out;
  out.tags.reserve(n_static + 4 * frames);
  for (std::size_t i = 0; i < n_static; ++i) out.tags.push_back({Stream::Static, Participant::None, kNoTimestamp, i});
  for (std::size_t f = 0; f < frames; ++f) {
    for (const SlotKind& k : order) {
      out.tags.push_back({k.stream, k.participant, first_timestamp + static_cast<std::int64_t>(f), out.tags.size()});
    }
  }
  return out;
}

std::string AttentionMask::dump() const {
  std::string out;
  out.reserve(n_ * (n_ + 1));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out += allowed(i, j) ? '1' : '0';
    out += '\n';
  }
  return out;
}

AttentionMask build_omni_mask(const SequenceLayout& layout, bool same_time_visible) {
  const std::size_t n = layout.size();
  AttentionMask mask(n);
  std::vector<std::size_t> statics, dynamics;
  for (const TokenTag& t : layout.tags) (t.is_static() ? statics : dynamics).push_back(t.position);
  // Dynamic tokens grouped by timestamp; each row sees a prefix of groups.
  std::stable_sort(dynamics.begin(), dynamics.end(),
                   [&](std::size_t a, std::size_t b) { return layout.tags[a].timestamp < layout.tags[b].timestamp; });

  for (std::size_t i = 0; i < n; ++i) {
    const TokenTag& row = layout.tags[i];
    mask.set(i, i);
    if (row.is_static()) {
      for (std::size_t j : statics) {
        if (j < i) mask.set(i, j);
      }
      continue;
    }
    for (std::size_t j : statics) mask.set(i, j);
    for (std::size_t j : dynamics) {
      const std::int64_t ts = layout.tags[j].timestamp;
      if (ts > row.timestamp) break;
      if (ts < row.timestamp || (same_time_visible && j < i)) mask.set(i, j);
    }
  }
  return mask;
}

AttentionMask mask_oracle(const SequenceLayout& layout, bool same_time_visible) {
  const std::size_t n = layout.size();
  AttentionMask mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const TokenTag& a = layout.tags[i];
      const TokenTag& b = layout.tags[j];
      bool ok = false;
      if (i == j) {
        ok = true;
      } else if (a.is_static()) {
        ok = b.is_static() && b.position < a.position;
      } else if (b.is_static()) {
        ok = true;
      } else if (b.timestamp < a.timestamp) {
        ok = true;
      } else if (b.timestamp == a.timestamp) {
        ok = same_time_visible && b.position < a.position;
      }
      mask.set(i, j, ok);
    }
  }
  return mask;
}

}  // namespace dyad::layout
