// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Frame-aligned text markup.
//
// A word-timestamped transcript becomes one token per video frame: the frame
// where a word starts holds the word itself, the frames it continues through
// hold [LASTING], and frames with no active word hold [PAUSE]. Text and video
// streams then have the same length and the text carries its own timing.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/rational.hpp"

namespace dyad::chrono {

inline constexpr std::string_view kPauseMarker = "[PAUSE]";
inline constexpr std::string_view kLastingMarker = "[LASTING]";

enum class Channel { Speaker, Listener };

std::string_view channel_name(Channel ch);
Channel parse_channel(std::string_view name);

struct TimedWord {
  std::string text;
  double start = 0.0;  // seconds
  double end = 0.0;    // seconds, > start

  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};
std::ostream& operator<<(std::ostream& os, const TimedWord& w);

struct TimedTranscript {
  std::vector<TimedWord> words;
  Channel channel = Channel::Speaker;

  friend bool operator==(const TimedTranscript&, const TimedTranscript&) = default;
};
std::ostream& operator<<(std::ostream& os, const TimedTranscript& t);

struct ChronoToken {
  enum class Kind { Word, Pause, Lasting };

  Kind kind = Kind::Pause;
  std::string text;  // only for Word

  static ChronoToken word(std::string w) { return {Kind::Word, std::move(w)}; }
  static ChronoToken pause() { return {Kind::Pause, {}}; }
  static ChronoToken lasting() { return {Kind::Lasting, {}}; }

  bool is_word() const { return kind == Kind::Word; }
  bool is_pause() const { return kind == Kind::Pause; }
  bool is_lasting() const { return kind == Kind::Lasting; }
  /// "[PAUSE]", "[LASTING]" or the word itself.
  std::string_view spelling() const;

  friend bool operator==(const ChronoToken&, const ChronoToken&) = default;
};

struct MarkedTokenStream {
  std::vector<ChronoToken> tokens;
  Rational fps{25};
  Channel channel = Channel::Speaker;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const MarkedTokenStream&, const MarkedTokenStream&) = default;
};
std::ostream& operator<<(std::ostream& os, const MarkedTokenStream& s);

struct StreamViolation {
  std::size_t position = 0;
  std::string reason;
};

/// Frame holding time t: floor(t * fps), with a 1e-9 frame tolerance so that
/// decimal timestamps landing exactly on a frame boundary are not pushed back
/// one frame by binary rounding.
std::int64_t frame_of(double seconds, Rational fps);
/// Last frame a word ending at `seconds` still occupies: the last frame whose
/// start time lies strictly before the end.
std::int64_t last_frame_before(double seconds, Rational fps);
double frame_time(std::int64_t frame, Rational fps);

/// Throws ValidationError for empty/whitespace/marker-spelled words, bad
/// times, unsorted or overlapping words.
void validate_transcript(const TimedTranscript& transcript);

/// Output has exactly n_frames tokens. When several words quantize to one
/// frame, later words move forward to the next frame not already holding a
/// Word token; a word whose span rounds to nothing still occupies its start
/// frame. Throws RangeError when a word falls outside [0, n_frames / fps].
MarkedTokenStream encode_transcript(const TimedTranscript& transcript, Rational fps, std::size_t n_frames);

/// Each run [Word, Lasting...] starting at frame i with length L becomes
/// TimedWord(start = i / fps, end = (i + L) / fps). Throws ValidationError on
/// a malformed stream.
TimedTranscript decode_stream(const MarkedTokenStream& stream);

/// Positions violating the adjacency rules; empty iff the stream is valid.
std::vector<StreamViolation> validate_stream(const MarkedTokenStream& stream);
std::vector<StreamViolation> validate_tokens(const std::vector<ChronoToken>& tokens);

/// Whitespace-separated spellings, markers verbatim.
std::string to_text(const MarkedTokenStream& stream);
MarkedTokenStream parse_stream(std::string_view text, Rational fps, Channel channel);

/// Words of the stream in order, markers dropped.
std::vector<std::string> words_of(const std::vector<ChronoToken>& tokens);

/// Transcript JSON-lines: one {"t","s","e","ch"} object per word.
struct ChannelPair {
  TimedTranscript speaker{{}, Channel::Speaker};
  TimedTranscript listener{{}, Channel::Listener};
};
ChannelPair read_transcript_jsonl(std::istream& in);
ChannelPair read_transcript_file(const std::string& path);
void write_transcript_jsonl(std::ostream& out, const TimedTranscript& transcript);

}  // namespace dyad::chrono
