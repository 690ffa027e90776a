// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/chrono_text/chrono.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dyad/error.hpp"

namespace dyad::chrono {
namespace {

constexpr double kFrameTolerance = 1e-9;

double frames_at(double seconds, Rational fps) {
  return seconds * static_cast<double>(fps.num()) / static_cast<double>(fps.den());
}

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const TimedWord& w) {
  return os << w.text << '[' << w.start << ", " << w.end << ']';
}

std::ostream& operator<<(std::ostream& os, const TimedTranscript& t) {
  os << channel_name(t.channel) << ':';
  for (const auto& w : t.words) os << ' ' << w;
  return os;
}

std::ostream& operator<<(std::ostream& os, const MarkedTokenStream& s) { return os << to_text(s); }

std::string_view channel_name(Channel ch) { return ch == Channel::Speaker ? "speaker" : "listener"; }

Channel parse_channel(std::string_view name) {
  if (name == "speaker") return Channel::Speaker;
  if (name == "listener") return Channel::Listener;
  throw ValidationError("unknown channel '" + std::string(name) + "'");
}

std::string_view ChronoToken::spelling() const {
  switch (kind) {
    case Kind::Pause:
      return kPauseMarker;
    case Kind::Lasting:
      return kLastingMarker;
    case Kind::Word:
      break;
  }
  return text;
}

std::int64_t frame_of(double seconds, Rational fps) {
  return static_cast<std::int64_t>(std::floor(frames_at(seconds, fps) + kFrameTolerance));
}

std::int64_t last_frame_before(double seconds, Rational fps) {
  return static_cast<std::int64_t>(std::ceil(frames_at(seconds, fps) - kFrameTolerance)) - 1;
}

double frame_time(std::int64_t frame, Rational fps) {
  return static_cast<double>(frame) * static_cast<double>(fps.den()) / static_cast<double>(fps.num());
}

void validate_transcript(const TimedTranscript& transcript) {
  const auto& words = transcript.words;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const TimedWord& w = words[i];
    const std::string where = "word " + std::to_string(i) + " ('" + w.text + "')";
    if (w.text.empty()) throw ValidationError(where + ": empty text");
    if (has_space(w.text)) throw ValidationError(where + ": contains whitespace");
    if (w.text == kPauseMarker || w.text == kLastingMarker) throw ValidationError(where + ": spelled like a marker");
    if (!std::isfinite(w.start) || !std::isfinite(w.end)) throw ValidationError(where + ": non-finite time");
    if (w.start < 0.0) throw ValidationError(where + ": negative start");
    if (!(w.end > w.start)) throw ValidationError(where + ": end must be after start");
    if (i > 0 && w.start < words[i - 1].end) {
      throw ValidationError(where + ": overlaps or precedes the previous word");
    }
  }
}

MarkedTokenStream encode_transcript(const TimedTranscript& transcript, Rational fps, std::size_t n_frames) {
  if (!fps.positive()) throw ContractError("fps must be positive");
  validate_transcript(transcript);
  MarkedTokenStream out;
  out.fps = fps;
  out.channel = transcript.channel;
  out.tokens.assign(n_frames, ChronoToken::pause());
  const auto n = static_cast<std::int64_t>(n_frames);
  const double limit = static_cast<double>(n_frames);

  std::int64_t last_word_frame = -1;
  for (const TimedWord& w : transcript.words) {
    std::int64_t first = frame_of(w.start, fps);
    if (first >= n || frames_at(w.end, fps) > limit + kFrameTolerance) {
      throw RangeError("word '" + w.text + "' [" + std::to_string(w.start) + ", " + std::to_string(w.end) +
                       "] lies outside " + std::to_string(n_frames) + " frames at " + fps.str() + " fps");
    }
    first = std::max(first, last_word_frame + 1);
    if (first >= n) {
      throw RangeError("word '" + w.text + "' spills past the last frame");
    }
    const std::int64_t last = std::min(std::max(last_frame_before(w.end, fps), first), n - 1);
    out.tokens[static_cast<std::size_t>(first)] = ChronoToken::word(w.text);
    for (std::int64_t f = first + 1; f <= last; ++f) out.tokens[static_cast<std::size_t>(f)] = ChronoToken::lasting();
    last_word_frame = first;
  }
  return out;
}

std::vector<StreamViolation> validate_tokens(const std::vector<ChronoToken>& tokens) {
  std::vector<StreamViolation> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const ChronoToken& t = tokens[i];
    if (t.is_lasting()) {
      if (i == 0) {
        out.push_back({i, "[LASTING] at stream start"});
      } else if (tokens[i - 1].is_pause()) {
        out.push_back({i, "[LASTING] directly after [PAUSE]"});
      }
    } else if (t.is_word()) {
      if (t.text.empty() || has_space(t.text)) out.push_back({i, "malformed word token"});
    }
  }
  return out;
}

std::vector<StreamViolation> validate_stream(const MarkedTokenStream& stream) {
  return validate_tokens(stream.tokens);
}

TimedTranscript decode_stream(const MarkedTokenStream& stream) {
  const auto violations = validate_stream(stream);
  if (!violations.empty()) {
    throw ValidationError("malformed marked stream at position " + std::to_string(violations.front().position) +
                          ": " + violations.front().reason);
  }
  TimedTranscript out;
  out.channel = stream.channel;
  const auto& tokens = stream.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens[i].is_word()) continue;
    std::size_t j = i + 1;
    while (j < tokens.size() && tokens[j].is_lasting()) ++j;
    out.words.push_back({tokens[i].text, frame_time(static_cast<std::int64_t>(i), stream.fps),
                         frame_time(static_cast<std::int64_t>(j), stream.fps)});
  }
  return out;
}

std::string to_text(const MarkedTokenStream& stream) {
  std::string out;
  for (std::size_t i = 0; i < stream.tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += stream.tokens[i].spelling();
  }
  return out;
}

MarkedTokenStream parse_stream(std::string_view text, Rational fps, Channel channel) {
  MarkedTokenStream out;
  out.fps = fps;
  out.channel = channel;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    if (tok == kPauseMarker) {
      out.tokens.push_back(ChronoToken::pause());
    } else if (tok == kLastingMarker) {
      out.tokens.push_back(ChronoToken::lasting());
    } else {
      out.tokens.push_back(ChronoToken::word(tok));
    }
  }
  return out;
}

std::vector<std::string> words_of(const std::vector<ChronoToken>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t.is_word()) out.push_back(t.text);
  }
  return out;
}

ChannelPair read_transcript_jsonl(std::istream& in) {
  ChannelPair pair;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TimedWord w{j.at("t").get<std::string>(), j.at("s").get<double>(), j.at("e").get<double>()};
      const Channel ch = parse_channel(j.at("ch").get<std::string>());
      (ch == Channel::Speaker ? pair.speaker : pair.listener).words.push_back(std::move(w));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("transcript line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate_transcript(pair.speaker);
  validate_transcript(pair.listener);
  return pair;
}

ChannelPair read_transcript_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript '" + path + "'");
  return read_transcript_jsonl(in);
}

void write_transcript_jsonl(std::ostream& out, const TimedTranscript& transcript) {
  for (const TimedWord& w : transcript.words) {
    nlohmann::json j;
    j["t"] = w.text;
    j["s"] = w.start;
    j["e"] = w.end;
    j["ch"] = std::string(channel_name(transcript.channel));
    out << j.dump() << '\n';
  }
}

}  // namespace dyad::chrono
