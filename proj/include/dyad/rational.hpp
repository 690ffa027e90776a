// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "dyad/error.hpp"

namespace dyad {

/// Positive rational number num/den kept in lowest terms. Used for frame
/// rates and for the audio-tokens-per-frame ratio so that per-frame token
/// counts can be accumulated without floating-point drift.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw ContractError("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  /// Parses "3", "3/2" or a finite decimal such as "1.5".
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool positive() const { return num_ > 0; }

  /// floor(n * this) for n >= 0.
  std::int64_t floor_mul(std::int64_t n) const { return floor_div(n * num_, den_); }
  /// ceil(n * this) for n >= 0.
  std::int64_t ceil_mul(std::int64_t n) const { return -floor_div(-n * num_, den_); }
  /// floor(n / this).
  std::int64_t floor_div_by(std::int64_t n) const { return floor_div(n * den_, num_); }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string_view::npos) {
      return Rational(std::stoll(std::string(text.substr(0, slash))),
                      std::stoll(std::string(text.substr(slash + 1))));
    }
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) return Rational(std::stoll(std::string(text)));
    std::string digits(text.substr(0, dot));
    const std::string frac(text.substr(dot + 1));
    std::int64_t den = 1;
    for (char c : frac) {
      if (c < '0' || c > '9') throw ConfigError("bad rational '" + std::string(text) + "'");
      den *= 10;
    }
    digits += frac;
    return Rational(std::stoll(digits), den);
  } catch (const std::logic_error&) {
    throw ConfigError("bad rational '" + std::string(text) + "'");
  }
}

}  // namespace dyad
