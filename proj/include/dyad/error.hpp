// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dyad {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity reached a kernel or a loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Index out of range (token id, target class, ...).
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the admissible range (e.g. a word past the last frame).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration file or generator spec.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dyad
