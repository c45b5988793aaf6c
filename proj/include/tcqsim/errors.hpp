// Copyright 2026 The tcqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace tcq {

/// Base of every error thrown by tcqsim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or Hilbert-space dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An index, level, flux or coupling lies outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A formula was evaluated at a pole (zero detuning, resonant denominator).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Eigen-solver or other numerical routine did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The coupling curve cannot be inverted (non-monotone, out of range).
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// A run configuration is invalid. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Fock-space truncation too small for the requested displacement.
class CutoffError : public Error {
 public:
  using Error::Error;
};

}  // namespace tcq
