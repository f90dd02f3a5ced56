// bimorph - error types shared across the library
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bimorph {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rotation angle of a pose is too close to pi for a stable logarithm.
class AngleNearPi : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A linear system stayed singular even after damping was applied.
class NumericallySingular : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

class UnknownLabel : public Error {
 public:
  using Error::Error;
};

// Constrained perturbation failed to produce a feasible candidate.
class ConstraintUnsatisfiable : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bimorph
