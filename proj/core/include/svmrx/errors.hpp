#pragma once

#include <stdexcept>
#include <string>

namespace svmrx {

// Factorization pivot fell below the positive-definiteness threshold.
struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

// Operand shapes do not line up (matrix/vector dims, feature dims, ...).
struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Binary training set contains only one label.
struct SingleClassData : std::invalid_argument {
  explicit SingleClassData(const std::string& what) : std::invalid_argument(what) {}
};

// Multiclass training set is missing (or nearly missing) one of the classes.
struct MissingClass : std::invalid_argument {
  explicit MissingClass(const std::string& what) : std::invalid_argument(what) {}
};

// Experiment configuration failed validation.
struct InvalidConfig : std::invalid_argument {
  explicit InvalidConfig(const std::string& what) : std::invalid_argument(what) {}
};

// File could not be read/written/parsed.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace svmrx
