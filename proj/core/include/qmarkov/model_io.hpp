#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qmarkov/chain.hpp"

namespace qmarkov::io {

/// Parse or validation failure, with the offending field path in what().
struct ModelParseError : std::runtime_error {
  explicit ModelParseError(const std::string& what) : std::runtime_error(what) {}
};

// Model files are JSON, in one of two forms:
//   {"d": 2, "k": 2,
//    "hamiltonian": {"re": [[...]], "im": [[...]]},
//    "input_state": {"re": [...], "im": [...]},
//    "theta0": 1.0471975511965976}
// or the built-in exchange-interaction example
//   {"builtin": "xy", "a": 0.6, "b": 0.8, "f": 0.0, "theta0": 1.0471975511965976}.
// Hermiticity and normalization are repaired within tol::validation and
// rejected beyond it.

ChainModel load_model(const std::string& path);
ChainModel model_from_json_string(const std::string& text);

/// Explicit (non-builtin) serialization; round-trips bit-identically.
std::string model_to_json_string(const ChainModel& model);

/// FNV-1a hash of the canonical explicit serialization.
std::uint64_t model_digest(const ChainModel& model);

}  // namespace qmarkov::io
