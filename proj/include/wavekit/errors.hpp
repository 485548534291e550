#pragma once

#include <stdexcept>
#include <string>

namespace wavekit {

// Base class for every error the library throws. Decoders and pipeline
// stages never abort the process; malformed input surfaces as one of the
// typed errors below.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Structurally invalid input (bad magic, bad header, bad field values).
struct FormatError : Error {
  using Error::Error;
};

// Declared sizes and actual payload sizes disagree.
struct LengthError : Error {
  using Error::Error;
};

// Payload carries values the domain forbids (NaN/Inf samples).
struct DataError : Error {
  using Error::Error;
};

// No recognizable channel when mapping a recording onto the canonical montage.
struct MontageError : Error {
  using Error::Error;
};

// Recording too short to resample.
struct ResampleError : Error {
  using Error::Error;
};

// A pipeline stage received data that skipped an earlier stage.
struct PipelineOrderError : Error {
  using Error::Error;
};

// Parameter outside its documented range.
struct ParamError : Error {
  using Error::Error;
};

// Vector norm too small to normalize.
struct NormError : Error {
  using Error::Error;
};

// Tensor shapes do not compose.
struct ShapeError : Error {
  using Error::Error;
};

// Training loss became non-finite; carries the offending step index.
struct TrainError : Error {
  TrainError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
  std::size_t step_index;
};

// Query against a store with no entries.
struct EmptyStoreError : Error {
  using Error::Error;
};

// Dataset tag with no task mapping during prompt rendering.
struct MapError : Error {
  using Error::Error;
};

// Label not present in the declared class order.
struct LabelError : Error {
  using Error::Error;
};

}  // namespace wavekit
