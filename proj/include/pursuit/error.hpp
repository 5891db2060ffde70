#pragma once
#include <stdexcept>
#include <string>

namespace pursuit {

// Invalid or inconsistent input data (track files, configs, missing artifacts).
struct IngestError : std::runtime_error {
  explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate geometry (zero-length tangents, empty paths).
struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside the raceline optimizer.
struct OptimizationError : std::runtime_error {
  OptimizationError(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration(iteration) {}
  int iteration;
};

// Non-finite vehicle state or bad reset pose.
struct SimulationFault : std::runtime_error {
  explicit SimulationFault(const std::string& what) : std::runtime_error(what) {}
};

// Raycast queried from an occupied cell.
struct LocalizationInputError : std::runtime_error {
  explicit LocalizationInputError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite network output or loss during training.
struct TrainingFault : std::runtime_error {
  explicit TrainingFault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pursuit
