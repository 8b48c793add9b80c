#pragma once

#include <stdexcept>
#include <string>

namespace umni {

/// Bad arguments: dimension mismatches, out-of-range parameters, singular inputs.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Graph invariant broken (cycle, self-loop).
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Random generator exhausted its retry budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer independent score differences than latent dimensions.
class IdentifiabilityInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A recovery stage could not complete. `stage()` is 1..4.
class RecoveryFailure : public std::runtime_error {
 public:
  RecoveryFailure(int stage, const std::string& what)
      : std::runtime_error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

}  // namespace umni
