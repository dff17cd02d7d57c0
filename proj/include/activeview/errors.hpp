#ifndef ACTIVEVIEW_ERRORS_HPP_
#define ACTIVEVIEW_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace activeview {

/// Bad numeric or configuration parameter (negative temperature, epoch past the
/// schedule, C not divisible by G, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Empty or mis-shaped operand.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Caller broke a documented precondition (non-scalar backward root, all views
/// masked, shape mismatch between parameters and gradients, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DuplicateViewError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EpisodeCompleteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A manifest sample is missing one of the V aligned views.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed manifest, config or checkpoint contents.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite objective.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& stage, int epoch)
      : std::runtime_error("non-finite objective in " + stage + " at epoch " +
                           std::to_string(epoch)),
        stage_(stage),
        epoch_(epoch) {}

  const std::string& stage() const { return stage_; }
  int epoch() const { return epoch_; }

 private:
  std::string stage_;
  int epoch_;
};

}  // namespace activeview

#endif  // ACTIVEVIEW_ERRORS_HPP_
