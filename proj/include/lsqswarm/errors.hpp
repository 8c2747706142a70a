#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsqswarm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct InvalidInputError : Error {
  using Error::Error;
};

struct InvalidSplitError : Error {
  using Error::Error;
};

struct PartitionShapeError : Error {
  using Error::Error;
};

struct GraphShapeError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct VariantError : Error {
  using Error::Error;
};

/// Raised when a constituent graph of a network is not connected.
struct AssumptionViolated : Error {
  explicit AssumptionViolated(std::string which_graph)
      : Error("connectivity assumption violated: " + which_graph),
        which(std::move(which_graph)) {}
  std::string which;
};

struct DivergenceError : Error {
  DivergenceError(double step, double at_time)
      : Error("state diverged (norm > 1e12) at t=" + std::to_string(at_time) +
              " with h=" + std::to_string(step)),
        step_size(step), time(at_time) {}
  double step_size;
  double time;
};

struct InsufficientDecay : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t line_no, std::string what_failed)
      : Error("parse error at line " + std::to_string(line_no) + ": " + what_failed),
        line(line_no), reason(std::move(what_failed)) {}
  std::size_t line;
  std::string reason;
};

struct ValidationError : Error {
  ValidationError(std::string field_name, std::string what_failed)
      : Error("invalid field '" + field_name + "': " + what_failed),
        field(std::move(field_name)), reason(std::move(what_failed)) {}
  std::string field;
  std::string reason;
};

}  // namespace lsqswarm
