#pragma once

#include <stdexcept>
#include <string>

namespace locoplan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Planning
class NoPath : public Error {
 public:
  using Error::Error;
};
class InvalidMove : public Error {
 public:
  using Error::Error;
};
class InvalidScene : public Error {
 public:
  using Error::Error;
};

// Motion representation
class LengthMismatch : public Error {
 public:
  using Error::Error;
};
class WaypointMismatch : public Error {
 public:
  using Error::Error;
};

// Diffusion
class StepOutOfRange : public Error {
 public:
  using Error::Error;
};
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};
class InvalidSchedule : public Error {
 public:
  using Error::Error;
};
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Raised by both training (non-finite loss) and the tracker (non-finite state).
class Diverged : public Error {
 public:
  using Error::Error;
};

// Tracking
class MissingBoxState : public Error {
 public:
  using Error::Error;
};

// I/O
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

}  // namespace locoplan
