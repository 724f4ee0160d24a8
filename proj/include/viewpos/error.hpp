#pragma once

#include <stdexcept>
#include <string>

namespace viewpos {

// Failure categories. The CLI maps them onto exit codes: usage 2, data 3,
// numeric 4.
enum class ErrorKind { Usage, Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Invalid arguments or parameter combinations (e.g. a pair spec outside the
// allowed translation range).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

// Unreadable / malformed files, missing slices, bad sidecars.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DegenerateLabelError : public Error {
 public:
  explicit DegenerateLabelError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

// Wraps a failure with the pipeline stage it came from, keeping its category.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& inner)
      : Error(inner.kind(), stage + ": " + inner.what()), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace viewpos
