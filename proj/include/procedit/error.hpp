#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace procedit {

/// Base of every error raised by the library. `what()` is a human-readable
/// message suitable for printing on standard error.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad user-supplied input: a procedure, edit, dataset line, template, etc.
class InputError : public Error {
public:
  using Error::Error;
};

class EmptyStep : public InputError {
public:
  explicit EmptyStep(std::size_t index)
      : InputError("step " + std::to_string(index) + " is empty"), index_(index) {}
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

class NoStepsFound : public InputError {
public:
  NoStepsFound() : InputError("no numbered steps found") {}
};

class MalformedLine : public InputError {
public:
  MalformedLine(std::size_t line, const std::string& reason)
      : InputError("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace procedit
