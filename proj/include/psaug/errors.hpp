#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psaug {

/// Argument outside the mathematical domain of a numeric routine.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs whose shape or content violates a documented invariant
/// (empty batch, mismatched lengths, out-of-range plan events, ...).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed binary feature file.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, std::size_t offset, const std::string& what)
      : std::runtime_error(path + ": byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Semantically invalid text input (manifest or config).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace psaug
