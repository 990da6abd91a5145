#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rds {

// Input that violates an operation's preconditions (zero-degree node, bad seed, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Solver failure or a singular / indefinite system.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class RestartsExhausted : public std::runtime_error {
 public:
  explicit RestartsExhausted(int attempts)
      : std::runtime_error("sampling terminated early on all " + std::to_string(attempts) +
                           " attempts"),
        attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

}  // namespace rds
