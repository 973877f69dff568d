#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace topicshift {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad matrix/vector shapes, negative weights, out-of-range parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed data file. `line()` is 1-based, 0 when not tied to a line.
class LoadError : public Error {
 public:
  LoadError(const std::string& message, std::string path, std::size_t line = 0)
      : Error(line ? path + ":" + std::to_string(line) + ": " + message : path + ": " + message),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap. Carries the last iterate and residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> last_iterate, double residual,
                   std::size_t iterations)
      : Error(message + " (iterations=" + std::to_string(iterations) +
              ", residual=" + std::to_string(residual) + ")"),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
  std::size_t iterations_;
};

}  // namespace topicshift
