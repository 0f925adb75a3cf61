#ifndef SONICGUIDE_ERROR_H_
#define SONICGUIDE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sonicguide {

// Bad arguments or configuration; raised before any state is touched.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text input. `line()` is 1-based, 0 when not line specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Analysis input too quiet to measure.
class NoSignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation not allowed in the current state, e.g. a second active trial.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Features that no single position could have produced.
class AmbiguityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sonicguide

#endif  // SONICGUIDE_ERROR_H_
