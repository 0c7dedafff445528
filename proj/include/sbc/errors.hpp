#pragma once

#include <stdexcept>
#include <string>

namespace sbc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed, incomplete or inconsistent configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed data (ragged rows, non-finite entries, mismatched sample counts).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Dynamics expression that cannot be parsed; carries the character offset.
class ExpressionError : public Error {
 public:
  ExpressionError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// (K + N lambda I) could not be factorized.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Lattice does not satisfy Q > 2 f_max.
class NyquistError : public Error {
 public:
  using Error::Error;
};

/// A tightening denominator C - 2A + 1 is not positive.
class LatticeTooCoarseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbc
