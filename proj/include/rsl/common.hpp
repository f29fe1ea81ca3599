#pragma once

#include <stdexcept>
#include <string>

namespace rsl {

// Error taxonomy shared across modules. The CLI maps these onto exit codes:
// usage errors -> 1, data errors -> 2, numeric failures -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed container or header (WAV, TFM, checkpoint).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Structurally valid container holding a codec we do not read.
class UnsupportedEncodingError : public Error {
 public:
  explicit UnsupportedEncodingError(const std::string& msg) : Error(msg) {}
};

// Text input that fails the line grammar; carries a 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// NaN/Inf or divergence detected inside a numeric pipeline.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace rsl
