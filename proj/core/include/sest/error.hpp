#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sest {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input. `offset` is a byte offset for bracketed trees and a
// 1-based line number for line-oriented formats; `kNoPosition` when unknown.
class ParseError : public Error {
 public:
  static constexpr std::size_t kNoPosition = static_cast<std::size_t>(-1);

  ParseError(const std::string& what, std::size_t position = kNoPosition)
      : Error(what), position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Well-formed input whose structure violates a tree invariant (cycles,
// multiple roots, orphan tokens).
class StructureError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

// Corpus or example content that cannot be used as requested.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint or report that cannot be loaded (truncated, wrong version,
// missing entries).
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace sest
