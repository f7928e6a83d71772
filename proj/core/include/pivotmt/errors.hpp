#pragma once

#include <stdexcept>
#include <string>

namespace pivotmt {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (bad JSON line, bad UTF-8, schema violation).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A domain invariant or operation precondition failed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Vector dimensions disagree (query vs datastore, provider drift).
class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

/// File system failure (missing file, unwritable directory, short write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// HTTP transport failure that persisted beyond the retry budget.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Replay backend has no recorded output for the requested prompt hash.
class ReplayMissError : public Error {
 public:
  using Error::Error;
};

/// The endpoint rejected the request because the prompt exceeds its
/// context window. Kept distinct so ablation rows can record it.
class ContextOverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace pivotmt
