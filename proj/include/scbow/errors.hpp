#ifndef SCBOW_ERRORS_HPP_
#define SCBOW_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scbow {

// Base class for all library errors. The CLI maps these to exit codes:
// InvalidConfig -> 1 (usage), DegenerateInput -> 3 (statistics),
// everything else -> 2 (data).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration values (zero dimensions, impossible schedules, ...).
struct InvalidConfig : Error {
  using Error::Error;
};

// Corpus produced no usable tokens, sentences, or training windows.
struct EmptyCorpus : Error {
  using Error::Error;
};

// Corpus too small to satisfy negative-sampling exclusions.
struct InsufficientCorpus : Error {
  using Error::Error;
};

// Operation received a sentence with no token ids.
struct EmptySentence : Error {
  using Error::Error;
};

// Cosine or normalization requested on a zero-norm vector.
struct ZeroVector : Error {
  using Error::Error;
};

// Example or target vector violates structural expectations.
struct InvalidExample : Error {
  using Error::Error;
};

// Internal state violated an invariant (out-of-range gradient row, ...).
struct Corrupted : Error {
  using Error::Error;
};

// Malformed input file. Carries a 1-based line number when known.
struct ParseError : Error {
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Token not present in the vocabulary.
struct UnknownToken : Error {
  using Error::Error;
};

// File could not be opened, read, or written.
struct IoError : Error {
  using Error::Error;
};

// Value cannot be represented in the requested output format.
struct SerializationError : Error {
  using Error::Error;
};

// Checkpoint file has a bad magic, version, or is truncated.
struct IncompatibleCheckpoint : Error {
  using Error::Error;
};

// Statistical operation received input it is undefined on
// (zero variance, all-zero differences, too few observations).
struct DegenerateInput : Error {
  using Error::Error;
};

}  // namespace scbow

#endif  // SCBOW_ERRORS_HPP_
