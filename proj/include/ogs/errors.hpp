// Error types shared across the library. Every failure surfaced to callers
// derives from ogs::Error so CLI and tests can match on the exact condition.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ogs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An opcode listing produced zero tokens.
class EmptySequenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// No opcode occurs in any input sequence.
class EmptyAlphabetError : public Error {
 public:
  using Error::Error;
};

/// A token fell outside the alphabet it was resolved against.
class UnknownOpcodeError : public Error {
 public:
  explicit UnknownOpcodeError(const std::string& token)
      : Error("unknown opcode: '" + token + "'"), token_(token) {}

  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

/// Two graphs (or a graph and an edge filter) disagree on the alphabet.
class AlphabetMismatchError : public Error {
 public:
  using Error::Error;
};

class EmptyFilterError : public Error {
 public:
  using Error::Error;
};

/// Training input contains only one of the two classes.
class SingleClassCorpusError : public Error {
 public:
  using Error::Error;
};

/// Too few graphs to form the training score sets.
class DegenerateTrainingError : public Error {
 public:
  using Error::Error;
};

/// A class has fewer samples than the requested fold count.
class InsufficientSamplesError : public Error {
 public:
  InsufficientSamplesError(const std::string& class_name, std::size_t available,
                           std::size_t folds)
      : Error("class '" + class_name + "' has " + std::to_string(available) +
              " samples, fewer than the " + std::to_string(folds) +
              " required folds"),
        class_name_(class_name) {}

  const std::string& class_name() const { return class_name_; }

 private:
  std::string class_name_;
};

class EmptyFamilyMapError : public Error {
 public:
  using Error::Error;
};

class EmptyListError : public Error {
 public:
  using Error::Error;
};

class DivisionByZeroError : public Error {
 public:
  using Error::Error;
};

/// Persisted model carries a version this build does not understand.
class FormatVersionMismatchError : public Error {
 public:
  using Error::Error;
};

/// Structural problem in a JSON document; the message names the field path.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptyBaseError : public Error {
 public:
  using Error::Error;
};

class EmptyBenignPoolError : public Error {
 public:
  using Error::Error;
};

}  // namespace ogs
