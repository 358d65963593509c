#pragma once

#include <stdexcept>
#include <string>

namespace sledge {

// Base of every error raised by the library. The CLI maps the subclasses
// onto process exit codes (usage = 1, data = 2, scorer = 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied argument or configuration value.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (metadata tables, run files, qrels...).
class FormatError : public Error {
 public:
  using Error::Error;
};

class EmptyQueryError : public Error {
 public:
  using Error::Error;
};

// Index container could not be read: wrong magic, version or truncation.
class IndexFormatError : public Error {
 public:
  using Error::Error;
};

// Anything that went wrong while talking to the re-ranking scorer.
class ScorerError : public Error {
 public:
  using Error::Error;
};

// Transient: the scorer did not answer in time or the transport dropped.
class ScorerTimeout : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class ScorerTransportError : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

// Permanent protocol violations.
class MalformedResponse : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class IdMismatch : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

class ProtocolViolation : public ScorerError {
 public:
  using ScorerError::ScorerError;
};

// Retry budget exhausted part way through a re-ranking job.
class PartialResultsError : public ScorerError {
 public:
  PartialResultsError(const std::string& what, std::size_t completed, std::size_t total)
      : ScorerError(what), completed_(completed), total_(total) {}

  std::size_t completed() const noexcept { return completed_; }
  std::size_t total() const noexcept { return total_; }

 private:
  std::size_t completed_;
  std::size_t total_;
};

}  // namespace sledge
