#pragma once

#include <stdexcept>
#include <string>

namespace sqs {

// Base class for all library errors that represent runtime failures
// (bad input data, protocol violations, I/O trouble). Programming errors
// (precondition violations) throw std::invalid_argument / std::logic_error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configuration: unknown key, unparsable value, missing required
// field. Message always names the offending key.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Bit-level packet or stream decoding failure, with a machine-checkable
// kind: truncated payload, rank or index out of range, inconsistent counts
// (e.g. accepted > drafted), scheme tag disagreement, nonzero padding.
class DecodeError : public Error {
 public:
  enum class Kind { Truncated, RankOutOfRange, CountMismatch, SchemeMismatch, TrailingData };

  DecodeError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Trace file loading failure, with a machine-checkable kind.
class TraceError : public Error {
 public:
  enum class Kind { MissingFile, BadHeader, Truncated, UnknownContext };

  TraceError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Edge/cloud handshake or framing disagreement.
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(what) {}
};

// Socket / file transport failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// A runtime invariant from the acceptance checks failed (distributional
// exactness, distortion cap, rejection-budget bound, ...).
class BoundViolation : public Error {
 public:
  explicit BoundViolation(const std::string& what) : Error(what) {}
};

}  // namespace sqs
