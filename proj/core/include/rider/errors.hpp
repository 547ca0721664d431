#pragma once

#include <stdexcept>
#include <string>

namespace rider {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structure-file or FASTA content could not be parsed.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Sequence letter outside {A, C, G, U}.
class AlphabetError : public Error {
public:
  using Error::Error;
};

/// Matrix/point-set dimensions do not match the operation's contract.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Scalar argument outside its valid range (e.g. diffusion time).
class RangeError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration value or unknown config key.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Graph construction precondition violated.
class GraphError : public Error {
public:
  using Error::Error;
};

/// Trajectory step record is missing required state.
class StateError : public Error {
public:
  using Error::Error;
};

/// Policy update produced a non-finite gradient or parameter.
class UpdateError : public Error {
public:
  using Error::Error;
};

/// Too many trajectories dropped while collecting a batch.
class BatchError : public Error {
public:
  using Error::Error;
};

/// External folding process failed, timed out, or produced bad output.
class OracleError : public Error {
public:
  using Error::Error;
};

}  // namespace rider
