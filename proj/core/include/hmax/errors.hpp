#pragma once

#include <stdexcept>
#include <string>

namespace hmax {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents: bad magic, bad version, inconsistent counts.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file that parses but asks for a sample depth we do not handle.
class UnsupportedDepthError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Filesystem-level failure: missing file, short read, failed write.
class IoError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Training input that admits no model: one class only, zero rounds, empty class.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// No admissible location exists for a requested patch size.
class ImprintError : public Error {
 public:
  using Error::Error;
};

/// Metric undefined on the given inputs (e.g. single-class score set).
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmax

