#pragma once

#include <stdexcept>
#include <string>

namespace padist {

// Error classes map onto CLI exit codes (see tools/padist.cc):
// config -> 2, numeric -> 3, io -> 4.
enum class ErrorClass { kInvalidArgument, kConfig, kNumeric, kIo };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

// Bad parameter values, shape mismatches, degenerate inputs.
class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& what)
      : Error(ErrorClass::kInvalidArgument, what) {}
};

class ShapeMismatch : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class DegenerateInput : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class InsufficientData : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorClass::kNumeric, what) {}
};

class FitFailure : public NumericError {
 public:
  using NumericError::NumericError;
};

class TrainingFailure : public NumericError {
 public:
  TrainingFailure(const std::string& what, int epoch)
      : NumericError(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorClass::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorClass::kIo, what) {}
};

}  // namespace padist
