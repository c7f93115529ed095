#pragma once

#include <stdexcept>
#include <string>

namespace qcsa {

// Bad argument value (quantile outside (0,1), k > K, negative lambda, ...).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot be used as given (non-finite cells, too few rows).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingColumn : public DataError {
 public:
  using DataError::DataError;
};

class NonNumericCell : public DataError {
 public:
  using DataError::DataError;
};

class EmptyData : public DataError {
 public:
  using DataError::DataError;
};

// A numerical routine reached a state that well-posed input cannot produce.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qcsa
