#pragma once

#include <stdexcept>
#include <string>

namespace sculptor {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Raised when an unlabeled (target-domain) shape is asked for occupancy labels.
class UnsupervisedContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace sculptor
