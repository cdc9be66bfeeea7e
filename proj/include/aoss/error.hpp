#pragma once

#include <stdexcept>
#include <string>

namespace aoss {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad sizes, k <= p, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// Matrix has (numerically) dependent columns where full rank is required.
struct RankDeficientError : Error {
  using Error::Error;
};

/// Q^T Q is singular or too ill-conditioned to invert.
struct SingularInformationError : Error {
  using Error::Error;
};

/// Removing the row would make the information matrix singular (1 - h ~ 0).
struct DegenerateRemovalError : Error {
  using Error::Error;
};

/// Every candidate removal in a greedy step failed the denominator guard.
struct AllRemovalsDegenerateError : Error {
  using Error::Error;
};

/// The dataset has fewer rows than the requested elimination pool.
struct PoolTooSmallError : Error {
  using Error::Error;
};

/// Malformed CSV input; message names the offending row/column.
struct ParseError : Error {
  using Error::Error;
};

/// A named column is absent from the file header.
struct MissingColumnError : Error {
  using Error::Error;
};

/// All-subset enumeration refused (2^p would explode).
struct TooManyPredictorsError : Error {
  using Error::Error;
};

/// Vector/matrix sizes disagree.
struct DimensionMismatchError : Error {
  using Error::Error;
};

}  // namespace aoss
