#pragma once

#include <stdexcept>
#include <string>

namespace dinfo {

// Base class for all library errors. Anything derived from Error signals a
// problem with inputs or numerical preconditions; std::logic_error is reserved
// for internal invariant violations (bugs).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A probability row fails to sum to 1 within tolerance, or has negative mass.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Tensor dimensions inconsistent with the declared alphabet/order.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A structure template references a lag beyond the model order.
class MaskError : public Error {
 public:
  using Error::Error;
};

// Lifted chain is reducible or periodic; no unique stationary distribution.
class ReducibleChainError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to reach tolerance within its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A requested dense table would exceed the configured cell cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A variable selector is out of range, duplicated, or otherwise invalid.
class SelectorError : public Error {
 public:
  using Error::Error;
};

// Node sets passed to a separation query are not pairwise disjoint.
class DisjointnessError : public Error {
 public:
  using Error::Error;
};

// Network horizon too short for the requested query.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// An estimator was given no usable samples.
class EmptySequenceError : public Error {
 public:
  using Error::Error;
};

// Tree depth does not match the context specification.
class DepthMismatchError : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IOError : public Error {
 public:
  using Error::Error;
};

}  // namespace dinfo
