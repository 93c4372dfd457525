#pragma once

#include <stdexcept>
#include <string>

namespace conical {

// Base class for all recoverable library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input fails a construction-time or call-time contract (non-finite entry,
// negative entry in a non-negative context, malformed file, bad argument).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// An anchor column is identically zero; no projection is defined over it.
class DegenerateAnchor : public Error {
 public:
  using Error::Error;
};

// The sign-certificate feasibility LP has no solution; the projection the
// certificate was derived from is not converged tightly enough.
class LpInfeasible : public Error {
 public:
  using Error::Error;
};

// No column with positive l1 norm is available for selection.
class AllColumnsZero : public Error {
 public:
  using Error::Error;
};

// Ground-truth labels contain only one class; rates are undefined.
class DegenerateTruth : public Error {
 public:
  using Error::Error;
};

// The positive tie-break vector p ended up collinear with the selection
// weights; the caller should resample the perturbation.
class CollinearPerturbation : public Error {
 public:
  using Error::Error;
};

}  // namespace conical
