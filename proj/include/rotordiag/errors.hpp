// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace rotordiag {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed file or configuration content (bad header, unknown key, ...).
class FormatError : public Error { public: using Error::Error; };

/// Unusable sample data (non-finite values, tacho dropouts, degenerate orbits).
class DataError : public Error { public: using Error::Error; };

/// Too little data for the requested operation.
class LengthError : public Error { public: using Error::Error; };

/// Parameter outside its admissible domain.
class DomainError : public Error { public: using Error::Error; };

/// Access outside the covered time or frequency span.
class RangeError : public Error { public: using Error::Error; };

/// Operation applied to a channel with the wrong engineering unit.
class UnitError : public Error { public: using Error::Error; };

/// Operation applied to a channel with the wrong role.
class RoleError : public Error { public: using Error::Error; };

/// Coordinate index outside the model.
class IndexError : public Error { public: using Error::Error; };

/// Matrices lack the symmetry the requested solution path assumes.
class SymmetryError : public Error { public: using Error::Error; };

/// Singular or otherwise unusable matrix.
class MatrixError : public Error { public: using Error::Error; };

/// Integration step too large for the requested accuracy.
class StabilityError : public Error { public: using Error::Error; };

/// Dynamic stiffness singular at the evaluation frequency.
class SingularityError : public Error { public: using Error::Error; };

/// Limit overlay does not span the data it is checked against.
class CoverageError : public Error { public: using Error::Error; };

} // namespace rotordiag
