#pragma once

#include <Eigen/Core>
#include <string>

#include "cal/time.hpp"

namespace Eigen {

template <>
struct NumTraits<cal::TimeValue> {
  using Real = cal::TimeValue;
  using NonInteger = cal::TimeValue;
  using Nested = cal::TimeValue;
  using Literal = std::int64_t;
  enum {
    IsComplex = 0,
    IsInteger = 1,
    IsSigned = 1,
    RequireInitialization = 0,
    ReadCost = 1,
    AddCost = 1,
    MulCost = 1
  };
  static inline cal::TimeValue epsilon() { return cal::TimeValue::zero(); }
  static inline cal::TimeValue dummy_precision() { return cal::TimeValue::zero(); }
  static inline cal::TimeValue highest() { return cal::TimeValue::pos_infinity(); }
  static inline cal::TimeValue lowest() { return cal::TimeValue::neg_infinity(); }
  static inline int digits10() { return 18; }
};

}  // namespace Eigen

namespace cal::mp {

/// Dense square matrix over the max-plus semiring: entries are time
/// values, -inf is the semiring zero (no path), 0 the semiring one.
/// Eigen provides the storage; the semiring operations are the free
/// functions below. The matrices here are small (one row per process),
/// so every operation is a plain dense loop.
using Matrix = Eigen::Matrix<TimeValue, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<TimeValue, Eigen::Dynamic, 1>;

/// Semiring addition of scalars: max, with -inf as the neutral element.
inline TimeValue oplus(TimeValue a, TimeValue b) { return a < b ? b : a; }

/// Semiring multiplication of scalars: saturating addition, with -inf
/// absorbing (even against +inf, matching the path interpretation:
/// there is no path through a missing edge).
inline TimeValue otimes(TimeValue a, TimeValue b) {
  if (a.is_neg_infinity() || b.is_neg_infinity()) return TimeValue::neg_infinity();
  return a + b;
}

/// Matrix with -inf everywhere: the additive identity.
Matrix zero_matrix(Eigen::Index n);

/// Finite zeros on the diagonal, -inf elsewhere: the multiplicative
/// identity.
Matrix identity(Eigen::Index n);

Vector zero_vector(Eigen::Index n);

/// Entrywise max.
Matrix oplus(const Matrix& a, const Matrix& b);
Vector oplus(const Vector& a, const Vector& b);

/// Max-plus matrix product: out(i,j) = max_k (a(i,k) + b(k,j)).
Matrix otimes(const Matrix& a, const Matrix& b);
Vector otimes(const Matrix& a, const Vector& v);

bool equal(const Matrix& a, const Matrix& b);
bool equal(const Vector& a, const Vector& b);

/// Entrywise a <= b.
bool less_equal(const Matrix& a, const Matrix& b);

/// Transitive closure I + g + g^2 + ... + g^(n-1). For a matrix whose
/// cycles all have non-positive weight this is the full Kleene star;
/// with a positive-weight cycle the series diverges and callers should
/// consult classify_cycles before trusting the truncation.
Matrix kleene_star(const Matrix& g);

/// Sign trichotomy of the directed cycles of g. Diagonal entries equal
/// to the semiring one (a zero-weight self-wait) impose no constraint
/// on the offset fixpoint and are not counted as cycles; any other
/// diagonal entry is a genuine self-loop.
enum class CycleClass { AllNegative, NonPositiveWithZero, HasPositive };

CycleClass classify_cycles(const Matrix& g);

std::string to_string(CycleClass c);

/// Aligned human-readable rendering, one row per line.
std::string format(const Matrix& m);

/// Row-major CSV with "-inf"/"+inf" literals and canonical time strings.
std::string to_csv(const Matrix& m);
std::string to_csv(const Vector& v);

}  // namespace cal::mp
