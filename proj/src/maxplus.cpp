#include "cal/maxplus.hpp"

#include <sstream>
#include <vector>

#include "cal/errors.hpp"

namespace cal::mp {

namespace {

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols())
    throw DimensionMismatch(std::string(who) + ": matrix is not square");
}

void require_same(Eigen::Index a, Eigen::Index b, const char* who) {
  if (a != b)
    throw DimensionMismatch(std::string(who) + ": dimensions " + std::to_string(a) +
                            " and " + std::to_string(b) + " do not agree");
}

}  // namespace

Matrix zero_matrix(Eigen::Index n) {
  return Matrix::Constant(n, n, TimeValue::neg_infinity());
}

Matrix identity(Eigen::Index n) {
  Matrix m = zero_matrix(n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = TimeValue::zero();
  return m;
}

Vector zero_vector(Eigen::Index n) {
  return Vector::Constant(n, TimeValue::zero());
}

Matrix oplus(const Matrix& a, const Matrix& b) {
  require_same(a.rows(), b.rows(), "oplus");
  require_same(a.cols(), b.cols(), "oplus");
  return a.binaryExpr(b, [](TimeValue x, TimeValue y) { return oplus(x, y); });
}

Vector oplus(const Vector& a, const Vector& b) {
  require_same(a.size(), b.size(), "oplus");
  return a.binaryExpr(b, [](TimeValue x, TimeValue y) { return oplus(x, y); });
}

Matrix otimes(const Matrix& a, const Matrix& b) {
  require_same(a.cols(), b.rows(), "otimes");
  Matrix out = Matrix::Constant(a.rows(), b.cols(), TimeValue::neg_infinity());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      const TimeValue aik = a(i, k);
      if (aik.is_neg_infinity()) continue;
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        out(i, j) = oplus(out(i, j), otimes(aik, b(k, j)));
      }
    }
  }
  return out;
}

Vector otimes(const Matrix& a, const Vector& v) {
  require_same(a.cols(), v.size(), "otimes");
  Vector out = Vector::Constant(a.rows(), TimeValue::neg_infinity());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      out(i) = oplus(out(i), otimes(a(i, k), v(k)));
    }
  }
  return out;
}

bool equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

bool equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != b(i)) return false;
  return true;
}

bool less_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) > b(i, j)) return false;
  return true;
}

Matrix kleene_star(const Matrix& g) {
  require_square(g, "kleene_star");
  const Eigen::Index n = g.rows();
  Matrix star = identity(n);
  Matrix power = identity(n);
  for (Eigen::Index k = 1; k < n; ++k) {
    power = otimes(power, g);
    star = oplus(star, power);
  }
  return star;
}

CycleClass classify_cycles(const Matrix& g) {
  require_square(g, "classify_cycles");
  const Eigen::Index n = g.rows();
  // Zero-weight self-entries state that a process waits on itself by
  // nothing; strip them so they do not masquerade as zero cycles.
  Matrix h = g;
  for (Eigen::Index i = 0; i < n; ++i)
    if (h(i, i) == TimeValue::zero()) h(i, i) = TimeValue::neg_infinity();

  Matrix power = h;
  Matrix closure = h;  // h + h^2 + ... + h^n
  for (Eigen::Index k = 2; k <= n; ++k) {
    power = otimes(power, h);
    closure = oplus(closure, power);
  }

  bool saw_zero = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const TimeValue w = closure(i, i);
    if (w > TimeValue::zero()) return CycleClass::HasPositive;
    if (w == TimeValue::zero()) saw_zero = true;
  }
  return saw_zero ? CycleClass::NonPositiveWithZero : CycleClass::AllNegative;
}

std::string to_string(CycleClass c) {
  switch (c) {
    case CycleClass::AllNegative: return "all-negative";
    case CycleClass::NonPositiveWithZero: return "non-positive-with-zero";
    case CycleClass::HasPositive: return "has-positive";
  }
  return "?";
}

std::string format(const Matrix& m) {
  std::vector<std::string> cells(static_cast<size_t>(m.size()));
  size_t width = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      auto& cell = cells[static_cast<size_t>(i * m.cols() + j)];
      cell = cal::to_string(m(i, j));
      width = std::max(width, cell.size());
    }
  std::ostringstream os;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << "[ ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto& cell = cells[static_cast<size_t>(i * m.cols() + j)];
      os << std::string(width - cell.size(), ' ') << cell;
      os << (j + 1 < m.cols() ? "  " : " ");
    }
    os << "]\n";
  }
  return os.str();
}

std::string to_csv(const Matrix& m) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ",";
      os << cal::to_string(m(i, j));
    }
    os << "\n";
  }
  return os.str();
}

std::string to_csv(const Vector& v) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << cal::to_string(v(i));
  }
  os << "\n";
  return os.str();
}

}  // namespace cal::mp
