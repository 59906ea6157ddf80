#include "mflqg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mflqg/errors.hpp"

namespace mflqg {

double asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) {
    return INFINITY;
  }
  if (m.size() == 0) {
    return 0.0;
  }
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

namespace {

bool pivots_ok(const Eigen::LDLT<Matrix>& ldlt, double relative_tol) {
  if (ldlt.info() != Eigen::Success) {
    return false;
  }
  const Vector d = ldlt.vectorD();
  const double largest = d.maxCoeff();
  if (!(largest > 0.0)) {
    return false;
  }
  return d.minCoeff() > relative_tol * largest;
}

}  // namespace

bool has_positive_pivots(const Matrix& m, double relative_tol) {
  if (m.rows() != m.cols() || m.size() == 0) {
    return false;
  }
  Eigen::LDLT<Matrix> ldlt(m);
  return pivots_ok(ldlt, relative_tol);
}

Matrix solve_spd(const Matrix& lhs, const Matrix& rhs, std::string_view what,
                 double relative_tol) {
  Eigen::LDLT<Matrix> ldlt(lhs);
  if (!pivots_ok(ldlt, relative_tol)) {
    throw NumericalFailure(std::string(what) +
                           ": matrix is singular to pivot tolerance");
  }
  return ldlt.solve(rhs);
}

Matrix psd_factor(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) {
    return Matrix(0, 0);
  }
  Eigen::LDLT<Matrix> ldlt(m);
  Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Matrix l = ldlt.matrixL();
  Matrix f = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
  return f;
}

namespace {

void column_sum_into(const Matrix& m, Eigen::Index begin, Eigen::Index end,
                     Vector& out) {
  const Eigen::Index count = end - begin;
  if (count == 1) {
    out = m.col(begin);
    return;
  }
  const Eigen::Index mid = begin + count / 2;
  Vector right(m.rows());
  column_sum_into(m, begin, mid, out);
  column_sum_into(m, mid, end, right);
  out += right;
}

}  // namespace

Vector pairwise_column_sum(const Matrix& m) {
  Vector out = Vector::Zero(m.rows());
  if (m.cols() == 0) {
    return out;
  }
  column_sum_into(m, 0, m.cols(), out);
  return out;
}

Vector column_mean(const Matrix& m) {
  return pairwise_column_sum(m) / static_cast<double>(m.cols());
}

double pairwise_sum(const double* values, std::size_t count) {
  if (count == 0) {
    return 0.0;
  }
  if (count == 1) {
    return values[0];
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

double relative_frobenius(const Matrix& a, const Matrix& b) {
  const double diff = (a - b).norm();
  const double scale = b.norm();
  return scale > 0.0 ? diff / scale : diff;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace mflqg
