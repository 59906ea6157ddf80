#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace mflqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kPsdTolerance = 1e-10;
inline constexpr double kPivotTolerance = 1e-12;

// Largest absolute entry of M - M^T.
double asymmetry(const Matrix& m);

Matrix symmetrized(const Matrix& m);

double min_eigenvalue(const Matrix& m);

// True iff a pivoted LDL^T factorization of the symmetric matrix m succeeds
// with every pivot above `relative_tol` times the largest pivot.
bool has_positive_pivots(const Matrix& m, double relative_tol = kPivotTolerance);

// Solves lhs * X = rhs for symmetric positive definite lhs via LDL^T.
// Throws NumericalFailure naming `what` when a pivot falls below tolerance.
Matrix solve_spd(const Matrix& lhs, const Matrix& rhs, std::string_view what,
                 double relative_tol = kPivotTolerance);

// Returns F with F * F^T == m for symmetric PSD m. Rank-deficient inputs are
// handled; tiny negative pivots from rounding are clamped to zero.
Matrix psd_factor(const Matrix& m);

// Sum of the columns of m, accumulated as a pairwise tree in column order.
// The reduction order is fixed so results are reproducible bit for bit.
Vector pairwise_column_sum(const Matrix& m);

// pairwise_column_sum(m) / m.cols().
Vector column_mean(const Matrix& m);

double pairwise_sum(const double* values, std::size_t count);

// ||a - b||_F / ||b||_F, or the absolute difference when b is zero.
double relative_frobenius(const Matrix& a, const Matrix& b);

// Kronecker product.
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace mflqg
