#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mflqg/linalg.hpp"

namespace mflqg {

enum class ObservationMode { kFull, kNoisy };

struct Dimensions {
  int state = 1;
  int control = 1;
  int observation = 1;

  bool operator==(const Dimensions&) const = default;
};

// Per-step matrix sequence. Entry t-1 holds the matrix for step t.
using StepMatrices = std::vector<Matrix>;

StepMatrices broadcast(const Matrix& m, int horizon);

// A population of n homogeneous subsystems coupled through the empirical
// mean of their states:
//
//   x^i_{t+1} = A_t x^i_t + B_t u^i_t + D_t z_t + w^i_t,   z_t = mean_i x^i_t
//   y^i_t     = Cx_t x^i_t + Cz_t z_t + v^i_t               (noisy mode)
//
//   c_t = (1/n) sum_i [x^i' Q_t x^i + u^i' R_t u^i] + z' P_t z
//
// Sequences may be given with a single entry; validate_model broadcasts them
// to the full horizon.
struct LqMeanFieldModel {
  int horizon = 1;
  int n_agents = 1;
  Dimensions dims;

  StepMatrices A, B, D;
  StepMatrices Q, R, P;
  StepMatrices Cx, Cz;

  Matrix sigma_x;  // initial state covariance
  Matrix sigma_w;  // process noise covariance
  Matrix sigma_v;  // observation noise covariance
  Vector initial_mean;

  ObservationMode observation_mode = ObservationMode::kFull;

  bool operator==(const LqMeanFieldModel&) const;
};

// Checks every shape, symmetry and definiteness invariant. Returns a copy with
// broadcast sequences, defaulted optional fields (zero observation matrices and
// observation noise in full mode, zero initial mean) and exactly symmetrized
// cost and covariance matrices. Idempotent.
//
// Throws DimensionMismatch, NotSymmetric, NotPositiveDefinite (R_t) or
// NotPositiveSemidefinite (Q_t, P_t, covariances).
LqMeanFieldModel validate_model(const LqMeanFieldModel& model);

// Cost with a cross term between each local state and the mean-field:
//   (1/n) sum_i [x^i' Q x^i + x^i' S z + u^i' R u^i] + z' P z
struct CrossTermCost {
  StepMatrices Q, S, R, P;
};

struct CanonicalCost {
  StepMatrices Q, R, P;
};

// Folds the cross term into the mean-field weight: P' = P + (S + S^T) / 2.
// The identity rests on (1/n) sum_i x^i' S z = z' S z.
CanonicalCost reduce_cross_term(const CrossTermCost& cost);

// Per-step cost over a population snapshot. Columns of `states` and `actions`
// are agents.
double stage_cost(const Matrix& states, const Matrix& actions, const Matrix& Q,
                  const Matrix& R, const Matrix& P);

double cross_term_stage_cost(const Matrix& states, const Matrix& actions,
                             const Matrix& Q, const Matrix& S, const Matrix& R,
                             const Matrix& P);

// Tracking objective
//   (1/n) sum_i [ (x^i - x^i_1)' Wq (x^i - x^i_1) + u^i' Wr u^i ]
//     + (z - z_ref,t)' Wp (z - z_ref,t)
// where each subsystem's reference is its own initial state.
struct TrackingSpec {
  Matrix state_weight;                    // Wq, d_x x d_x
  Matrix control_weight;                  // Wr, d_u x d_u
  Matrix meanfield_weight;                // Wp, d_x x d_x
  std::vector<Vector> meanfield_reference;  // length 1 (constant) or T
};

// Builds the augmented model with state (x, x_ref, 1) of dimension 2 d_x + 1.
// Dynamics and noise come from `model`; the cost is replaced by the tracking
// objective of `spec`. The result is validated before it is returned.
LqMeanFieldModel augment_for_tracking(const LqMeanFieldModel& model,
                                      const TrackingSpec& spec);

// Stable 64-bit FNV-1a digest over the model's dimensions and matrix entries,
// rendered as 16 hex digits.
std::string model_fingerprint(const LqMeanFieldModel& model);

}  // namespace mflqg
