#pragma once

#include <optional>

#include "mflqg/model.hpp"
#include "mflqg/model_io.hpp"

namespace mflqg {

// Value matrices and gains of the two decoupled backward recursions. The
// "x" recursion runs on (A_t, B_t, Q_t, R_t) and governs deviations from the
// mean-field; the "z" recursion runs on (A_t + D_t, B_t, Q_t + P_t, R_t) and
// governs the mean-field itself. Entry t-1 holds step t.
struct ControlRiccatiSolution {
  StepMatrices Mx, Mz;  // d_x x d_x, t = 1..T
  StepMatrices Kx, Kz;  // d_u x d_x, t = 1..T; zero at T
  StepMatrices A_bar;   // A_t + D_t, t = 1..T-1
};

// Depends only on A, B, D, Q, R, P: the population size and the noise
// covariances never enter. Throws NumericalFailure if B'MB + R is singular,
// which can only happen when validation was bypassed.
ControlRiccatiSolution solve_control_riccati(const LqMeanFieldModel& model);

// Forward Kalman recursion for one subsystem. `error_cov[t-1]` is the
// covariance of x_t - xhat_t where xhat_t is the one-step prediction from
// observations up to t-1; `kalman_gain[t-1]` maps the step-t innovation into
// xhat_{t+1}. `correction_gain[t-1]` maps the same innovation into the
// conditional mean given observations up to t, whose error covariance is
// `posterior_cov[t-1]`. kalman_gain = A_t * correction_gain.
struct FilterRiccatiSolution {
  StepMatrices error_cov;        // t = 1..T, error_cov[0] == Sigma_X
  StepMatrices kalman_gain;      // d_x x d_y, t = 1..T-1
  StepMatrices correction_gain;  // d_x x d_y, t = 1..T
  StepMatrices posterior_cov;    // t = 1..T
};

// Independent of Cz and of n_agents. Throws NumericalFailure if an
// innovation covariance Cx S Cx' + Sigma_V is singular.
FilterRiccatiSolution solve_filter_riccati(const LqMeanFieldModel& model);

// Largest relative Frobenius residual over all steps when each stored value
// matrix is recomputed from its successor through an LU-based evaluation of
// the recursion.
double control_riccati_residual(const LqMeanFieldModel& model,
                                const ControlRiccatiSolution& sol);
double filter_riccati_residual(const LqMeanFieldModel& model,
                               const FilterRiccatiSolution& sol);

// Gain schedule document:
//   {"horizon": T, "observation_mode": ..., "dims": {...},
//    "steps": {"1": {"Kx": M, "Kz": M, "Mx": M, "Mz": M,
//                    "KF": M, "L": M, "Sigma_e": M}, ...}}
// KF appears for t < T and only with a filter solution.
Json gains_to_json(const LqMeanFieldModel& model,
                   const ControlRiccatiSolution& control,
                   const std::optional<FilterRiccatiSolution>& filter);

}  // namespace mflqg
