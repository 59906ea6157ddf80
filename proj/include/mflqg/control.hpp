#pragma once

#include <optional>

#include "mflqg/model.hpp"
#include "mflqg/riccati.hpp"

namespace mflqg {

// Everything a local estimator needs besides its own data. The system
// matrices are copied from the model so a controller can run without it.
struct FilterGains {
  StepMatrices kalman;      // K^F_t, t = 1..T-1
  StepMatrices correction;  // L_t, t = 1..T
  StepMatrices A, B, D, Cx, Cz;
  Vector initial_mean;
};

// Gains shared by every subsystem: u^i_t = Kx_t x^i_t + (Kz_t - Kx_t) z_t.
struct GainSchedule {
  int horizon = 0;
  StepMatrices Kx, Kz;
  std::optional<FilterGains> filter;
};

GainSchedule make_gain_schedule(const LqMeanFieldModel& model,
                                const ControlRiccatiSolution& control,
                                const std::optional<FilterRiccatiSolution>& filter);

// Solves the control recursions, plus the filter recursion in noisy mode.
GainSchedule solve_gain_schedule(const LqMeanFieldModel& model);

Vector full_obs_action(const GainSchedule& gains, const Vector& x,
                       const Vector& z, int t);

// One subsystem's estimator. `estimate` is the prediction of x_t from data up
// to t-1; its error covariance is the filter Riccati iterate at t.
struct LocalFilterState {
  Vector estimate;
  int time = 1;
};

LocalFilterState initial_filter_state(const GainSchedule& gains);

// Conditional mean of x_t given data up to and including y_t.
Vector corrected_estimate(const LocalFilterState& state,
                          const GainSchedule& gains, const Vector& y,
                          const Vector& z);

// xhat_{t+1} = A_t xhat_t + B_t u_t + D_t z_t + K^F_t (y_t - Cx_t xhat_t - Cz_t z_t)
//
// Throws OutOfOrderUpdate unless state.time == t < T.
LocalFilterState filter_update(const LocalFilterState& state,
                               const GainSchedule& gains, const Vector& y,
                               const Vector& z, const Vector& u_prev, int t);

// full_obs_action applied to corrected_estimate(state, gains, y, z).
Vector noisy_obs_action(const GainSchedule& gains, const LocalFilterState& state,
                        const Vector& y, const Vector& z, int t);

}  // namespace mflqg
