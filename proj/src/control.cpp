#include "mflqg/control.hpp"

#include <string>

#include "mflqg/errors.hpp"

namespace mflqg {

GainSchedule make_gain_schedule(const LqMeanFieldModel& model,
                                const ControlRiccatiSolution& control,
                                const std::optional<FilterRiccatiSolution>& filter) {
  GainSchedule g;
  g.horizon = model.horizon;
  g.Kx = control.Kx;
  g.Kz = control.Kz;
  if (filter) {
    FilterGains f;
    f.kalman = filter->kalman_gain;
    f.correction = filter->correction_gain;
    f.A = model.A;
    f.B = model.B;
    f.D = model.D;
    f.Cx = model.Cx;
    f.Cz = model.Cz;
    f.initial_mean = model.initial_mean;
    g.filter = std::move(f);
  }
  return g;
}

GainSchedule solve_gain_schedule(const LqMeanFieldModel& model) {
  const ControlRiccatiSolution control = solve_control_riccati(model);
  std::optional<FilterRiccatiSolution> filter;
  if (model.observation_mode == ObservationMode::kNoisy) {
    filter = solve_filter_riccati(model);
  }
  return make_gain_schedule(model, control, filter);
}

namespace {

void check_step(const GainSchedule& gains, int t) {
  if (t < 1 || t > gains.horizon) {
    throw OutOfOrderUpdate("step " + std::to_string(t) + " outside 1.." +
                           std::to_string(gains.horizon));
  }
}

void check_length(const char* what, const Vector& v, Eigen::Index expected) {
  if (v.size() != expected) {
    throw DimensionMismatch(std::string(what) + ": expected length " +
                            std::to_string(expected) + ", got " +
                            std::to_string(v.size()));
  }
}

const FilterGains& require_filter(const GainSchedule& gains) {
  if (!gains.filter) {
    throw IncompatibleStrategy("gain schedule carries no filter gains");
  }
  return *gains.filter;
}

}  // namespace

Vector full_obs_action(const GainSchedule& gains, const Vector& x,
                       const Vector& z, int t) {
  check_step(gains, t);
  const auto i = static_cast<std::size_t>(t - 1);
  const Matrix& kx = gains.Kx[i];
  check_length("local state", x, kx.cols());
  check_length("mean-field", z, kx.cols());
  return kx * x + (gains.Kz[i] - kx) * z;
}

LocalFilterState initial_filter_state(const GainSchedule& gains) {
  return {require_filter(gains).initial_mean, 1};
}

Vector corrected_estimate(const LocalFilterState& state,
                          const GainSchedule& gains, const Vector& y,
                          const Vector& z) {
  const FilterGains& f = require_filter(gains);
  check_step(gains, state.time);
  const auto i = static_cast<std::size_t>(state.time - 1);
  check_length("observation", y, f.Cx[i].rows());
  check_length("estimate", state.estimate, f.Cx[i].cols());
  check_length("mean-field", z, f.Cz[i].cols());
  const Vector innovation = y - f.Cx[i] * state.estimate - f.Cz[i] * z;
  return state.estimate + f.correction[i] * innovation;
}

LocalFilterState filter_update(const LocalFilterState& state,
                               const GainSchedule& gains, const Vector& y,
                               const Vector& z, const Vector& u_prev, int t) {
  const FilterGains& f = require_filter(gains);
  if (state.time != t) {
    throw OutOfOrderUpdate("filter state is at t=" + std::to_string(state.time) +
                           " but update requested for t=" + std::to_string(t));
  }
  if (t < 1 || t >= gains.horizon) {
    throw OutOfOrderUpdate("no filter update past the horizon (t=" +
                           std::to_string(t) + ")");
  }
  const auto i = static_cast<std::size_t>(t - 1);
  check_length("observation", y, f.Cx[i].rows());
  check_length("estimate", state.estimate, f.A[i].cols());
  check_length("mean-field", z, f.D[i].cols());
  check_length("control", u_prev, f.B[i].cols());
  const Vector innovation = y - f.Cx[i] * state.estimate - f.Cz[i] * z;
  LocalFilterState next;
  next.estimate = f.A[i] * state.estimate + f.B[i] * u_prev + f.D[i] * z +
                  f.kalman[i] * innovation;
  next.time = t + 1;
  return next;
}

Vector noisy_obs_action(const GainSchedule& gains, const LocalFilterState& state,
                        const Vector& y, const Vector& z, int t) {
  if (state.time != t) {
    throw OutOfOrderUpdate("filter state is at t=" + std::to_string(state.time) +
                           " but action requested for t=" + std::to_string(t));
  }
  return full_obs_action(gains, corrected_estimate(state, gains, y, z), z, t);
}

}  // namespace mflqg
