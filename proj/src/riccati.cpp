#include "mflqg/riccati.hpp"

#include <algorithm>
#include <string>

#include "mflqg/errors.hpp"

namespace mflqg {

namespace {

struct RiccatiStep {
  Matrix value;
  Matrix gain;
};

// One backward step of M = Q + A'MA - A'MB (B'MB + R)^{-1} B'MA.
RiccatiStep backward_step(const Matrix& a, const Matrix& b, const Matrix& q,
                          const Matrix& r, const Matrix& next,
                          const std::string& what) {
  const Matrix mb = next * b;
  const Matrix lhs = symmetrized(b.transpose() * mb + r);
  const Matrix rhs = mb.transpose() * a;
  RiccatiStep s;
  s.gain = -solve_spd(lhs, rhs, what);
  s.value = symmetrized(q + a.transpose() * next * a + rhs.transpose() * s.gain);
  return s;
}

}  // namespace

ControlRiccatiSolution solve_control_riccati(const LqMeanFieldModel& model) {
  const int T = model.horizon;
  const auto n = static_cast<std::size_t>(T);
  const Eigen::Index dx = model.dims.state;
  const Eigen::Index du = model.dims.control;

  ControlRiccatiSolution sol;
  sol.Mx.resize(n);
  sol.Mz.resize(n);
  sol.Kx.resize(n);
  sol.Kz.resize(n);
  sol.A_bar.resize(n - 1);

  sol.Mx[n - 1] = model.Q[n - 1];
  sol.Mz[n - 1] = symmetrized(model.Q[n - 1] + model.P[n - 1]);
  sol.Kx[n - 1] = Matrix::Zero(du, dx);
  sol.Kz[n - 1] = Matrix::Zero(du, dx);

  for (int t = T - 1; t >= 1; --t) {
    const auto i = static_cast<std::size_t>(t - 1);
    sol.A_bar[i] = model.A[i] + model.D[i];
    const std::string step = " at t=" + std::to_string(t);
    RiccatiStep x = backward_step(model.A[i], model.B[i], model.Q[i],
                                  model.R[i], sol.Mx[i + 1], "B'MxB + R" + step);
    RiccatiStep z = backward_step(sol.A_bar[i], model.B[i],
                                  model.Q[i] + model.P[i], model.R[i],
                                  sol.Mz[i + 1], "B'MzB + R" + step);
    sol.Mx[i] = std::move(x.value);
    sol.Kx[i] = std::move(x.gain);
    sol.Mz[i] = std::move(z.value);
    sol.Kz[i] = std::move(z.gain);
  }
  return sol;
}

FilterRiccatiSolution solve_filter_riccati(const LqMeanFieldModel& model) {
  const int T = model.horizon;
  const auto n = static_cast<std::size_t>(T);

  FilterRiccatiSolution sol;
  sol.error_cov.resize(n);
  sol.kalman_gain.resize(n - 1);
  sol.correction_gain.resize(n);
  sol.posterior_cov.resize(n);

  sol.error_cov[0] = model.sigma_x;
  for (int t = 1; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    const Matrix& s = sol.error_cov[i];
    const Matrix& c = model.Cx[i];
    const Matrix innovation = symmetrized(c * s * c.transpose() + model.sigma_v);
    const Matrix sct = s * c.transpose();
    // L = S C' (C S C' + V)^{-1}, computed as a solve on the transpose.
    const Matrix l =
        solve_spd(innovation, sct.transpose(),
                  "innovation covariance at t=" + std::to_string(t))
            .transpose();
    sol.correction_gain[i] = l;
    sol.posterior_cov[i] = symmetrized(s - l * sct.transpose());
    if (t < T) {
      const Matrix& a = model.A[i];
      sol.kalman_gain[i] = a * l;
      sol.error_cov[i + 1] = symmetrized(
          a * s * a.transpose() - a * l * sct.transpose() * a.transpose() +
          model.sigma_w);
    }
  }
  return sol;
}

namespace {

double relative_residual(const Matrix& stored, const Matrix& recomputed) {
  const double scale = std::max(1.0, stored.norm());
  return (stored - recomputed).norm() / scale;
}

Matrix lu_riccati_rhs(const Matrix& a, const Matrix& b, const Matrix& q,
                      const Matrix& r, const Matrix& next) {
  const Matrix inv = (b.transpose() * next * b + r).partialPivLu().inverse();
  return -a.transpose() * next * b * inv * b.transpose() * next * a +
         a.transpose() * next * a + q;
}

}  // namespace

double control_riccati_residual(const LqMeanFieldModel& model,
                                const ControlRiccatiSolution& sol) {
  const auto n = static_cast<std::size_t>(model.horizon);
  double worst = std::max(relative_residual(sol.Mx[n - 1], model.Q[n - 1]),
                          relative_residual(sol.Mz[n - 1],
                                            model.Q[n - 1] + model.P[n - 1]));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Matrix abar = model.A[i] + model.D[i];
    worst = std::max(worst, relative_residual(
                                sol.Mx[i], lu_riccati_rhs(model.A[i], model.B[i],
                                                          model.Q[i], model.R[i],
                                                          sol.Mx[i + 1])));
    worst = std::max(
        worst, relative_residual(
                   sol.Mz[i], lu_riccati_rhs(abar, model.B[i],
                                             model.Q[i] + model.P[i],
                                             model.R[i], sol.Mz[i + 1])));
  }
  return worst;
}

double filter_riccati_residual(const LqMeanFieldModel& model,
                               const FilterRiccatiSolution& sol) {
  const auto n = static_cast<std::size_t>(model.horizon);
  double worst = relative_residual(sol.error_cov[0], model.sigma_x);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Matrix& a = model.A[i];
    const Matrix& c = model.Cx[i];
    const Matrix& s = sol.error_cov[i];
    const Matrix inv =
        (c * s * c.transpose() + model.sigma_v).partialPivLu().inverse();
    const Matrix next = -a * s * c.transpose() * inv * c * s * a.transpose() +
                        a * s * a.transpose() + model.sigma_w;
    worst = std::max(worst, relative_residual(sol.error_cov[i + 1], next));
  }
  return worst;
}

Json gains_to_json(const LqMeanFieldModel& model,
                   const ControlRiccatiSolution& control,
                   const std::optional<FilterRiccatiSolution>& filter) {
  Json doc;
  doc["horizon"] = model.horizon;
  doc["observation_mode"] =
      model.observation_mode == ObservationMode::kNoisy ? "noisy" : "full";
  doc["dims"] = {{"d_x", model.dims.state},
                 {"d_u", model.dims.control},
                 {"d_y", model.dims.observation}};
  Json steps = Json::object();
  for (int t = 1; t <= model.horizon; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    Json step;
    step["Kx"] = matrix_to_json(control.Kx[i]);
    step["Kz"] = matrix_to_json(control.Kz[i]);
    step["Mx"] = matrix_to_json(control.Mx[i]);
    step["Mz"] = matrix_to_json(control.Mz[i]);
    if (filter) {
      if (t < model.horizon) {
        step["KF"] = matrix_to_json(filter->kalman_gain[i]);
      }
      step["L"] = matrix_to_json(filter->correction_gain[i]);
      step["Sigma_e"] = matrix_to_json(filter->error_cov[i]);
    }
    steps[std::to_string(t)] = std::move(step);
  }
  doc["steps"] = std::move(steps);
  return doc;
}

}  // namespace mflqg
