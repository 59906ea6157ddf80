#include "mflqg/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "mflqg/errors.hpp"
#include "mflqg/sim.hpp"

namespace mflqg {

StackedModel build_stacked_model(const LqMeanFieldModel& model, int n, int cap) {
  if (n < 1) {
    throw DimensionMismatch("stacked model needs at least one agent");
  }
  const long long size = static_cast<long long>(n) * model.dims.state;
  if (size > cap) {
    throw CapExceeded("stacked dimension " + std::to_string(size) +
                      " exceeds cap " + std::to_string(cap));
  }
  const double inv_n = 1.0 / n;
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix ones = Matrix::Ones(n, n);

  StackedModel s;
  s.horizon = model.horizon;
  s.n_agents = n;
  for (int t = 0; t < model.horizon; ++t) {
    const auto i = static_cast<std::size_t>(t);
    s.A.push_back(kron(eye, model.A[i]) + inv_n * kron(ones, model.D[i]));
    s.B.push_back(kron(eye, model.B[i]));
    s.Q.push_back(inv_n * kron(eye, model.Q[i]) +
                  inv_n * inv_n * kron(ones, model.P[i]));
    s.R.push_back(inv_n * kron(eye, model.R[i]));
  }
  s.sigma_x = kron(eye, model.sigma_x);
  s.sigma_w = kron(eye, model.sigma_w);
  s.initial_mean = model.initial_mean.replicate(n, 1);
  return s;
}

StackedSolution solve_stacked_riccati(const StackedModel& st) {
  const auto T = static_cast<std::size_t>(st.horizon);
  StackedSolution sol;
  sol.value.resize(T);
  sol.gain.resize(T);
  sol.value[T - 1] = st.Q[T - 1];
  sol.gain[T - 1] = Matrix::Zero(st.B[T - 1].cols(), st.A[T - 1].cols());

  double noise_terms = 0.0;
  for (std::size_t k = T - 1; k-- > 0;) {
    const Matrix& a = st.A[k];
    const Matrix& b = st.B[k];
    const Matrix& next = sol.value[k + 1];
    noise_terms += (next * st.sigma_w).trace();

    const Matrix h = b.transpose() * next * b + st.R[k];
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("stacked B'MB + R not positive definite at t=" +
                             std::to_string(k + 1));
    }
    const Matrix g = b.transpose() * next * a;
    sol.gain[k] = -llt.solve(g);
    const Matrix m = st.Q[k] + a.transpose() * next * a + g.transpose() * sol.gain[k];
    sol.value[k] = 0.5 * (m + m.transpose());
  }
  const Matrix& m1 = sol.value.front();
  sol.optimal_cost = (m1 * st.sigma_x).trace() +
                     st.initial_mean.dot(m1 * st.initial_mean) + noise_terms;
  return sol;
}

EquivalenceReport check_gains_against_oracle(const LqMeanFieldModel& model,
                                             const GainSchedule& gains, int n,
                                             double tolerance, int cap) {
  LqMeanFieldModel population = model;
  population.n_agents = n;
  const StackedModel stacked = build_stacked_model(population, n, cap);
  const StackedSolution central = solve_stacked_riccati(stacked);

  EquivalenceReport rep;
  rep.n_agents = n;
  rep.tolerance = tolerance;
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix ones = Matrix::Ones(n, n);
  for (std::size_t k = 0; k < central.gain.size(); ++k) {
    const Matrix structured =
        kron(eye, gains.Kx[k]) + (1.0 / n) * kron(ones, gains.Kz[k] - gains.Kx[k]);
    const Matrix& centralized = central.gain[k];
    const double diff = (centralized - structured).norm();
    const double scale = centralized.norm();
    const double r = scale > 0.0 ? diff / scale : diff;
    rep.gain_residuals.push_back(r);
    rep.max_gain_residual = std::max(rep.max_gain_residual, r);
  }

  population.observation_mode = ObservationMode::kFull;
  rep.centralized_cost = central.optimal_cost;
  rep.decentralized_cost =
      exact_policy_cost(population, LinearStrategy::from_gains(gains)).expected_cost;
  const double gap = rep.decentralized_cost - rep.centralized_cost;
  const double scale = std::abs(rep.centralized_cost);
  rep.cost_gap = scale > 0.0 ? gap / scale : gap;
  rep.passed = rep.max_gain_residual <= tolerance &&
               std::abs(rep.cost_gap) <= tolerance;
  return rep;
}

EquivalenceReport check_equivalence(const LqMeanFieldModel& model, int n,
                                    double tolerance, int cap) {
  const GainSchedule gains =
      make_gain_schedule(model, solve_control_riccati(model), std::nullopt);
  return check_gains_against_oracle(model, gains, n, tolerance, cap);
}

Json equivalence_report_to_json(const EquivalenceReport& r) {
  Json j;
  j["n_agents"] = r.n_agents;
  j["tolerance"] = r.tolerance;
  Json residuals = Json::object();
  for (std::size_t k = 0; k < r.gain_residuals.size(); ++k) {
    residuals[std::to_string(k + 1)] = r.gain_residuals[k];
  }
  j["gain_residuals"] = std::move(residuals);
  j["max_gain_residual"] = r.max_gain_residual;
  j["centralized_cost"] = r.centralized_cost;
  j["decentralized_cost"] = r.decentralized_cost;
  j["cost_gap"] = r.cost_gap;
  j["verdict"] = r.passed ? "pass" : "fail";
  return j;
}

}  // namespace mflqg
