#include "mflqg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mflqg/errors.hpp"
#include "mflqg/rng.hpp"

namespace mflqg {

LinearStrategy LinearStrategy::from_gains(const GainSchedule& gains) {
  LinearStrategy s;
  for (std::size_t i = 0; i < gains.Kx.size(); ++i) {
    s.Fx.push_back(gains.Kx[i]);
    s.Fz.push_back(gains.Kz[i] - gains.Kx[i]);
  }
  return s;
}

LinearStrategy LinearStrategy::zero(const LqMeanFieldModel& model) {
  const Matrix z = Matrix::Zero(model.dims.control, model.dims.state);
  return {broadcast(z, model.horizon), broadcast(z, model.horizon)};
}

namespace {

void check_strategy(const LqMeanFieldModel& model, const LinearStrategy& s) {
  const auto T = static_cast<std::size_t>(model.horizon);
  if (s.Fx.size() != T || s.Fz.size() != T) {
    throw IncompatibleStrategy("strategy must have one gain pair per step");
  }
  for (std::size_t i = 0; i < T; ++i) {
    for (const Matrix* m : {&s.Fx[i], &s.Fz[i]}) {
      if (m->rows() != model.dims.control || m->cols() != model.dims.state) {
        throw IncompatibleStrategy("strategy gain at t=" + std::to_string(i + 1) +
                                   " has wrong shape");
      }
    }
  }
}

void check_gains(const LqMeanFieldModel& model, const GainSchedule& g) {
  if (g.horizon != model.horizon ||
      g.Kx.size() != static_cast<std::size_t>(model.horizon)) {
    throw IncompatibleStrategy("gain schedule horizon does not match model");
  }
  check_strategy(model, LinearStrategy{g.Kx, g.Kz});
  if (model.observation_mode == ObservationMode::kNoisy) {
    if (!g.filter) {
      throw IncompatibleStrategy("noisy-observation model needs filter gains");
    }
    const auto& f = *g.filter;
    if (f.correction.size() != static_cast<std::size_t>(model.horizon) ||
        f.kalman.size() + 1 != static_cast<std::size_t>(model.horizon)) {
      throw IncompatibleStrategy("filter gains do not cover the horizon");
    }
  }
}

struct NoiseFactors {
  Matrix initial, process, observation;
  explicit NoiseFactors(const LqMeanFieldModel& m)
      : initial(psd_factor(m.sigma_x)),
        process(psd_factor(m.sigma_w)),
        observation(psd_factor(m.sigma_v)) {}
};

Vector draw(const Matrix& factor, std::uint64_t seed, std::uint64_t run,
            int agent, int step, NoiseKind kind) {
  GaussianStream stream(seed, run, static_cast<std::uint32_t>(agent),
                        static_cast<std::uint32_t>(step), kind);
  return factor * stream.draw(factor.cols());
}

SimulationTrace run_closed_loop(const LqMeanFieldModel& model,
                                const LinearStrategy* linear,
                                const GainSchedule* gains, std::uint64_t seed,
                                std::uint64_t run) {
  const int T = model.horizon;
  const int n = model.n_agents;
  const Eigen::Index dx = model.dims.state;
  const Eigen::Index du = model.dims.control;
  const Eigen::Index dy = model.dims.observation;
  const bool noisy = model.observation_mode == ObservationMode::kNoisy;
  const NoiseFactors factors(model);

  SimulationTrace tr;
  tr.seed = seed;
  tr.run = run;
  tr.model_fingerprint = model_fingerprint(model);
  tr.mode = model.observation_mode;
  tr.horizon = T;
  tr.n_agents = n;

  Matrix x(dx, n);
  for (int i = 0; i < n; ++i) {
    x.col(i) = model.initial_mean +
               draw(factors.initial, seed, run, i, 1, NoiseKind::kInitialState);
  }

  std::vector<LocalFilterState> filters;
  if (noisy) {
    filters.assign(static_cast<std::size_t>(n), initial_filter_state(*gains));
  }

  for (int t = 1; t <= T; ++t) {
    const auto s = static_cast<std::size_t>(t - 1);
    const Vector z = column_mean(x);
    Matrix u(du, n);
    if (noisy) {
      Matrix y(dy, n);
      Matrix est(dx, n);
      for (int i = 0; i < n; ++i) {
        y.col(i) = model.Cx[s] * x.col(i) + model.Cz[s] * z +
                   draw(factors.observation, seed, run, i, t,
                        NoiseKind::kObservation);
        est.col(i) = filters[static_cast<std::size_t>(i)].estimate;
        u.col(i) = noisy_obs_action(*gains, filters[static_cast<std::size_t>(i)],
                                    y.col(i), z, t);
      }
      tr.observations.push_back(std::move(y));
      tr.estimates.push_back(std::move(est));
    } else {
      u = linear->Fx[s] * x + (linear->Fz[s] * z).replicate(1, n);
    }

    tr.stage_costs.push_back(
        stage_cost(x, u, model.Q[s], model.R[s], model.P[s]));
    tr.mean_field.push_back(z);
    tr.mean_action.push_back(column_mean(u));

    if (t < T) {
      Matrix w(dx, n);
      for (int i = 0; i < n; ++i) {
        w.col(i) = draw(factors.process, seed, run, i, t, NoiseKind::kProcess);
      }
      Matrix next = model.A[s] * x + model.B[s] * u +
                    (model.D[s] * z).replicate(1, n) + w;
      if (noisy) {
        const Matrix& y = tr.observations.back();
        for (int i = 0; i < n; ++i) {
          auto& f = filters[static_cast<std::size_t>(i)];
          f = filter_update(f, *gains, y.col(i), z, u.col(i), t);
        }
      }
      tr.process_noise.push_back(std::move(w));
      tr.states.push_back(std::move(x));
      tr.actions.push_back(std::move(u));
      x = std::move(next);
    } else {
      tr.states.push_back(std::move(x));
      tr.actions.push_back(std::move(u));
    }
  }
  tr.total_cost = pairwise_sum(tr.stage_costs.data(), tr.stage_costs.size());
  return tr;
}

}  // namespace

SimulationTrace simulate(const LqMeanFieldModel& model,
                         const LinearStrategy& strategy, std::uint64_t seed,
                         std::uint64_t run) {
  if (model.observation_mode != ObservationMode::kFull) {
    throw IncompatibleStrategy(
        "a linear state-feedback strategy needs a full-observation model");
  }
  check_strategy(model, strategy);
  return run_closed_loop(model, &strategy, nullptr, seed, run);
}

SimulationTrace simulate(const LqMeanFieldModel& model,
                         const GainSchedule& gains, std::uint64_t seed,
                         std::uint64_t run) {
  check_gains(model, gains);
  if (model.observation_mode == ObservationMode::kFull) {
    const LinearStrategy s = LinearStrategy::from_gains(gains);
    return run_closed_loop(model, &s, nullptr, seed, run);
  }
  return run_closed_loop(model, nullptr, &gains, seed, run);
}

AuxiliaryTrace decompose_auxiliary(const LqMeanFieldModel& model,
                                   const SimulationTrace& trace) {
  AuxiliaryTrace aux;
  const auto T = trace.states.size();
  for (std::size_t s = 0; s < T; ++s) {
    const Matrix& x = trace.states[s];
    const Matrix& u = trace.actions[s];
    const Vector& z = trace.mean_field[s];
    const Vector& uz = trace.mean_action[s];
    Matrix xbar = x.colwise() - z;
    Matrix ubar = u.colwise() - uz;
    aux.max_deviation_sum = std::max(
        aux.max_deviation_sum, pairwise_column_sum(xbar).cwiseAbs().maxCoeff());
    aux.max_action_deviation_sum =
        std::max(aux.max_action_deviation_sum,
                 pairwise_column_sum(ubar).cwiseAbs().maxCoeff());
    aux.state_deviations.push_back(std::move(xbar));
    aux.action_deviations.push_back(std::move(ubar));
    aux.mean_field.push_back(z);
    aux.mean_action.push_back(uz);
  }
  for (std::size_t s = 0; s + 1 < T && s < trace.process_noise.size(); ++s) {
    const Matrix& w = trace.process_noise[s];
    const Vector wbar = column_mean(w);
    const Matrix predicted = model.A[s] * aux.state_deviations[s] +
                             model.B[s] * aux.action_deviations[s] +
                             (w.colwise() - wbar);
    aux.max_deviation_residual =
        std::max(aux.max_deviation_residual,
                 (aux.state_deviations[s + 1] - predicted).cwiseAbs().maxCoeff());
    const Vector z_pred = (model.A[s] + model.D[s]) * aux.mean_field[s] +
                          model.B[s] * aux.mean_action[s] + wbar;
    aux.max_meanfield_residual =
        std::max(aux.max_meanfield_residual,
                 (aux.mean_field[s + 1] - z_pred).cwiseAbs().maxCoeff());
  }
  return aux;
}

CostIdentity cost_identity_check(const Matrix& states, const Matrix& actions,
                                 const Matrix& Q, const Matrix& R,
                                 const Matrix& P) {
  CostIdentity out;
  out.direct = stage_cost(states, actions, Q, R, P);
  const Vector z = column_mean(states);
  const Vector uz = column_mean(actions);
  const Matrix xbar = states.colwise() - z;
  const Matrix ubar = actions.colwise() - uz;
  const auto n = static_cast<std::size_t>(states.cols());
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    terms[i] = xbar.col(c).dot(Q * xbar.col(c)) + ubar.col(c).dot(R * ubar.col(c));
  }
  out.auxiliary = pairwise_sum(terms.data(), n) / static_cast<double>(n) +
                  z.dot((Q + P) * z) + uz.dot(R * uz);
  return out;
}

PolicyEvaluation exact_policy_cost(const LqMeanFieldModel& model,
                                   const LinearStrategy& strategy) {
  if (model.observation_mode != ObservationMode::kFull) {
    throw IncompatibleStrategy(
        "exact evaluation is defined for full-observation models only");
  }
  check_strategy(model, strategy);
  const int T = model.horizon;
  const Eigen::Index d = model.dims.state;
  const double n = model.n_agents;
  const double dev_share = 1.0 - 1.0 / n;
  const double mf_share = 1.0 / n;

  PolicyEvaluation ev;
  // Deviation block stays zero-mean and uncorrelated with the mean-field.
  Vector mz = model.initial_mean;
  Matrix cov_dev = dev_share * model.sigma_x;
  Matrix cov_mf = mf_share * model.sigma_x;

  for (int t = 1; t <= T; ++t) {
    const auto s = static_cast<std::size_t>(t - 1);
    const Matrix& fx = strategy.Fx[s];
    const Matrix g = fx + strategy.Fz[s];  // u^z = g z
    const Matrix w_dev = model.Q[s] + fx.transpose() * model.R[s] * fx;
    const Matrix w_mf = model.Q[s] + model.P[s] + g.transpose() * model.R[s] * g;

    StepCostBreakdown step;
    step.deviation = (w_dev * cov_dev).trace();
    step.meanfield_noise = (w_mf * cov_mf).trace();
    step.meanfield_mean = mz.dot(w_mf * mz);
    ev.steps.push_back(step);

    Vector joint_mean = Vector::Zero(2 * d);
    joint_mean.tail(d) = mz;
    Matrix joint_cov = Matrix::Zero(2 * d, 2 * d);
    joint_cov.topLeftCorner(d, d) = cov_dev;
    joint_cov.bottomRightCorner(d, d) = cov_mf;
    ev.mean.push_back(std::move(joint_mean));
    ev.covariance.push_back(std::move(joint_cov));

    if (t < T) {
      const Matrix a_dev = model.A[s] + model.B[s] * fx;
      const Matrix a_mf = model.A[s] + model.D[s] + model.B[s] * g;
      cov_dev = symmetrized(a_dev * cov_dev * a_dev.transpose() +
                            dev_share * model.sigma_w);
      cov_mf = symmetrized(a_mf * cov_mf * a_mf.transpose() +
                           mf_share * model.sigma_w);
      mz = a_mf * mz;
    }
  }
  std::vector<double> totals;
  for (const auto& s : ev.steps) {
    totals.push_back(s.total());
  }
  ev.expected_cost = pairwise_sum(totals.data(), totals.size());
  return ev;
}

namespace {

template <typename Policy>
MonteCarloEstimate run_monte_carlo(const LqMeanFieldModel& model,
                                   const Policy& policy, int runs,
                                   std::uint64_t seed, int threads) {
  if (runs < 2) {
    throw ValidationError("Monte Carlo needs at least 2 runs");
  }
  threads = std::clamp(threads, 1, runs);
  std::vector<double> costs(static_cast<std::size_t>(runs));
  // Run 0 on the calling thread so compatibility errors surface here.
  costs[0] = simulate(model, policy, seed, 0).total_cost;
  auto worker = [&](int first) {
    for (int r = first; r < runs; r += threads) {
      if (r == 0) {
        continue;
      }
      costs[static_cast<std::size_t>(r)] =
          simulate(model, policy, seed, static_cast<std::uint64_t>(r)).total_cost;
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < threads; ++k) {
      pool.emplace_back(worker, k);
    }
  }

  // Shifted two-pass statistics: identical runs give exactly zero spread.
  const double shift = costs.front();
  std::vector<double> shifted(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    shifted[i] = costs[i] - shift;
  }
  const double count = runs;
  const double mean_shifted = pairwise_sum(shifted.data(), shifted.size()) / count;
  std::vector<double> sq(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double d = shifted[i] - mean_shifted;
    sq[i] = d * d;
  }
  const double variance = pairwise_sum(sq.data(), sq.size()) / (count - 1.0);

  MonteCarloEstimate est;
  est.mean = shift + mean_shifted;
  est.standard_error = std::sqrt(variance / count);
  est.runs = runs;
  return est;
}

}  // namespace

MonteCarloEstimate monte_carlo_cost(const LqMeanFieldModel& model,
                                    const LinearStrategy& strategy, int runs,
                                    std::uint64_t seed, int threads) {
  return run_monte_carlo(model, strategy, runs, seed, threads);
}

MonteCarloEstimate monte_carlo_cost(const LqMeanFieldModel& model,
                                    const GainSchedule& gains, int runs,
                                    std::uint64_t seed, int threads) {
  return run_monte_carlo(model, gains, runs, seed, threads);
}

}  // namespace mflqg
