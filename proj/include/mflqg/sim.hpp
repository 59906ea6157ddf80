#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mflqg/control.hpp"
#include "mflqg/model.hpp"

namespace mflqg {

// u^i_t = Fx_t x^i_t + Fz_t z_t for every subsystem, t = 1..T. The optimal
// strategy has Fx = Kx and Fz = Kz - Kx.
struct LinearStrategy {
  StepMatrices Fx, Fz;

  static LinearStrategy from_gains(const GainSchedule& gains);
  static LinearStrategy zero(const LqMeanFieldModel& model);
};

// One closed-loop realization. Step-indexed vectors hold step t at index t-1;
// population matrices have one column per subsystem.
struct SimulationTrace {
  std::uint64_t seed = 0;
  std::uint64_t run = 0;
  std::string model_fingerprint;
  ObservationMode mode = ObservationMode::kFull;
  int horizon = 0;
  int n_agents = 0;

  StepMatrices states;         // d_x x n, t = 1..T
  StepMatrices actions;        // d_u x n, t = 1..T
  StepMatrices observations;   // d_y x n, t = 1..T (noisy mode only)
  StepMatrices estimates;      // d_x x n predicted estimates (noisy mode only)
  StepMatrices process_noise;  // d_x x n, t = 1..T-1
  std::vector<Vector> mean_field;   // z_t
  std::vector<Vector> mean_action;  // u^z_t
  std::vector<double> stage_costs;
  double total_cost = 0.0;
};

// Draws x^i_1 ~ N(mu_X, Sigma_X), w^i_t ~ N(0, Sigma_W), v^i_t ~ N(0, Sigma_V)
// from per-(run, agent, step, kind) Philox substreams and steps the closed
// loop. Bit-reproducible for fixed (model, strategy, seed, run).
//
// A LinearStrategy requires a full-observation model. A GainSchedule runs the
// local estimators in noisy mode and acts on the true state in full mode.
// Anything else throws IncompatibleStrategy.
SimulationTrace simulate(const LqMeanFieldModel& model,
                         const LinearStrategy& strategy, std::uint64_t seed,
                         std::uint64_t run = 0);
SimulationTrace simulate(const LqMeanFieldModel& model,
                         const GainSchedule& gains, std::uint64_t seed,
                         std::uint64_t run = 0);

// Trace in deviation coordinates xbar^i = x^i - z, ubar^i = u^i - u^z, with
// the residuals of the deviation and mean-field dynamics re-evaluated on the
// recorded noise.
struct AuxiliaryTrace {
  StepMatrices state_deviations;
  StepMatrices action_deviations;
  std::vector<Vector> mean_field;
  std::vector<Vector> mean_action;

  double max_deviation_sum = 0.0;         // max_t |sum_i xbar^i_t|
  double max_action_deviation_sum = 0.0;  // max_t |sum_i ubar^i_t|
  double max_deviation_residual = 0.0;
  double max_meanfield_residual = 0.0;
};

AuxiliaryTrace decompose_auxiliary(const LqMeanFieldModel& model,
                                   const SimulationTrace& trace);

// The per-step cost evaluated directly and in deviation coordinates:
//   (1/n) sum [xbar'Q xbar + ubar'R ubar] + z'(Q+P)z + uz'R uz
struct CostIdentity {
  double direct = 0.0;
  double auxiliary = 0.0;
};

CostIdentity cost_identity_check(const Matrix& states, const Matrix& actions,
                                 const Matrix& Q, const Matrix& R,
                                 const Matrix& P);

// Expected per-step cost split by source. The deviation part scales exactly
// as (1 - 1/n) and the mean-field noise part as 1/n; the mean part does not
// depend on n.
struct StepCostBreakdown {
  double deviation = 0.0;
  double meanfield_mean = 0.0;
  double meanfield_noise = 0.0;

  double total() const { return deviation + meanfield_mean + meanfield_noise; }
};

struct PolicyEvaluation {
  double expected_cost = 0.0;
  std::vector<StepCostBreakdown> steps;
  // Joint moments of (xbar^i_t, z_t) for any single subsystem i.
  std::vector<Vector> mean;  // 2 d_x
  StepMatrices covariance;   // 2 d_x x 2 d_x
};

// Exact expected cost of a linear strategy on a full-observation model,
// propagating first and second moments in 2 d_x coordinates. Deviation noise
// has covariance (1 - 1/n) Sigma_W and mean-field noise Sigma_W / n.
PolicyEvaluation exact_policy_cost(const LqMeanFieldModel& model,
                                   const LinearStrategy& strategy);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int runs = 0;
};

// Runs r = 0..runs-1 each use substream run index r. Per-run costs are
// reduced in run order, so the result does not depend on `threads`.
MonteCarloEstimate monte_carlo_cost(const LqMeanFieldModel& model,
                                    const LinearStrategy& strategy, int runs,
                                    std::uint64_t seed, int threads = 1);
MonteCarloEstimate monte_carlo_cost(const LqMeanFieldModel& model,
                                    const GainSchedule& gains, int runs,
                                    std::uint64_t seed, int threads = 1);

}  // namespace mflqg
