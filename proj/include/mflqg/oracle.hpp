#pragma once

#include <vector>

#include "mflqg/control.hpp"
#include "mflqg/model.hpp"
#include "mflqg/model_io.hpp"

namespace mflqg {

inline constexpr int kDefaultStackedCap = 400;

// The population written as one centralized system on the stacked state
// (x^1; ...; x^n):
//   A~ = I (x) A + (1/n) 11' (x) D      B~ = I (x) B
//   Q~ = (1/n) I (x) Q + (1/n^2) 11' (x) P
//   R~ = (1/n) I (x) R
struct StackedModel {
  int horizon = 0;
  int n_agents = 0;
  StepMatrices A, B, Q, R;
  Matrix sigma_x, sigma_w;
  Vector initial_mean;
};

// Throws CapExceeded when n * d_x exceeds `cap`.
StackedModel build_stacked_model(const LqMeanFieldModel& model, int n,
                                 int cap = kDefaultStackedCap);

struct StackedSolution {
  StepMatrices value;  // M~_t, t = 1..T
  StepMatrices gain;   // K~_t with u~ = K~ x~, zero at T
  // Optimal expected cost including the accumulated noise terms.
  double optimal_cost = 0.0;
};

// Plain finite-horizon Riccati sweep on the stacked matrices. Deliberately
// shares no code with solve_control_riccati.
StackedSolution solve_stacked_riccati(const StackedModel& stacked);

struct EquivalenceReport {
  int n_agents = 0;
  double tolerance = 0.0;
  // ||K~_t - (I (x) Kx_t + (1/n) 11' (x) (Kz_t - Kx_t))||_F / ||K~_t||_F
  std::vector<double> gain_residuals;
  double max_gain_residual = 0.0;
  double centralized_cost = 0.0;
  double decentralized_cost = 0.0;
  // (J_decentralized - J_centralized) / |J_centralized|
  double cost_gap = 0.0;
  bool passed = false;
};

// Compares `gains` against the stacked optimum for a population of n.
EquivalenceReport check_gains_against_oracle(const LqMeanFieldModel& model,
                                             const GainSchedule& gains, int n,
                                             double tolerance,
                                             int cap = kDefaultStackedCap);

// Same, for the mean-field gains solved from the model.
EquivalenceReport check_equivalence(const LqMeanFieldModel& model, int n,
                                    double tolerance,
                                    int cap = kDefaultStackedCap);

Json equivalence_report_to_json(const EquivalenceReport& report);

}  // namespace mflqg
