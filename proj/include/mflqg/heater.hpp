#pragma once

#include "mflqg/model.hpp"
#include "mflqg/model_io.hpp"

namespace mflqg {

// Space-heater population tracking a target mean temperature. Each room
// relaxes toward the ambient temperature x0:
//   x_{t+1} - x0 = a (x_t - x0) + b u_t + w_t
// with cost (1/n) sum [q (x^i - x^i_1)^2 + r u^2] + p (z - z_ref)^2.
struct HeaterParameters {
  int n_agents = 30;
  int horizon = 90;
  double a = 0.8;
  double b = 1.0;
  double q = 0.5;
  double p = 1.0;
  double r = 1.0;
  double ambient = 22.0;         // x0
  double initial_mean = 22.0;    // z1
  double reference = 25.0;       // z_ref
  double process_variance = 1.0;
  double initial_variance = 2.0;
};

// Temperature dynamics in deviation-from-ambient coordinates (d_x = 1).
// Requires initial_mean == ambient.
LqMeanFieldModel heater_base_model(const HeaterParameters& params);

TrackingSpec heater_tracking_spec(const HeaterParameters& params);

// Augmented model with state (x - x0, x_ref - x0, 1).
LqMeanFieldModel heater_model(const HeaterParameters& params);

// Offset that maps augmented states back to temperatures.
Vector heater_output_offset(const HeaterParameters& params);

Json heater_parameters_to_json(const HeaterParameters& params);

}  // namespace mflqg
