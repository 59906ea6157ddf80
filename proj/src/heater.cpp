#include "mflqg/heater.hpp"

#include "mflqg/errors.hpp"

namespace mflqg {

LqMeanFieldModel heater_base_model(const HeaterParameters& hp) {
  if (hp.initial_mean != hp.ambient) {
    throw ValidationError(
        "heater preset: the linear form needs initial_mean == ambient");
  }
  auto scalar = [](double v) { return Matrix::Constant(1, 1, v); };
  LqMeanFieldModel m;
  m.horizon = hp.horizon;
  m.n_agents = hp.n_agents;
  m.dims = {1, 1, 1};
  m.A = {scalar(hp.a)};
  m.B = {scalar(hp.b)};
  m.D = {scalar(0.0)};
  m.Q = {scalar(hp.q)};
  m.R = {scalar(hp.r)};
  m.P = {scalar(hp.p)};
  m.sigma_x = scalar(hp.initial_variance);
  m.sigma_w = scalar(hp.process_variance);
  m.initial_mean = Vector::Constant(1, hp.initial_mean - hp.ambient);
  return validate_model(m);
}

TrackingSpec heater_tracking_spec(const HeaterParameters& hp) {
  TrackingSpec spec;
  spec.state_weight = Matrix::Constant(1, 1, hp.q);
  spec.control_weight = Matrix::Constant(1, 1, hp.r);
  spec.meanfield_weight = Matrix::Constant(1, 1, hp.p);
  spec.meanfield_reference = {Vector::Constant(1, hp.reference - hp.ambient)};
  return spec;
}

LqMeanFieldModel heater_model(const HeaterParameters& hp) {
  return augment_for_tracking(heater_base_model(hp), heater_tracking_spec(hp));
}

Vector heater_output_offset(const HeaterParameters& hp) {
  Vector offset(3);
  offset << hp.ambient, hp.ambient, 0.0;
  return offset;
}

Json heater_parameters_to_json(const HeaterParameters& hp) {
  Json j;
  j["n"] = hp.n_agents;
  j["T"] = hp.horizon;
  j["a"] = hp.a;
  j["b"] = hp.b;
  j["q"] = hp.q;
  j["p"] = hp.p;
  j["r"] = hp.r;
  j["x0"] = hp.ambient;
  j["z1"] = hp.initial_mean;
  j["z_ref"] = hp.reference;
  j["W_variance"] = hp.process_variance;
  j["X1_mean"] = hp.initial_mean;
  j["X1_variance"] = hp.initial_variance;
  return j;
}

}  // namespace mflqg
