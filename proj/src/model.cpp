#include "mflqg/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "mflqg/errors.hpp"

namespace mflqg {

StepMatrices broadcast(const Matrix& m, int horizon) {
  return StepMatrices(static_cast<std::size_t>(std::max(horizon, 0)), m);
}

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same(const StepMatrices& a, const StepMatrices& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same(a[i], b[i])) {
      return false;
    }
  }
  return true;
}

std::string label(const std::string& name, std::size_t index) {
  return name + "[t=" + std::to_string(index + 1) + "]";
}

void check_shape(const std::string& what, const Matrix& m, Eigen::Index rows,
                 Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected shape " << rows << "x" << cols << ", got "
       << m.rows() << "x" << m.cols();
    throw DimensionMismatch(os.str());
  }
}

StepMatrices expand(const std::string& name, const StepMatrices& seq,
                    int horizon, Eigen::Index rows, Eigen::Index cols) {
  StepMatrices out;
  if (seq.size() == 1) {
    out = broadcast(seq.front(), horizon);
  } else if (seq.size() == static_cast<std::size_t>(horizon)) {
    out = seq;
  } else {
    throw DimensionMismatch(name + ": expected 1 or " +
                            std::to_string(horizon) + " entries, got " +
                            std::to_string(seq.size()));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    check_shape(label(name, i), out[i], rows, cols);
  }
  return out;
}

Matrix checked_symmetric(const std::string& what, const Matrix& m) {
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  if (!std::isfinite(scale)) {
    throw ValidationError(what + ": non-finite entry");
  }
  if (asymmetry(m) > kSymmetryTolerance * scale) {
    throw NotSymmetric(what + ": asymmetry exceeds tolerance");
  }
  return symmetrized(m);
}

Matrix checked_psd(const std::string& what, const Matrix& m) {
  Matrix s = checked_symmetric(what, m);
  const double lambda = min_eigenvalue(s);
  if (lambda < -kPsdTolerance) {
    std::ostringstream os;
    os << what << ": not positive semidefinite (smallest eigenvalue " << lambda
       << ")";
    throw NotPositiveSemidefinite(os.str());
  }
  return s;
}

Matrix checked_pd(const std::string& what, const Matrix& m) {
  Matrix s = checked_symmetric(what, m);
  if (!has_positive_pivots(s)) {
    throw NotPositiveDefinite(what + ": not positive definite");
  }
  return s;
}

void check_finite(const std::string& what, const Matrix& m) {
  if (!m.allFinite()) {
    throw ValidationError(what + ": non-finite entry");
  }
}

}  // namespace

bool LqMeanFieldModel::operator==(const LqMeanFieldModel& o) const {
  return horizon == o.horizon && n_agents == o.n_agents && dims == o.dims &&
         same(A, o.A) && same(B, o.B) && same(D, o.D) && same(Q, o.Q) &&
         same(R, o.R) && same(P, o.P) && same(Cx, o.Cx) && same(Cz, o.Cz) &&
         same(sigma_x, o.sigma_x) && same(sigma_w, o.sigma_w) &&
         same(sigma_v, o.sigma_v) && same(initial_mean, o.initial_mean) &&
         observation_mode == o.observation_mode;
}

LqMeanFieldModel validate_model(const LqMeanFieldModel& model) {
  if (model.horizon < 1) {
    throw DimensionMismatch("horizon must be at least 1");
  }
  if (model.n_agents < 1) {
    throw DimensionMismatch("n_agents must be at least 1");
  }
  const auto& d = model.dims;
  if (d.state < 1 || d.control < 1 || d.observation < 1) {
    throw DimensionMismatch("dims: d_x, d_u and d_y must all be at least 1");
  }
  const int T = model.horizon;
  const Eigen::Index dx = d.state, du = d.control, dy = d.observation;
  const bool noisy = model.observation_mode == ObservationMode::kNoisy;

  LqMeanFieldModel out;
  out.horizon = T;
  out.n_agents = model.n_agents;
  out.dims = d;
  out.observation_mode = model.observation_mode;

  out.A = expand("A", model.A, T, dx, dx);
  out.B = expand("B", model.B, T, dx, du);
  out.D = expand("D", model.D, T, dx, dx);
  out.Q = expand("Q", model.Q, T, dx, dx);
  out.R = expand("R", model.R, T, du, du);
  out.P = expand("P", model.P, T, dx, dx);

  if (!noisy && model.Cx.empty()) {
    out.Cx = broadcast(Matrix::Zero(dy, dx), T);
  } else {
    out.Cx = expand("Cx", model.Cx, T, dy, dx);
  }
  if (!noisy && model.Cz.empty()) {
    out.Cz = broadcast(Matrix::Zero(dy, dx), T);
  } else {
    out.Cz = expand("Cz", model.Cz, T, dy, dx);
  }

  for (const auto* seq : {&out.A, &out.B, &out.D, &out.Cx, &out.Cz}) {
    for (std::size_t i = 0; i < seq->size(); ++i) {
      check_finite("dynamics/observation" + std::to_string(i + 1), (*seq)[i]);
    }
  }

  for (std::size_t i = 0; i < out.Q.size(); ++i) {
    out.Q[i] = checked_psd(label("Q", i), out.Q[i]);
    out.P[i] = checked_psd(label("P", i), out.P[i]);
    out.R[i] = checked_pd(label("R", i), out.R[i]);
  }

  check_shape("Sigma_X", model.sigma_x, dx, dx);
  check_shape("Sigma_W", model.sigma_w, dx, dx);
  out.sigma_x = checked_psd("Sigma_X", model.sigma_x);
  out.sigma_w = checked_psd("Sigma_W", model.sigma_w);
  if (!noisy && model.sigma_v.size() == 0) {
    out.sigma_v = Matrix::Zero(dy, dy);
  } else {
    check_shape("Sigma_V", model.sigma_v, dy, dy);
    out.sigma_v = checked_psd("Sigma_V", model.sigma_v);
  }

  if (model.initial_mean.size() == 0) {
    out.initial_mean = Vector::Zero(dx);
  } else {
    if (model.initial_mean.size() != dx) {
      throw DimensionMismatch("initial_mean: expected length " +
                              std::to_string(dx) + ", got " +
                              std::to_string(model.initial_mean.size()));
    }
    check_finite("initial_mean", model.initial_mean);
    out.initial_mean = model.initial_mean;
  }
  return out;
}

CanonicalCost reduce_cross_term(const CrossTermCost& cost) {
  const std::size_t steps = cost.Q.size();
  if (cost.S.size() != steps || cost.R.size() != steps ||
      cost.P.size() != steps) {
    throw DimensionMismatch("cross-term cost: Q, S, R, P must have equal length");
  }
  CanonicalCost out;
  for (std::size_t i = 0; i < steps; ++i) {
    const Eigen::Index dx = cost.Q[i].rows();
    check_shape(label("Q", i), cost.Q[i], dx, dx);
    check_shape(label("S", i), cost.S[i], dx, dx);
    check_shape(label("P", i), cost.P[i], dx, dx);
    check_shape(label("R", i), cost.R[i], cost.R[i].rows(), cost.R[i].rows());
    out.Q.push_back(checked_psd(label("Q", i), cost.Q[i]));
    out.R.push_back(checked_pd(label("R", i), cost.R[i]));
    const Matrix p = symmetrized(cost.P[i]) + symmetrized(cost.S[i]);
    out.P.push_back(checked_psd(label("P'", i), p));
  }
  return out;
}

namespace {

double local_quadratic_mean(const Matrix& cols, const Matrix& weight) {
  std::vector<double> terms(static_cast<std::size_t>(cols.cols()));
  for (Eigen::Index i = 0; i < cols.cols(); ++i) {
    terms[static_cast<std::size_t>(i)] = cols.col(i).dot(weight * cols.col(i));
  }
  return pairwise_sum(terms.data(), terms.size()) /
         static_cast<double>(cols.cols());
}

}  // namespace

double stage_cost(const Matrix& states, const Matrix& actions, const Matrix& Q,
                  const Matrix& R, const Matrix& P) {
  const Vector z = column_mean(states);
  return local_quadratic_mean(states, Q) + local_quadratic_mean(actions, R) +
         z.dot(P * z);
}

double cross_term_stage_cost(const Matrix& states, const Matrix& actions,
                             const Matrix& Q, const Matrix& S, const Matrix& R,
                             const Matrix& P) {
  const Vector z = column_mean(states);
  const Vector sz = S * z;
  std::vector<double> terms(static_cast<std::size_t>(states.cols()));
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    const auto x = states.col(i);
    terms[static_cast<std::size_t>(i)] = x.dot(Q * x) + x.dot(sz);
  }
  const double n = static_cast<double>(states.cols());
  return pairwise_sum(terms.data(), terms.size()) / n +
         local_quadratic_mean(actions, R) + z.dot(P * z);
}

LqMeanFieldModel augment_for_tracking(const LqMeanFieldModel& raw,
                                      const TrackingSpec& spec) {
  const LqMeanFieldModel model = validate_model(raw);
  const int T = model.horizon;
  const Eigen::Index dx = model.dims.state;
  const Eigen::Index du = model.dims.control;
  const Eigen::Index dy = model.dims.observation;
  const Eigen::Index na = 2 * dx + 1;
  const Eigen::Index one = 2 * dx;  // index of the constant coordinate

  check_shape("tracking state_weight", spec.state_weight, dx, dx);
  check_shape("tracking control_weight", spec.control_weight, du, du);
  check_shape("tracking meanfield_weight", spec.meanfield_weight, dx, dx);
  std::vector<Vector> refs;
  if (spec.meanfield_reference.size() == 1) {
    refs.assign(static_cast<std::size_t>(T), spec.meanfield_reference.front());
  } else if (spec.meanfield_reference.size() == static_cast<std::size_t>(T)) {
    refs = spec.meanfield_reference;
  } else {
    throw DimensionMismatch("tracking meanfield_reference: expected 1 or " +
                            std::to_string(T) + " entries");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].size() != dx) {
      throw DimensionMismatch(label("tracking meanfield_reference", i) +
                              ": expected length " + std::to_string(dx));
    }
  }

  LqMeanFieldModel out;
  out.horizon = T;
  out.n_agents = model.n_agents;
  out.dims = {static_cast<int>(na), model.dims.control, model.dims.observation};
  out.observation_mode = model.observation_mode;

  const Matrix& wq = spec.state_weight;
  const Matrix& wp = spec.meanfield_weight;
  Matrix q_aug = Matrix::Zero(na, na);
  q_aug.block(0, 0, dx, dx) = wq;
  q_aug.block(0, dx, dx, dx) = -wq;
  q_aug.block(dx, 0, dx, dx) = -wq;
  q_aug.block(dx, dx, dx, dx) = wq;

  for (int t = 0; t < T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    Matrix a = Matrix::Identity(na, na);
    a.block(0, 0, dx, dx) = model.A[i];
    Matrix b = Matrix::Zero(na, du);
    b.block(0, 0, dx, du) = model.B[i];
    Matrix dmat = Matrix::Zero(na, na);
    dmat.block(0, 0, dx, dx) = model.D[i];
    out.A.push_back(std::move(a));
    out.B.push_back(std::move(b));
    out.D.push_back(std::move(dmat));

    const Vector wpr = wp * refs[i];
    Matrix p_aug = Matrix::Zero(na, na);
    p_aug.block(0, 0, dx, dx) = wp;
    p_aug.block(0, one, dx, 1) = -wpr;
    p_aug.block(one, 0, 1, dx) = -wpr.transpose();
    p_aug(one, one) = refs[i].dot(wpr);
    out.Q.push_back(q_aug);
    out.P.push_back(std::move(p_aug));
    out.R.push_back(spec.control_weight);

    Matrix cx = Matrix::Zero(dy, na);
    cx.block(0, 0, dy, dx) = model.Cx[i];
    Matrix cz = Matrix::Zero(dy, na);
    cz.block(0, 0, dy, dx) = model.Cz[i];
    out.Cx.push_back(std::move(cx));
    out.Cz.push_back(std::move(cz));
  }

  out.sigma_x = Matrix::Zero(na, na);
  out.sigma_x.block(0, 0, dx, dx) = model.sigma_x;
  out.sigma_x.block(0, dx, dx, dx) = model.sigma_x;
  out.sigma_x.block(dx, 0, dx, dx) = model.sigma_x;
  out.sigma_x.block(dx, dx, dx, dx) = model.sigma_x;
  out.sigma_w = Matrix::Zero(na, na);
  out.sigma_w.block(0, 0, dx, dx) = model.sigma_w;
  out.sigma_v = model.sigma_v;

  out.initial_mean = Vector::Zero(na);
  out.initial_mean.segment(0, dx) = model.initial_mean;
  out.initial_mean.segment(dx, dx) = model.initial_mean;
  out.initial_mean(one) = 1.0;

  return validate_model(out);
}

namespace {

class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(std::int64_t v) { add_bytes(&v, sizeof v); }
  void add(const Matrix& m) {
    add(static_cast<std::int64_t>(m.rows()));
    add(static_cast<std::int64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double v = m(i, j);
        if (v == 0.0) {
          v = 0.0;  // fold -0.0
        }
        add_bytes(&v, sizeof v);
      }
    }
  }
  void add(const StepMatrices& seq) {
    add(static_cast<std::int64_t>(seq.size()));
    for (const auto& m : seq) {
      add(m);
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string model_fingerprint(const LqMeanFieldModel& model) {
  Fnv1a h;
  h.add(model.horizon);
  h.add(model.n_agents);
  h.add(model.dims.state);
  h.add(model.dims.control);
  h.add(model.dims.observation);
  h.add(model.observation_mode == ObservationMode::kNoisy ? 1 : 0);
  for (const auto* seq : {&model.A, &model.B, &model.D, &model.Q, &model.R,
                          &model.P, &model.Cx, &model.Cz}) {
    h.add(*seq);
  }
  h.add(model.sigma_x);
  h.add(model.sigma_w);
  h.add(model.sigma_v);
  h.add(Matrix(model.initial_mean));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h.value()));
  return buf;
}

}  // namespace mflqg
