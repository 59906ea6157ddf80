#include <random>

#include <gtest/gtest.h>

#include "mflqg/errors.hpp"
#include "mflqg/model.hpp"
#include "test_support.hpp"

namespace mflqg {
namespace {

using testing::scalar;

LqMeanFieldModel all_ones(int horizon) {
  LqMeanFieldModel m;
  m.horizon = horizon;
  m.n_agents = 1;
  m.dims = {1, 1, 1};
  m.A = m.B = m.D = m.Q = m.R = m.P = {scalar(1)};
  m.sigma_x = m.sigma_w = scalar(1);
  return m;
}

TEST(ValidateModel, AcceptsScalarOnes) {
  const LqMeanFieldModel m = validate_model(all_ones(2));
  EXPECT_EQ(m.A.size(), 2u);
  EXPECT_EQ(m.Cx.size(), 2u);  // defaulted in full mode
  EXPECT_EQ(m.sigma_v.rows(), 1);
  EXPECT_EQ(m.initial_mean, Vector::Zero(1));
}

TEST(ValidateModel, RejectsZeroR) {
  LqMeanFieldModel m = all_ones(2);
  m.R = {scalar(1), scalar(0)};
  EXPECT_THROW(validate_model(m), NotPositiveDefinite);
}

TEST(ValidateModel, RejectsWrongBShape) {
  LqMeanFieldModel m = all_ones(2);
  m.B = {Matrix::Ones(1, 2)};
  try {
    validate_model(m);
    FAIL() << "expected DimensionMismatch";
  } catch (const DimensionMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("B[t=1]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("1x1"), std::string::npos);
  }
}

TEST(ValidateModel, RejectsWrongSequenceLength) {
  LqMeanFieldModel m = all_ones(3);
  m.A = {scalar(1), scalar(1)};
  EXPECT_THROW(validate_model(m), DimensionMismatch);
}

TEST(ValidateModel, RejectsIndefiniteQAndCovariance) {
  LqMeanFieldModel m = all_ones(2);
  m.Q = {scalar(-1e-6)};
  EXPECT_THROW(validate_model(m), NotPositiveSemidefinite);
  m = all_ones(2);
  m.sigma_w = scalar(-1);
  EXPECT_THROW(validate_model(m), NotPositiveSemidefinite);
  // Within tolerance of zero is accepted.
  m = all_ones(2);
  m.Q = {scalar(-1e-11)};
  EXPECT_NO_THROW(validate_model(m));
}

TEST(ValidateModel, SymmetrizesWithinTolerance) {
  LqMeanFieldModel m;
  m.horizon = 1;
  m.dims = {2, 1, 1};
  m.A = m.D = {Matrix::Identity(2, 2)};
  m.B = {Matrix::Ones(2, 1)};
  Matrix q(2, 2);
  q << 1, 0.5 + 5e-11, 0.5, 1;
  m.Q = {q};
  m.P = {Matrix::Zero(2, 2)};
  m.R = {scalar(1)};
  m.sigma_x = m.sigma_w = Matrix::Identity(2, 2);
  const LqMeanFieldModel v = validate_model(m);
  EXPECT_EQ(v.Q[0], v.Q[0].transpose());

  q(0, 1) = 0.6;
  m.Q = {q};
  EXPECT_THROW(validate_model(m), NotSymmetric);
}

TEST(ValidateModel, NoisyModeRequiresObservationMatrices) {
  LqMeanFieldModel m = all_ones(2);
  m.observation_mode = ObservationMode::kNoisy;
  EXPECT_THROW(validate_model(m), DimensionMismatch);
  m.Cx = m.Cz = {scalar(1)};
  m.sigma_v = scalar(1);
  EXPECT_NO_THROW(validate_model(m));
}

TEST(ValidateModel, IsIdempotent) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    testing::RandomModelOptions o;
    o.noisy = (k % 2) == 1;
    o.time_varying = (k % 3) != 0;
    const LqMeanFieldModel once = testing::random_model(rng, o);
    EXPECT_TRUE(validate_model(once) == once);
  }
}

TEST(ReduceCrossTerm, ZeroCrossTermLeavesPUnchanged) {
  const CanonicalCost c = reduce_cross_term({{scalar(1)}, {scalar(0)}, {scalar(1)}, {scalar(3)}});
  EXPECT_EQ(c.P[0](0, 0), 3.0);
}

TEST(ReduceCrossTerm, ScalarExampleAndRandomPopulations) {
  const CrossTermCost cost{{scalar(1)}, {scalar(2)}, {scalar(1)}, {scalar(3)}};
  const CanonicalCost c = reduce_cross_term(cost);
  EXPECT_EQ(c.P[0](0, 0), 5.0);

  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const Matrix x = testing::gaussian_matrix(rng, 1, 3, 2.0);
    const Matrix u = testing::gaussian_matrix(rng, 1, 3, 1.0);
    const double cross = cross_term_stage_cost(x, u, cost.Q[0], cost.S[0],
                                               cost.R[0], cost.P[0]);
    const double reduced = stage_cost(x, u, c.Q[0], c.R[0], c.P[0]);
    EXPECT_LE(std::abs(cross - reduced), 1e-12 * std::max(1.0, std::abs(cross)));
  }
}

TEST(ReduceCrossTerm, AsymmetricCrossTermIsSymmetrizedThenRejected) {
  Matrix s(2, 2);
  s << 0, 2, 0, 0;
  const CrossTermCost cost{{Matrix::Identity(2, 2)},
                           {s},
                           {scalar(1)},
                           {Matrix::Zero(2, 2)}};
  EXPECT_THROW(reduce_cross_term(cost), NotPositiveSemidefinite);
  // The symmetrized reduction itself is [[0,1],[1,0]].
  EXPECT_EQ(symmetrized(s), (Matrix(2, 2) << 0, 1, 1, 0).finished());
}

TEST(ReduceCrossTerm, CostsAgreeOnRandomPopulations) {
  std::mt19937_64 rng(99);
  for (int n : {1, 2, 5}) {
    for (int dx : {1, 3}) {
      for (int rep = 0; rep < 20; ++rep) {
        const Matrix q = testing::random_psd(rng, dx, 1.0);
        const Matrix p0 = testing::random_psd(rng, dx, 1.0);
        const Matrix s = 0.3 * testing::gaussian_matrix(rng, dx, dx, 1.0);
        const Matrix r = testing::random_psd(rng, 1, 1.0, 0.5);
        const Matrix p = p0 + testing::random_psd(rng, dx, 2.0, 2.0);
        CanonicalCost c;
        try {
          c = reduce_cross_term({{q}, {s}, {r}, {p}});
        } catch (const NotPositiveSemidefinite&) {
          continue;
        }
        const Matrix x = testing::gaussian_matrix(rng, dx, n, 1.5);
        const Matrix u = testing::gaussian_matrix(rng, 1, n, 1.0);
        const double cross = cross_term_stage_cost(x, u, q, s, r, p);
        const double reduced = stage_cost(x, u, c.Q[0], c.R[0], c.P[0]);
        EXPECT_LE(std::abs(cross - reduced), 1e-12 * std::max(1.0, std::abs(cross)))
            << "n=" << n << " dx=" << dx;
      }
    }
  }
}

LqMeanFieldModel scalar_dynamics(double a) {
  LqMeanFieldModel m;
  m.horizon = 4;
  m.n_agents = 3;
  m.dims = {1, 1, 1};
  m.A = {scalar(a)};
  m.B = {scalar(1)};
  m.D = {scalar(0.2)};
  m.Q = m.P = {scalar(0)};
  m.R = {scalar(1)};
  m.sigma_x = scalar(2);
  m.sigma_w = scalar(1);
  m.initial_mean = Vector::Constant(1, 0.5);
  return m;
}

TEST(AugmentForTracking, ZeroWeightsLeaveOnlyControlPenalty) {
  TrackingSpec spec{scalar(0), scalar(1.5), scalar(0), {Vector::Constant(1, 3)}};
  const LqMeanFieldModel aug = augment_for_tracking(scalar_dynamics(0.8), spec);
  for (int t = 0; t < aug.horizon; ++t) {
    EXPECT_EQ(aug.Q[t], Matrix::Zero(3, 3));
    EXPECT_EQ(aug.P[t], Matrix::Zero(3, 3));
    EXPECT_EQ(aug.R[t], scalar(1.5));
  }
}

TEST(AugmentForTracking, ScalarStateWeightBlock) {
  TrackingSpec spec{scalar(1), scalar(1), scalar(1), {Vector::Constant(1, 3)}};
  const LqMeanFieldModel aug = augment_for_tracking(scalar_dynamics(0.8), spec);
  Matrix expected(3, 3);
  expected << 1, -1, 0, -1, 1, 0, 0, 0, 0;
  EXPECT_EQ(aug.Q[0], expected);
  Matrix expected_p(3, 3);
  expected_p << 1, 0, -3, 0, 0, 0, -3, 0, 9;
  EXPECT_EQ(aug.P[0], expected_p);
  EXPECT_EQ(aug.dims.state, 3);
  EXPECT_EQ(aug.initial_mean, (Vector(3) << 0.5, 0.5, 1).finished());
}

TEST(AugmentForTracking, CouplingActsOnlyOnOriginalCoordinates) {
  std::mt19937_64 rng(5);
  testing::RandomModelOptions o;
  o.dx = 2;
  o.horizon = 3;
  const LqMeanFieldModel base = testing::random_model(rng, o);
  TrackingSpec spec{Matrix::Identity(2, 2), Matrix::Identity(1, 1),
                    Matrix::Identity(2, 2), {Vector::Ones(2)}};
  const LqMeanFieldModel aug = augment_for_tracking(base, spec);
  for (int t = 0; t < aug.horizon; ++t) {
    EXPECT_EQ(aug.D[t].topLeftCorner(2, 2), base.D[t]);
    EXPECT_EQ(aug.D[t].rightCols(3), Matrix::Zero(5, 3));
    EXPECT_EQ(aug.D[t].bottomRows(3), Matrix::Zero(3, 5));
  }
}

TEST(AugmentForTracking, EncodesTrackingCostOnPopulations) {
  const LqMeanFieldModel base = validate_model(scalar_dynamics(0.8));
  TrackingSpec spec{scalar(0.5), scalar(1), scalar(2), {Vector::Constant(1, 3)}};
  const LqMeanFieldModel aug = augment_for_tracking(base, spec);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const Matrix x = testing::gaussian_matrix(rng, 1, 4, 2.0);
    const Matrix ref = testing::gaussian_matrix(rng, 1, 4, 2.0);
    const Matrix u = testing::gaussian_matrix(rng, 1, 4, 1.0);
    Matrix s(3, 4);
    s << x, ref, Matrix::Ones(1, 4);
    const double z = x.mean();
    double direct = 0.0;
    for (int i = 0; i < 4; ++i) {
      direct += 0.5 * std::pow(x(0, i) - ref(0, i), 2) + u(0, i) * u(0, i);
    }
    direct = direct / 4 + 2 * std::pow(z - 3, 2);
    EXPECT_NEAR(stage_cost(s, u, aug.Q[0], aug.R[0], aug.P[0]), direct, 1e-12);
  }
}

TEST(ModelFingerprint, StableAndSensitive) {
  const LqMeanFieldModel a = testing::scalar_fixture();
  LqMeanFieldModel b = a;
  EXPECT_EQ(model_fingerprint(a), model_fingerprint(b));
  EXPECT_EQ(model_fingerprint(a).size(), 16u);
  b.Q[1](0, 0) = 1.0000001;
  EXPECT_NE(model_fingerprint(a), model_fingerprint(b));
}

}  // namespace
}  // namespace mflqg
