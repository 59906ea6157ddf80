// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "mflqg/control.hpp"
#include "mflqg/heater.hpp"
#include "mflqg/oracle.hpp"
#include "mflqg/riccati.hpp"
#include "mflqg/sim.hpp"
#include "mflqg/trace_io.hpp"
#include "test_support.hpp"

namespace {

using namespace mflqg;
using mflqg::testing::scalar;
namespace fs = std::filesystem;

struct Outcome {
  bool passed = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && out_.passed) {
      out_.passed = false;
      out_.detail = what;
    }
  }
  void note(const std::string& s) {
    if (out_.passed) out_.detail = s;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Stacked-oracle equivalence on random models.
Outcome centralized_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(1001);
  const int ns[] = {1, 2, 3, 5};
  double worst_gain = 0.0, worst_cost = 0.0;
  for (int k = 0; k < 20; ++k) {
    mflqg::testing::RandomModelOptions o;
    o.dx = 1 + k % 2;
    o.du = 1 + (k / 2) % 2;
    o.horizon = 8;
    o.n_agents = ns[(k / 4) % 4];
    const LqMeanFieldModel m = mflqg::testing::random_model(rng, o);
    const EquivalenceReport r = check_equivalence(m, m.n_agents, 1e-8);
    worst_gain = std::max(worst_gain, r.max_gain_residual);
    worst_cost = std::max(worst_cost, std::abs(r.cost_gap));
    c.require(r.max_gain_residual <= 1e-8 && std::abs(r.cost_gap) <= 1e-8,
              fmt("model %g: gain residual %.3g, cost gap %.3g", k, r.max_gain_residual,
                  r.cost_gap));
  }
  const double elapsed = seconds_since(t0);
  c.require(elapsed <= 30.0, fmt("runtime %.2f s > 30 s", elapsed));
  c.note(fmt("20 models, max gain residual %.2e, max |cost gap| %.2e, %.2f s", worst_gain,
             worst_cost, elapsed));
  return c.result();
}

bool same_gains(const ControlRiccatiSolution& a, const ControlRiccatiSolution& b) {
  for (std::size_t t = 0; t < a.Kx.size(); ++t) {
    if (a.Kx[t] != b.Kx[t] || a.Kz[t] != b.Kz[t] || a.Mx[t] != b.Mx[t] ||
        a.Mz[t] != b.Mz[t]) {
      return false;
    }
  }
  return true;
}

// 2. Terminal gains, invariance to n and noise, coincidence when D = P = 0.
Outcome terminal_and_decoupling() {
  Check c;
  std::mt19937_64 rng(2002);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    mflqg::testing::RandomModelOptions o;
    o.dx = 1 + k % 3;
    o.du = 1 + k % 2;
    o.noisy = k % 2 == 0;
    LqMeanFieldModel m = mflqg::testing::random_model(rng, o);
    const ControlRiccatiSolution base = solve_control_riccati(m);
    c.require(base.Kx.back().isZero(0.0) && base.Kz.back().isZero(0.0),
              "terminal gain not exactly zero");

    LqMeanFieldModel other = m;
    other.n_agents = 7 * m.n_agents + 11;
    other.sigma_x = mflqg::testing::random_psd(rng, o.dx, 2.0, 0.5);
    other.sigma_w = mflqg::testing::random_psd(rng, o.dx, 2.0);
    other.sigma_v = mflqg::testing::random_psd(rng, o.dy, 2.0, 0.5);
    c.require(same_gains(base, solve_control_riccati(validate_model(other))),
              "gains changed with n or noise covariances");

    for (auto& d : m.D) d.setZero();
    for (auto& p : m.P) p.setZero();
    const ControlRiccatiSolution plain = solve_control_riccati(validate_model(m));
    for (std::size_t t = 0; t < plain.Kx.size(); ++t) {
      const double r = (plain.Kx[t] - plain.Kz[t]).norm() / std::max(1.0, plain.Kx[t].norm());
      worst = std::max(worst, r);
    }
  }
  c.require(worst <= 1e-12, fmt("D = P = 0: |Kx - Kz| = %.3g", worst));
  c.note(fmt("10 models, terminal gains exact, bit-identical under n/noise, D=P=0 gap %.1e",
             worst));
  return c.result();
}

// 3. Scalar closed form.
Outcome scalar_fixture() {
  Check c;
  const ControlRiccatiSolution s = solve_control_riccati(mflqg::testing::scalar_fixture());
  const double kx = s.Kx[0](0, 0), mx = s.Mx[0](0, 0);
  c.require(std::abs(kx + 0.5) <= 1e-14, fmt("Kx_1 = %.17g", kx));
  c.require(std::abs(mx - 1.5) <= 1e-14, fmt("Mx_1 = %.17g", mx));
  c.note(fmt("Kx_1 = %.17g, Mx_1 = %.17g", kx, mx));
  return c.result();
}

// 4. Cost identity on snapshots, auxiliary dynamics on traces.
Outcome cost_identity() {
  Check c;
  std::mt19937_64 rng(4004);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 5;
    const int dx = 1 + (k / 5) % 3;
    const int du = 1 + (k / 15) % 2;
    const Matrix x = mflqg::testing::gaussian_matrix(rng, dx, n, 2.0);
    const Matrix u = mflqg::testing::gaussian_matrix(rng, du, n, 1.0);
    const CostIdentity id = cost_identity_check(
        x, u, mflqg::testing::random_psd(rng, dx, 1.0),
        mflqg::testing::random_psd(rng, du, 1.0, 0.1),
        mflqg::testing::random_psd(rng, dx, 1.0));
    const double r = std::abs(id.direct - id.auxiliary) / std::abs(id.direct);
    worst = std::max(worst, r);
  }
  c.require(worst <= 1e-12, fmt("snapshot relative gap %.3g", worst));

  double worst_res = 0.0;
  for (int k = 0; k < 20; ++k) {
    mflqg::testing::RandomModelOptions o;
    o.dx = 1 + k % 3;
    o.n_agents = 1 + k % 5;
    o.noisy = k % 2 == 1;
    const LqMeanFieldModel m = mflqg::testing::random_model(rng, o);
    const SimulationTrace tr = simulate(m, solve_gain_schedule(m), 400 + k);
    const AuxiliaryTrace aux = decompose_auxiliary(m, tr);
    worst_res = std::max({worst_res, aux.max_deviation_residual, aux.max_meanfield_residual});
  }
  c.require(worst_res <= 1e-10, fmt("auxiliary dynamics residual %.3g", worst_res));
  c.note(fmt("1000 snapshots, max rel gap %.2e; 20 traces, max residual %.2e", worst,
             worst_res));
  return c.result();
}

// 5. Filter error covariance and the perfect-observation limit.
Outcome filter_consistency() {
  Check c;
  LqMeanFieldModel m;
  m.horizon = 20;
  m.n_agents = 10000;
  m.A = {scalar(0.9)};
  m.B = {scalar(1)};
  m.D = {scalar(0.2)};
  m.Q = {scalar(1)};
  m.R = {scalar(1)};
  m.P = {scalar(0.5)};
  m.Cx = {scalar(1)};
  m.Cz = {scalar(0.3)};
  m.sigma_x = scalar(2);
  m.sigma_w = scalar(0.5);
  m.sigma_v = scalar(1);
  m.initial_mean = Vector::Constant(1, 1.0);
  m.observation_mode = ObservationMode::kNoisy;
  m = validate_model(m);
  const FilterRiccatiSolution f = solve_filter_riccati(m);
  const SimulationTrace tr = simulate(m, solve_gain_schedule(m), 5005);
  double worst = 0.0;
  for (int t = 0; t < m.horizon; ++t) {
    const Eigen::ArrayXd err = (tr.states[t] - tr.estimates[t]).row(0).array();
    const double mean = err.mean();
    const double var = (err - mean).square().sum() / (err.size() - 1);
    worst = std::max(worst, std::abs(var / f.error_cov[t](0, 0) - 1.0));
  }
  c.require(worst <= 0.05, fmt("error covariance off by %.2f%%", 100 * worst));

  LqMeanFieldModel limit = m;
  limit.n_agents = 50;
  limit.Cx = {scalar(1)};
  limit.sigma_v = scalar(1e-12);
  limit.sigma_x = scalar(0);
  limit = validate_model(limit);
  LqMeanFieldModel full = limit;
  full.observation_mode = ObservationMode::kFull;
  full = validate_model(full);
  const SimulationTrace noisy_tr = simulate(limit, solve_gain_schedule(limit), 77);
  const SimulationTrace full_tr = simulate(full, solve_gain_schedule(full), 77);
  double gap = 0.0;
  for (int t = 0; t < limit.horizon; ++t) {
    gap = std::max(gap, (noisy_tr.actions[t] - full_tr.actions[t]).cwiseAbs().maxCoeff());
  }
  c.require(gap <= 1e-4, fmt("perfect-observation action gap %.3g", gap));
  c.note(fmt("10^4 agents, max rel covariance error %.2f%%; limit action gap %.2e",
             100 * worst, gap));
  return c.result();
}

// 6. Strict optimality under perturbation and Monte Carlo agreement.
Outcome optimality_probe() {
  Check c;
  std::mt19937_64 rng(6006);
  double min_increase = 1e300, worst_z = 0.0;
  for (int k = 0; k < 5; ++k) {
    mflqg::testing::RandomModelOptions o;
    o.dx = 1 + k % 2;
    o.du = 1 + (k / 2) % 2;
    o.horizon = 6;
    o.n_agents = 2 + k % 3;
    const LqMeanFieldModel m = mflqg::testing::random_model(rng, o);
    const GainSchedule g = solve_gain_schedule(m);
    const LinearStrategy opt = LinearStrategy::from_gains(g);
    const double j_opt = exact_policy_cost(m, opt).expected_cost;
    for (int p = 0; p < 50; ++p) {
      LinearStrategy pert = opt;
      double sq = 0.0;
      std::vector<Matrix> dx, dz;
      for (std::size_t t = 0; t < opt.Fx.size(); ++t) {
        dx.push_back(mflqg::testing::gaussian_matrix(rng, o.du, o.dx, 1.0));
        dz.push_back(mflqg::testing::gaussian_matrix(rng, o.du, o.dx, 1.0));
        sq += dx.back().squaredNorm() + dz.back().squaredNorm();
      }
      const double scale = 1e-2 / std::sqrt(sq);
      for (std::size_t t = 0; t < opt.Fx.size(); ++t) {
        pert.Fx[t] += scale * dx[t];
        pert.Fz[t] += scale * dz[t];
      }
      const double j = exact_policy_cost(m, pert).expected_cost;
      min_increase = std::min(min_increase, (j - j_opt) / j_opt);
      c.require(j > j_opt, fmt("model %g perturbation %g: cost %.17g not above optimum", k, p,
                               j));
    }
    const MonteCarloEstimate mc = monte_carlo_cost(m, g, 100000, 6100 + k, 4);
    const double z = std::abs(mc.mean - j_opt) / mc.standard_error;
    worst_z = std::max(worst_z, z);
    c.require(z <= 3.0, fmt("model %g: Monte Carlo %.3g standard errors from exact", k, z));
  }
  c.note(fmt("250 perturbations, min relative increase %.2e; Monte Carlo max |z| = %.2f",
             min_increase, worst_z));
  return c.result();
}

// 7. Heater population tracking.
Outcome heater_reproduction() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const HeaterParameters params;
  const LqMeanFieldModel m = heater_model(params);
  const GainSchedule g = solve_gain_schedule(m);
  double lo = 1e300, hi = -1e300, z1_lo = 1e300, z1_hi = -1e300, sd_min = 1e300;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SimulationTrace tr = simulate(m, g, seed);
    double tail = 0.0;
    for (int t = m.horizon - 30; t < m.horizon; ++t) {
      tail += tr.mean_field[t](0) + params.ambient;
    }
    tail /= 30.0;
    const double z1 = tr.mean_field.front()(0) + params.ambient;
    const Eigen::ArrayXd last = tr.states.back().row(0).array();
    const double sd = std::sqrt((last - last.mean()).square().sum() / (last.size() - 1));
    lo = std::min(lo, tail);
    hi = std::max(hi, tail);
    z1_lo = std::min(z1_lo, z1);
    z1_hi = std::max(z1_hi, z1);
    sd_min = std::min(sd_min, sd);
    c.require(tail >= 23.5 && tail <= 25.5, fmt("seed %g: tail average %.3f", seed, tail));
    c.require(z1 >= 21.0 && z1 <= 23.0, fmt("seed %g: z_1 = %.3f", seed, z1));
    c.require(sd > 0.5, fmt("seed %g: final spread %.3f", seed, sd));
  }
  const double elapsed = seconds_since(t0);
  c.require(elapsed <= 5.0, fmt("runtime %.2f s > 5 s", elapsed));
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "tail average in [%.3f, %.3f], z_1 in [%.3f, %.3f], min final sd %.3f, %.2f s",
                lo, hi, z1_lo, z1_hi, sd_min, elapsed);
  c.note(buf);
  return c.result();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 8. Byte-identical files across repeats and Monte Carlo thread counts.
Outcome determinism() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "mflqg_acceptance_determinism";
  fs::remove_all(dir);
  std::mt19937_64 rng(8008);
  int files = 0;
  for (int k = 0; k < 4; ++k) {
    mflqg::testing::RandomModelOptions o;
    o.noisy = k % 2 == 1;
    o.n_agents = 4;
    const LqMeanFieldModel m = mflqg::testing::random_model(rng, o);
    const GainSchedule g = solve_gain_schedule(m);
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path d = dir / std::to_string(k) / std::to_string(rep);
      fs::create_directories(d);
      const SimulationTrace tr = simulate(m, g, 123456789);
      write_text(d / "agents.csv", agents_csv(tr));
      write_text(d / "meanfield.csv", meanfield_csv(tr));
      write_text(d / "summary.json", trace_summary(tr).dump(2));
    }
    for (const char* f : {"agents.csv", "meanfield.csv", "summary.json"}) {
      const std::string a = read_file(dir / std::to_string(k) / "0" / f);
      const std::string b = read_file(dir / std::to_string(k) / "1" / f);
      c.require(!a.empty() && a == b, std::string("trace file differs: ") + f);
      ++files;
    }
    const MonteCarloEstimate ref = monte_carlo_cost(m, g, 500, 99, 1);
    for (int threads : {2, 3, 8}) {
      const MonteCarloEstimate mc = monte_carlo_cost(m, g, 500, 99, threads);
      c.require(mc.mean == ref.mean && mc.standard_error == ref.standard_error,
                fmt("Monte Carlo differs at %g threads", threads));
    }
  }
  fs::remove_all(dir);
  c.note(fmt("%g trace files byte-identical; Monte Carlo identical for 1/2/3/8 threads", files));
  return c.result();
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"1 centralized equivalence", centralized_equivalence},
      {"2 terminal gains and decoupling", terminal_and_decoupling},
      {"3 scalar closed form", scalar_fixture},
      {"4 cost identity and auxiliary dynamics", cost_identity},
      {"5 filter consistency", filter_consistency},
      {"6 optimality probe", optimality_probe},
      {"7 heater tracking", heater_reproduction},
      {"8 determinism", determinism},
  };
  int failures = 0;
  for (const auto& cr : criteria) {
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %s: %s\n", o.passed ? "PASS" : "FAIL", cr.name,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  }
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
