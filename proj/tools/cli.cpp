#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mflqg/control.hpp"
#include "mflqg/errors.hpp"
#include "mflqg/heater.hpp"
#include "mflqg/model_io.hpp"
#include "mflqg/oracle.hpp"
#include "mflqg/riccati.hpp"
#include "mflqg/sim.hpp"
#include "mflqg/trace_io.hpp"

namespace mflqg::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string command;
  std::string model_path;
  std::uint64_t seed = 1;
  int runs = 1000;
  std::optional<int> n;
  std::string out_dir = ".";
  double tolerance = 1e-8;
  int threads = 1;
};

LqMeanFieldModel load_validated(const RunConfig& cfg) {
  LqMeanFieldModel raw = load_model(cfg.model_path);
  if (cfg.n) {
    raw.n_agents = *cfg.n;
  }
  return validate_model(raw);
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw ParseError(dir.string() + ": cannot create output directory");
  }
  return dir;
}

void write_json(const fs::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

struct Solved {
  ControlRiccatiSolution control;
  std::optional<FilterRiccatiSolution> filter;
  GainSchedule gains;
};

Solved solve_all(const LqMeanFieldModel& model) {
  Solved s;
  s.control = solve_control_riccati(model);
  if (model.observation_mode == ObservationMode::kNoisy) {
    s.filter = solve_filter_riccati(model);
  }
  s.gains = make_gain_schedule(model, s.control, s.filter);
  return s;
}

void write_trace(const fs::path& dir, const SimulationTrace& trace) {
  write_text(dir / "trace_agents.csv", agents_csv(trace));
  write_text(dir / "trace_meanfield.csv", meanfield_csv(trace));
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const LqMeanFieldModel model = load_validated(cfg);
  const Solved s = solve_all(model);
  const fs::path dir = output_dir(cfg);
  write_json(dir / "gains.json", gains_to_json(model, s.control, s.filter));
  const auto last = static_cast<std::size_t>(model.horizon - 1);
  out << "horizon " << model.horizon << ", d_x " << model.dims.state << ", d_u "
      << model.dims.control << '\n';
  out << "terminal: Mx_T = Q_T, Mz_T = Q_T + P_T, Kx_T = Kz_T = 0 (|Kx_T| = "
      << s.control.Kx[last].norm() << ", |Kz_T| = " << s.control.Kz[last].norm()
      << ")\n";
  out << "residual " << control_riccati_residual(model, s.control) << '\n';
  if (s.filter) {
    out << "filter residual " << filter_riccati_residual(model, *s.filter) << '\n';
  }
  out << "wrote " << (dir / "gains.json").string() << '\n';
  return kSuccess;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const LqMeanFieldModel model = load_validated(cfg);
  const Solved s = solve_all(model);
  const SimulationTrace trace = simulate(model, s.gains, cfg.seed);
  const fs::path dir = output_dir(cfg);
  write_trace(dir, trace);
  write_json(dir / "summary.json", trace_summary(trace));
  out << "total cost " << trace.total_cost << '\n';
  return kSuccess;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const LqMeanFieldModel model = load_validated(cfg);
  const int n = cfg.n.value_or(model.n_agents);
  const EquivalenceReport report = check_equivalence(model, n, cfg.tolerance);
  const fs::path dir = output_dir(cfg);
  write_json(dir / "verify.json", equivalence_report_to_json(report));
  out << "max gain residual " << report.max_gain_residual << ", cost gap "
      << report.cost_gap << ": " << (report.passed ? "pass" : "FAIL") << '\n';
  return report.passed ? kSuccess : kVerificationFailed;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const LqMeanFieldModel model = load_validated(cfg);
  const Solved s = solve_all(model);
  Json j;
  j["model_fingerprint"] = model_fingerprint(model);
  j["seed"] = cfg.seed;
  if (model.observation_mode == ObservationMode::kFull) {
    const PolicyEvaluation ev =
        exact_policy_cost(model, LinearStrategy::from_gains(s.gains));
    j["exact_cost"] = ev.expected_cost;
    Json steps = Json::array();
    for (std::size_t k = 0; k < ev.steps.size(); ++k) {
      steps.push_back({{"t", k + 1},
                       {"deviation", ev.steps[k].deviation},
                       {"meanfield_mean", ev.steps[k].meanfield_mean},
                       {"meanfield_noise", ev.steps[k].meanfield_noise}});
    }
    j["breakdown"] = std::move(steps);
    out << "exact cost " << ev.expected_cost << '\n';
  }
  const MonteCarloEstimate mc =
      monte_carlo_cost(model, s.gains, cfg.runs, cfg.seed, cfg.threads);
  j["monte_carlo"] = {{"runs", mc.runs},
                      {"mean", mc.mean},
                      {"standard_error", mc.standard_error}};
  out << "monte carlo " << mc.mean << " +/- " << mc.standard_error << " ("
      << mc.runs << " runs)\n";
  write_json(output_dir(cfg) / "summary.json", j);
  return kSuccess;
}

int cmd_preset_heater(const RunConfig& cfg, std::ostream& out) {
  HeaterParameters params;
  if (cfg.n) {
    params.n_agents = *cfg.n;
  }
  const LqMeanFieldModel model = heater_model(params);
  const Solved s = solve_all(model);
  const SimulationTrace trace = simulate(model, s.gains, cfg.seed);
  const SimulationTrace shown = shifted_trace(trace, heater_output_offset(params));

  const fs::path dir = output_dir(cfg);
  save_model(model, dir / "model.json");
  write_json(dir / "gains.json", gains_to_json(model, s.control, s.filter));
  write_trace(dir, shown);
  Json summary = trace_summary(shown);
  summary["preset"] = heater_parameters_to_json(params);
  summary["state_offset"] = vector_to_json(heater_output_offset(params));
  write_json(dir / "summary.json", summary);
  out << "mean temperature: t=1 " << shown.mean_field.front()(0) << ", t="
      << model.horizon << " " << shown.mean_field.back()(0) << '\n';
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field LQG team control: solve, simulate, verify"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub, bool needs_model) {
    auto* model = sub->add_option("--model", cfg.model_path, "Model JSON file");
    if (needs_model) {
      model->required()->check(CLI::ExistingFile);
    }
    sub->add_option("--seed", cfg.seed, "64-bit simulation seed");
    sub->add_option("--runs", cfg.runs, "Monte Carlo runs")->check(CLI::Range(2, 1 << 30));
    sub->add_option("--n", cfg.n, "Override the number of subsystems")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out_dir, "Output directory");
    sub->add_option("--tol", cfg.tolerance, "Verification tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", cfg.threads, "Monte Carlo worker threads")
        ->check(CLI::Range(1, 1024));
  };

  add_common(app.add_subcommand("solve", "Write the gain schedule"), true);
  add_common(app.add_subcommand("simulate", "Simulate the closed loop"), true);
  add_common(app.add_subcommand("verify", "Compare against the stacked oracle"), true);
  add_common(app.add_subcommand("evaluate", "Exact and Monte Carlo expected cost"), true);
  add_common(app.add_subcommand("preset-heater", "Space-heater tracking example"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kIoOrParse;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (cfg.command == "solve") return cmd_solve(cfg, out);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    if (cfg.command == "evaluate") return cmd_evaluate(cfg, out);
    return cmd_preset_heater(cfg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParse;
  } catch (const ValidationError& e) {
    const char* kind = dynamic_cast<const NotPositiveDefinite*>(&e)       ? "NotPositiveDefinite"
                       : dynamic_cast<const NotPositiveSemidefinite*>(&e) ? "NotPositiveSemidefinite"
                       : dynamic_cast<const DimensionMismatch*>(&e)       ? "DimensionMismatch"
                       : dynamic_cast<const NotSymmetric*>(&e)            ? "NotSymmetric"
                                                                          : "ValidationError";
    err << "error: " << kind << ": " << e.what() << '\n';
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParse;
  }
}

}  // namespace mflqg::cli
