#include "mflqg/trace_io.hpp"

#include <cstdio>
#include <fstream>

#include "mflqg/errors.hpp"
#include "mflqg/rng.hpp"

namespace mflqg {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += ',';
  out += buf;
}

void append_header(std::string& out, const char* prefix, Eigen::Index count) {
  for (Eigen::Index k = 0; k < count; ++k) {
    out += ',';
    out += prefix;
    out += std::to_string(k);
  }
}

}  // namespace

std::string agents_csv(const SimulationTrace& trace) {
  const bool noisy = !trace.observations.empty();
  const Eigen::Index dx = trace.states.front().rows();
  const Eigen::Index du = trace.actions.front().rows();
  std::string out = "t,agent";
  append_header(out, "x", dx);
  append_header(out, "u", du);
  if (noisy) {
    append_header(out, "y", trace.observations.front().rows());
  }
  out += '\n';
  for (std::size_t s = 0; s < trace.states.size(); ++s) {
    for (Eigen::Index i = 0; i < trace.states[s].cols(); ++i) {
      out += std::to_string(s + 1);
      out += ',';
      out += std::to_string(i);
      for (Eigen::Index k = 0; k < dx; ++k) {
        append_number(out, trace.states[s](k, i));
      }
      for (Eigen::Index k = 0; k < du; ++k) {
        append_number(out, trace.actions[s](k, i));
      }
      if (noisy) {
        for (Eigen::Index k = 0; k < trace.observations[s].rows(); ++k) {
          append_number(out, trace.observations[s](k, i));
        }
      }
      out += '\n';
    }
  }
  return out;
}

std::string meanfield_csv(const SimulationTrace& trace) {
  const Eigen::Index dx = trace.mean_field.front().size();
  const Eigen::Index du = trace.mean_action.front().size();
  std::string out = "t";
  append_header(out, "z", dx);
  append_header(out, "uz", du);
  out += ",cost\n";
  for (std::size_t s = 0; s < trace.mean_field.size(); ++s) {
    out += std::to_string(s + 1);
    for (Eigen::Index k = 0; k < dx; ++k) {
      append_number(out, trace.mean_field[s](k));
    }
    for (Eigen::Index k = 0; k < du; ++k) {
      append_number(out, trace.mean_action[s](k));
    }
    append_number(out, trace.stage_costs[s]);
    out += '\n';
  }
  return out;
}

Json trace_summary(const SimulationTrace& trace) {
  Json j;
  j["total_cost"] = trace.total_cost;
  j["seed"] = trace.seed;
  j["run"] = trace.run;
  j["model_fingerprint"] = trace.model_fingerprint;
  j["generator"] = std::string(kGeneratorName);
  j["observation_mode"] =
      trace.mode == ObservationMode::kNoisy ? "noisy" : "full";
  j["horizon"] = trace.horizon;
  j["n_agents"] = trace.n_agents;
  return j;
}

SimulationTrace shifted_trace(const SimulationTrace& trace, const Vector& offset) {
  SimulationTrace out = trace;
  for (auto& x : out.states) {
    x.colwise() += offset;
  }
  for (auto& x : out.estimates) {
    x.colwise() += offset;
  }
  for (auto& z : out.mean_field) {
    z += offset;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError(path.string() + ": cannot open file for writing");
  }
  out << text;
  if (!out) {
    throw ParseError(path.string() + ": write failed");
  }
}

}  // namespace mflqg
