#include "mflqg/model_io.hpp"

#include <fstream>
#include <sstream>

#include "mflqg/errors.hpp"

namespace mflqg {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) {
    return Matrix::Constant(1, 1, j.get<double>());
  }
  if (!j.is_array() || j.empty()) {
    throw ParseError(what + ": expected a number or a non-empty nested array");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.empty()) {
      throw ParseError(what + ": row " + std::to_string(i) +
                       " is not a non-empty array");
    }
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError(what + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw ParseError(what + ": non-numeric entry at (" + std::to_string(i) +
                         "," + std::to_string(c) + ")");
      }
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) {
    return Vector::Constant(1, j.get<double>());
  }
  if (!j.is_array()) {
    throw ParseError(what + ": expected an array of numbers");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(what + ": non-numeric entry " + std::to_string(i));
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

namespace {

// A sequence is a number, a matrix (depth 2), an array of numbers (per-step
// scalars) or an array of matrices.
StepMatrices sequence_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) {
    return {matrix_from_json(j, what)};
  }
  if (!j.is_array() || j.empty()) {
    throw ParseError(what + ": expected a matrix or a per-step array");
  }
  const Json& first = j.front();
  const bool is_single_matrix = first.is_array() && !first.empty() &&
                                first.front().is_number();
  if (is_single_matrix) {
    return {matrix_from_json(j, what)};
  }
  StepMatrices out;
  for (std::size_t t = 0; t < j.size(); ++t) {
    out.push_back(matrix_from_json(j[t], what + "[t=" + std::to_string(t + 1) + "]"));
  }
  return out;
}

Json sequence_to_json(const StepMatrices& seq) {
  bool constant = !seq.empty();
  for (std::size_t i = 1; i < seq.size() && constant; ++i) {
    constant = seq[i].rows() == seq[0].rows() &&
               seq[i].cols() == seq[0].cols() && seq[i] == seq[0];
  }
  if (constant) {
    return matrix_to_json(seq.front());
  }
  Json out = Json::array();
  for (const auto& m : seq) {
    out.push_back(matrix_to_json(m));
  }
  return out;
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(where + ": missing key \"" + key + "\"");
  }
  return obj.at(key);
}

int require_int(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number_integer()) {
    throw ParseError(where + "." + key + ": expected an integer");
  }
  return v.get<int>();
}

StepMatrices to_horizon(const StepMatrices& seq, int horizon) {
  if (seq.size() == 1) {
    return broadcast(seq.front(), horizon);
  }
  return seq;
}

}  // namespace

LqMeanFieldModel model_from_json(const Json& doc) {
  if (!doc.is_object()) {
    throw ParseError("model: top-level value must be an object");
  }
  LqMeanFieldModel m;
  m.horizon = require_int(doc, "horizon", "model");
  m.n_agents = require_int(doc, "n_agents", "model");
  const Json& dims = require(doc, "dims", "model");
  m.dims.state = require_int(dims, "d_x", "dims");
  m.dims.control = require_int(dims, "d_u", "dims");
  m.dims.observation = dims.contains("d_y") ? require_int(dims, "d_y", "dims") : 1;

  const Json& dyn = require(doc, "dynamics", "model");
  m.A = sequence_from_json(require(dyn, "A", "dynamics"), "dynamics.A");
  m.B = sequence_from_json(require(dyn, "B", "dynamics"), "dynamics.B");
  if (dyn.contains("D")) {
    m.D = sequence_from_json(dyn.at("D"), "dynamics.D");
  } else {
    m.D = {Matrix::Zero(m.dims.state, m.dims.state)};
  }

  const Json& cost = require(doc, "cost", "model");
  m.Q = sequence_from_json(require(cost, "Q", "cost"), "cost.Q");
  m.R = sequence_from_json(require(cost, "R", "cost"), "cost.R");
  if (cost.contains("P")) {
    m.P = sequence_from_json(cost.at("P"), "cost.P");
  } else {
    m.P = {Matrix::Zero(m.dims.state, m.dims.state)};
  }
  if (cost.contains("S")) {
    CrossTermCost cross;
    cross.Q = to_horizon(m.Q, m.horizon);
    cross.S = to_horizon(sequence_from_json(cost.at("S"), "cost.S"), m.horizon);
    cross.R = to_horizon(m.R, m.horizon);
    cross.P = to_horizon(m.P, m.horizon);
    CanonicalCost reduced = reduce_cross_term(cross);
    m.Q = std::move(reduced.Q);
    m.R = std::move(reduced.R);
    m.P = std::move(reduced.P);
  }

  if (doc.contains("observation")) {
    const Json& obs = doc.at("observation");
    if (obs.contains("Cx")) {
      m.Cx = sequence_from_json(obs.at("Cx"), "observation.Cx");
    }
    if (obs.contains("Cz")) {
      m.Cz = sequence_from_json(obs.at("Cz"), "observation.Cz");
    } else if (!m.Cx.empty()) {
      m.Cz = {Matrix::Zero(m.dims.observation, m.dims.state)};
    }
  }

  const Json& noise = require(doc, "noise", "model");
  m.sigma_x = matrix_from_json(require(noise, "Sigma_X", "noise"), "noise.Sigma_X");
  m.sigma_w = matrix_from_json(require(noise, "Sigma_W", "noise"), "noise.Sigma_W");
  if (noise.contains("Sigma_V")) {
    m.sigma_v = matrix_from_json(noise.at("Sigma_V"), "noise.Sigma_V");
  }

  if (doc.contains("initial_mean")) {
    m.initial_mean = vector_from_json(doc.at("initial_mean"), "initial_mean");
  }

  const std::string mode =
      doc.contains("observation_mode") ? doc.at("observation_mode").get<std::string>()
                                       : std::string("full");
  if (mode == "full") {
    m.observation_mode = ObservationMode::kFull;
  } else if (mode == "noisy") {
    m.observation_mode = ObservationMode::kNoisy;
  } else {
    throw ParseError("observation_mode: expected \"full\" or \"noisy\", got \"" +
                     mode + "\"");
  }
  return m;
}

Json model_to_json(const LqMeanFieldModel& m) {
  Json doc;
  doc["horizon"] = m.horizon;
  doc["n_agents"] = m.n_agents;
  doc["dims"] = {{"d_x", m.dims.state},
                 {"d_u", m.dims.control},
                 {"d_y", m.dims.observation}};
  doc["dynamics"] = {{"A", sequence_to_json(m.A)},
                     {"B", sequence_to_json(m.B)},
                     {"D", sequence_to_json(m.D)}};
  doc["cost"] = {{"Q", sequence_to_json(m.Q)},
                 {"R", sequence_to_json(m.R)},
                 {"P", sequence_to_json(m.P)}};
  Json obs = Json::object();
  if (!m.Cx.empty()) {
    obs["Cx"] = sequence_to_json(m.Cx);
  }
  if (!m.Cz.empty()) {
    obs["Cz"] = sequence_to_json(m.Cz);
  }
  doc["observation"] = std::move(obs);
  Json noise;
  noise["Sigma_X"] = matrix_to_json(m.sigma_x);
  noise["Sigma_W"] = matrix_to_json(m.sigma_w);
  if (m.sigma_v.size() > 0) {
    noise["Sigma_V"] = matrix_to_json(m.sigma_v);
  }
  doc["noise"] = std::move(noise);
  doc["initial_mean"] = vector_to_json(m.initial_mean);
  doc["observation_mode"] =
      m.observation_mode == ObservationMode::kNoisy ? "noisy" : "full";
  return doc;
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t limit = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": " << e.what();
    throw ParseError(os.str());
  }
}

LqMeanFieldModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path.string() + ": cannot open file");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const Json doc = parse_json_text(buf.str(), path.string());
  try {
    return model_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_model(const LqMeanFieldModel& model,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError(path.string() + ": cannot open file for writing");
  }
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace mflqg
