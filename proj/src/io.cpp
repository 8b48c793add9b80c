#include "umni/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "umni/errors.hpp"

namespace umni {

using nlohmann::json;

namespace {

json matrix_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols) throw ArgumentError("model json: ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
  }
  return m;
}

json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json int_vector_json(const IntVector& v) {
  return std::vector<std::int64_t>(v.data(), v.data() + v.size());
}

}  // namespace

std::string model_to_json(const ModelBundle& b) {
  json edges = json::array();
  for (const auto& [from, to] : b.sem.dag().edges()) edges.push_back({from, to});
  json envs = json::array();
  for (const auto& spec : b.environments) {
    json mechs = json::array();
    for (const auto& m : spec.mechanisms())
      mechs.push_back({{"node", m.node}, {"weights", vector_json(m.weights)}, {"noise_var", m.noise_var},
                       {"shift", m.shift}});
    envs.push_back({{"kind", to_string(spec.kind())}, {"mechanisms", std::move(mechs)}});
  }
  json j{{"n", b.sem.size()},
         {"edges", std::move(edges)},
         {"weights", matrix_json(b.sem.weights())},
         {"noise_vars", vector_json(b.sem.noise_vars())},
         {"transform", matrix_json(b.model.transform())},
         {"environments", std::move(envs)}};
  return j.dump(2);
}

ModelBundle model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    const int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    LinearGaussianSem sem(Dag(n, edges), matrix_from(j.at("weights")), vector_from(j.at("noise_vars")));
    std::vector<EnvironmentSpec> envs;
    for (const auto& e : j.at("environments")) {
      std::vector<Mechanism> mechs;
      for (const auto& m : e.at("mechanisms"))
        mechs.push_back({m.at("node").get<int>(), vector_from(m.at("weights")), m.at("noise_var").get<double>(),
                         m.value("shift", 0.0)});
      envs.emplace_back(intervention_kind_from_string(e.at("kind").get<std::string>()), std::move(mechs));
      envs.back().validate(sem);
    }
    return {std::move(sem), std::move(envs), ObservationModel(matrix_from(j.at("transform")))};
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("model json: ") + e.what());
  }
}

void write_matrix_csv(std::ostream& os, const MatrixXd& m) {
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
}

MatrixXd read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ArgumentError("read_matrix_csv: bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ArgumentError("read_matrix_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

std::string trace_to_json(const RecoveryState& state) {
  json steps = json::array();
  for (const auto& t : state.trace) {
    json s{{"stage", t.stage}, {"t", t.t}, {"note", t.note}};
    if (t.j >= 0) s["j"] = t.j;
    if (t.w.size() > 0) s["w"] = int_vector_json(t.w);
    steps.push_back(std::move(s));
  }
  json mix = json::array();
  for (Eigen::Index i = 0; i < state.mix.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < state.mix.cols(); ++k) row.push_back(state.mix(i, k));
    mix.push_back(std::move(row));
  }
  json edges = json::array();
  for (const auto& [from, to] : state.graph.edges()) edges.push_back({from, to});
  json j{{"order", state.order},         {"basis", state.basis},       {"mix", std::move(mix)},
         {"encoder", matrix_json(state.encoder)}, {"edges", std::move(edges)}, {"warnings", state.warnings},
         {"steps", std::move(steps)}};
  return j.dump(2);
}

}  // namespace umni
