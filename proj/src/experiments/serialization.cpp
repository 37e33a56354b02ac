#include "galu/experiments/serialization.hpp"

#include <fstream>

#include "galu/error.hpp"
#include "galu/model.hpp"

namespace galu::experiments {

namespace {

std::vector<double> row_major(const Matrix& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

Matrix from_row_major(const std::vector<double>& values, Index rows, Index cols, const char* what) {
  if (static_cast<Index>(values.size()) != rows * cols)
    throw DimensionError(std::string("model: ") + what + " has " + std::to_string(values.size()) +
                         " entries, expected " + std::to_string(rows * cols));
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) out(r, c) = values[static_cast<std::size_t>(r * cols + c)];
  return out;
}

}  // namespace

Vector SavedModel::predict(const MatrixRef& xs) const {
  if (activation == "relu") return relu_forward_batch(xs, params.W, params.alpha, normalized);
  return galu_forward_batch(xs, params, gates, normalized);
}

nlohmann::json model_to_json(const SavedModel& model) {
  nlohmann::json j;
  j["d"] = model.gates.dim();
  j["k"] = model.gates.width();
  j["gate_source"] = std::string(to_string(model.gates.source));
  j["seed"] = model.gates.seed;
  j["gates"] = row_major(model.gates.gates);
  j["weights"] = row_major(model.params.W);
  j["alpha"] = std::vector<double>(model.params.alpha.data(),
                                   model.params.alpha.data() + model.params.alpha.size());
  j["normalized"] = model.normalized;
  j["activation"] = model.activation;
  return j;
}

SavedModel model_from_json(const nlohmann::json& doc) {
  try {
    SavedModel model;
    const Index d = doc.at("d").get<Index>();
    const Index k = doc.at("k").get<Index>();
    if (d < 1 || k < 1) throw DimensionError("model: d and k must be positive");
    model.gates.source = gate_source_from_string(doc.at("gate_source").get<std::string>());
    model.gates.seed = doc.at("seed").get<std::uint64_t>();
    model.gates.gates = from_row_major(doc.at("gates").get<std::vector<double>>(), d, k, "gates");
    model.params.W = from_row_major(doc.at("weights").get<std::vector<double>>(), d, k, "weights");
    const auto alpha = doc.at("alpha").get<std::vector<double>>();
    if (static_cast<Index>(alpha.size()) != k) throw DimensionError("model: alpha length != k");
    model.params.alpha = Eigen::Map<const Vector>(alpha.data(), k);
    model.normalized = doc.at("normalized").get<bool>();
    model.activation = doc.value("activation", std::string("galu"));
    if (model.activation != "galu" && model.activation != "relu")
      throw DomainError("model: unknown activation '" + model.activation + "'");
    model.gates.validate();
    model.params.validate_against(model.gates);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("model: ") + e.what());
  }
}

void save_model(const SavedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write model to " + path);
  out << model_to_json(model).dump(1) << '\n';
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read model from " + path);
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("model: ") + e.what());
  }
}

}  // namespace galu::experiments
