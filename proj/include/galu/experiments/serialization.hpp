#pragma once

// Model persistence:
//   {"d", "k", "gate_source", "seed", "gates": d*k row-major, "weights": d*k
//    row-major, "alpha": k, "normalized": bool, "activation": "galu"|"relu"}

#include <string>

#include <json.hpp>

#include "galu/types.hpp"

namespace galu::experiments {

struct SavedModel {
  GateBank gates;
  NaturalParams params;  // for ReLU models W equals the trained first layer
  bool normalized = true;
  std::string activation = "galu";

  /// Forward output on every row of `xs`.
  Vector predict(const MatrixRef& xs) const;
};

nlohmann::json model_to_json(const SavedModel& model);
SavedModel model_from_json(const nlohmann::json& doc);

void save_model(const SavedModel& model, const std::string& path);
SavedModel load_model(const std::string& path);

}  // namespace galu::experiments
