#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "fermigas/model.hpp"
#include "fermigas/tf_solver.hpp"

namespace fermigas {

constexpr int kSchemaVersion = 1;

// Model description shared by all subcommands.  Example (2D harmonic trap):
//   {"schema_version": 1, "dimension": 2, "constants": "paper_literal",
//    "potential": {"kind": "harmonic", "k": 1},
//    "interaction": {"kind": "indicator", "height": 4, "radius": 1, "beta": 0.05},
//    "grid": {"half_width": 2.5, "points": 128}}
struct ModelConfig {
  Dimension d{1};
  ConstantsConvention convention = ConstantsConvention::BathTubConsistent;
  TFConstants constants;
  std::shared_ptr<const TrapPotential> potential;
  std::shared_ptr<const InteractionProfile> interaction;
  double half_width = 4.0;
  int points = 256;
  SolverOptions solver;
  double eta = 0.5;
  double particles = 8;
  std::optional<double> hbar_x;
  double envelope_sharpness = 4.0;
  nlohmann::json raw;

  SpatialGrid grid() const { return SpatialGrid(d, half_width, points); }
  double i_w() const { return interaction ? interaction->integral() : 0.0; }
};

ModelConfig parse_config(const nlohmann::json& j);
ModelConfig load_config(const std::string& path);

}  // namespace fermigas
