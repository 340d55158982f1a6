#include "fermigas/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fermigas {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::shared_ptr<const TrapPotential> make_potential(const json& j, Dimension d) {
  only_keys(j, {"kind", "k", "a", "b"}, "potential");
  std::string kind = j.value("kind", "harmonic");
  if (kind == "harmonic") return std::make_shared<TrapPotential>(TrapPotential::harmonic(d, number(j, "k", 1.0)));
  if (kind == "quartic") return std::make_shared<TrapPotential>(TrapPotential::quartic(d, number(j, "a", 1.0)));
  if (kind == "double_well")
    return std::make_shared<TrapPotential>(
        TrapPotential::double_well(d, number(j, "a", 1.5), number(j, "b", 1.0)));
  throw ValidationError("unknown potential kind '" + kind + "'");
}

std::shared_ptr<const InteractionProfile> make_interaction(const json& j, Dimension d) {
  only_keys(j, {"kind", "height", "radius", "beta"}, "interaction");
  std::string kind = j.value("kind", "zero");
  double beta = number(j, "beta", 0.5 / (d.value() * (2 * d.value() + 1)));
  if (kind == "zero") return std::make_shared<InteractionProfile>(InteractionProfile::zero(d, beta));
  double h = number(j, "height", 1.0), r = number(j, "radius", 1.0);
  if (kind == "indicator")
    return std::make_shared<InteractionProfile>(InteractionProfile::indicator(d, h, r, beta));
  if (kind == "bump")
    return std::make_shared<InteractionProfile>(InteractionProfile::bump(d, h, r, beta));
  throw ValidationError("unknown interaction kind '" + kind + "'");
}

}  // namespace

ModelConfig parse_config(const json& j) {
  try {
    only_keys(j,
              {"schema_version", "dimension", "constants", "potential", "interaction", "grid",
               "solver", "eta", "particles", "hbar_x", "envelope_sharpness", "name"},
              "config");
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
      throw ValidationError("unsupported schema_version " + j.at("schema_version").dump());
    if (!j.contains("dimension")) throw ValidationError("config needs 'dimension'");
    ModelConfig c;
    c.raw = j;
    c.d = Dimension(j.at("dimension").get<int>());
    if (j.contains("constants"))
      c.convention = constants_convention_from_string(j.at("constants").get<std::string>());
    c.constants = TFConstants::make(c.d, c.convention);
    c.potential = make_potential(j.value("potential", json::object()), c.d);
    c.interaction = make_interaction(j.value("interaction", json::object()), c.d);
    c.interaction->check_against(c.constants);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      only_keys(g, {"half_width", "points"}, "grid");
      c.half_width = number(g, "half_width", c.half_width);
      c.points = g.value("points", c.points);
    } else if (c.d.value() == 2) {
      c.points = 128;
    }
    (void)c.grid();  // validates
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      only_keys(s, {"mass_tol", "max_iterations"}, "solver");
      c.solver.mass_tol = number(s, "mass_tol", c.solver.mass_tol);
      c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
    }
    c.eta = number(j, "eta", c.eta);
    c.particles = number(j, "particles", c.particles);
    if (!(c.particles >= 1)) throw ValidationError("'particles' must be at least 1");
    if (j.contains("hbar_x")) c.hbar_x = number(j, "hbar_x", 0.0);
    c.envelope_sharpness = number(j, "envelope_sharpness", c.envelope_sharpness);
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

}  // namespace fermigas
