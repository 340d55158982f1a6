#include "fermigas/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "fermigas/config.hpp"
#include "fermigas/df_measures.hpp"
#include "fermigas/husimi.hpp"
#include "fermigas/oracle.hpp"
#include "fermigas/quadrature.hpp"
#include "fermigas/tf_solver.hpp"
#include "fermigas/tiling.hpp"
#include "fermigas/vlasov.hpp"

#ifdef FERMIGAS_HAVE_OPENMP
#include <omp.h>
#endif

#ifndef FERMIGAS_VERSION
#define FERMIGAS_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace fermigas {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_atomic(const std::string& path, const std::string& contents) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write '" + tmp.string() + "'");
    f << contents;
    if (!f) throw ValidationError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

namespace {

using nlohmann::json;
using clk = std::chrono::steady_clock;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

  void add_json(const std::string& name, json j) {
    j["schema_version"] = kSchemaVersion;
    add(name, j.dump(2) + "\n");
  }
  void add(const std::string& name, const std::string& contents) {
    write_atomic((fs::path(dir_) / name).string(), contents);
    files_.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(contents))}});
  }
  const std::string& dir() const { return dir_; }
  const json& files() const { return files_; }

 private:
  std::string dir_;
  json files_ = json::array();
};

struct RunInfo {
  std::string subcommand;
  std::string config_hash = "none";
  json seed = nullptr;
  std::string convention = to_string(ConstantsConvention::BathTubConsistent);
  std::ostream* err = nullptr;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    auto b = cur.find_first_not_of(" \t"), e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw ValidationError("not a number: '" + t + "'");
    }
  }
  return out;
}

void set_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("FERMIGAS_THREADS")) threads = std::atoi(env);
  }
#ifdef FERMIGAS_HAVE_OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
}

int current_threads() {
#ifdef FERMIGAS_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

ModelConfig config_for(const std::string& path, RunInfo& info) {
  if (path.empty()) throw ValidationError("--config is required");
  info.config_hash = hex64(fnv1a64(slurp(path)));
  ModelConfig c = load_config(path);
  info.convention = to_string(c.convention);
  if (c.convention == ConstantsConvention::PaperLiteral && info.err)
    *info.err << json{{"status", "warning"},
                      {"kind", "constants"},
                      {"message", "paper_literal constants do not match the bath-tub lift; "
                                  "TF and Vlasov kinetic energies differ by a fixed factor"}}
                     .dump()
              << "\n";
  return c;
}

TFSolution solve_tf(const ModelConfig& c) {
  if (c.d.value() == 2) return minimize_2d(*c.potential, c.constants, c.i_w(), c.grid(), c.solver);
  RelaxedLocalEnergy rel(c.constants.c_tf, c.i_w(), c.eta);
  return minimize_1d_relaxed(*c.potential, rel, c.grid(), c.solver);
}

json energy_json(const EnergyBreakdown& e) {
  return {{"kinetic", e.kinetic}, {"potential", e.potential}, {"interaction", e.interaction},
          {"total", e.total}};
}

json grid_json(const SpatialGrid& g) {
  return {{"dimension", g.dim().value()}, {"half_width", g.half_width()}, {"points", g.points()},
          {"spacing", g.spacing()}};
}

std::string density_csv(const DensityField& rho) {
  std::ostringstream os;
  const auto& g = rho.grid();
  bool two = g.dim().value() == 2;
  os << (two ? "x,y,rho\n" : "x,rho\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point x = g.point(i);
    os << num(x[0]) << ',';
    if (two) os << num(x[1]) << ',';
    os << num(rho[i]) << '\n';
  }
  return os.str();
}

// -------------------------------------------------------------------------- tf-minimize

struct TFArgs {
  std::string config;
  bool relaxation = false;
  double tol = 1e-6;
};

json cmd_tf(const TFArgs& a, Outputs& out, RunInfo& info) {
  ModelConfig c = config_for(a.config, info);
  TFSolution s = solve_tf(c);
  json j = {{"subcommand", "tf-minimize"},
            {"constants", to_string(c.convention)},
            {"c_tf", c.constants.c_tf},
            {"c_d", c.constants.c_d},
            {"i_w", c.i_w()},
            {"potential", c.potential->name()},
            {"interaction", c.interaction->family()},
            {"grid", grid_json(c.grid())},
            {"lambda", s.lambda},
            {"energy", energy_json(s.energy)},
            {"mass", s.rho.mass()},
            {"mass_gap", s.mass_gap},
            {"el_residual", s.el_residual},
            {"complement_min", s.complement_min},
            {"jump_min", s.jump_min},
            {"touches_boundary", s.touches_boundary},
            {"iterations", s.iterations}};
  json summary = {{"lambda", s.lambda},
                  {"energy", s.energy.total},
                  {"mass_gap", s.mass_gap},
                  {"el_residual", s.el_residual}};
  if (c.d.value() == 1) {
    RelaxedLocalEnergy rel(c.constants.c_tf, c.i_w(), c.eta);
    j["rho_alpha"] = rel.rho_alpha();
    j["alpha"] = rel.alpha();
    if (a.relaxation) {
      auto r = relaxation_equivalence_check(*c.potential, rel, c.grid(), a.tol, c.solver);
      j["relaxation"] = {{"e_tf", r.e_tf},       {"e_tf_j", r.e_tf_j},   {"difference", r.difference},
                         {"jump_min", r.jump_min}, {"jump_ok", r.jump_ok}, {"pass", r.pass},
                         {"tol", a.tol}};
      summary["relaxation_difference"] = r.difference;
      summary["relaxation_pass"] = r.pass ? 1 : 0;
    }
  }
  out.add_json("tf_solution.json", j);
  out.add("tf_density.csv", density_csv(s.rho));
  return summary;
}

// -------------------------------------------------------------------------- vlasov-lift

struct VlasovArgs {
  std::string config;
  std::string density;
  double tol = 1e-3;
};

// Reads the last column of a tf_density.csv style file onto the config grid.
DensityField read_density_csv(const std::string& path, const SpatialGrid& g) {
  std::istringstream in(slurp(path));
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> vals;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = parse_numbers(line);
    if (cols.size() != static_cast<std::size_t>(g.dim().value()) + 1)
      throw ValidationError("density row " + std::to_string(row + 1) + " has the wrong width");
    if (row >= g.size()) throw ValidationError("density file has more rows than the config grid");
    Point x = g.point(row);
    for (int k = 0; k < g.dim().value(); ++k)
      if (std::abs(cols[k] - x[k]) > 0.25 * g.spacing())
        throw ValidationError("density file does not sit on the config grid");
    if (!(cols.back() >= 0)) throw ValidationError("density values must be >= 0");
    vals.push_back(cols.back());
    ++row;
  }
  if (row != g.size()) throw ValidationError("density file has fewer rows than the config grid");
  return DensityField(g, std::move(vals));
}

json cmd_vlasov_from_file(const VlasovArgs& a, const ModelConfig& c, Outputs& out, RunInfo& info) {
  info.config_hash = hex64(fnv1a64(info.config_hash + slurp(a.density)));
  auto rho = read_density_csv(a.density, c.grid());
  auto lift = bathtub_lift(rho, c.constants);
  auto vr = vlasov_energy(lift, *c.potential, c.i_w());
  auto tf = tf_energy(rho, *c.potential, c.constants, c.i_w());
  double diff = std::abs(vr.total - tf.total);
  double rel = tf.total != 0 ? diff / std::abs(tf.total) : diff;
  bool pass = rel <= a.tol;
  out.add_json("vlasov.json", {{"subcommand", "vlasov-lift"},
                               {"density_file", a.density},
                               {"constants", to_string(c.convention)},
                               {"grid", grid_json(c.grid())},
                               {"momentum_half_width", lift.momentum_grid().half_width()},
                               {"e_tf", tf.total},
                               {"e_vlasov", vr.total},
                               {"relative_difference", rel},
                               {"kinetic_tf", tf.kinetic},
                               {"kinetic_vlasov", vr.kinetic},
                               {"lift_normalization", vr.normalization},
                               {"tol", a.tol},
                               {"pass", pass}});
  std::ostringstream os;
  const auto& g = rho.grid();
  bool two = g.dim().value() == 2;
  os << (two ? "x,y,fermi_radius,rho_in,rho_m\n" : "x,fermi_radius,rho_in,rho_m\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point x = g.point(i);
    os << num(x[0]) << ',';
    if (two) os << num(x[1]) << ',';
    os << num(lift.radii()[i]) << ',' << num(rho[i]) << ',' << num(vr.rho_m[i]) << '\n';
  }
  out.add("vlasov_lift.csv", os.str());
  return {{"e_tf", tf.total},
          {"e_vlasov", vr.total},
          {"relative_difference", rel},
          {"pass", pass ? 1 : 0}};
}

json cmd_vlasov(const VlasovArgs& a, Outputs& out, RunInfo& info) {
  ModelConfig c = config_for(a.config, info);
  if (!a.density.empty()) return cmd_vlasov_from_file(a, c, out, info);
  auto rep = tf_vlasov_equality_check(*c.potential, c.constants, c.i_w(), c.grid(), a.tol, c.solver);
  TFSolution s = solve_tf(c);
  auto lift = bathtub_lift(s.rho, c.constants);
  auto rho_m = lift.spatial_density();
  json j = {{"subcommand", "vlasov-lift"},
            {"constants", to_string(c.convention)},
            {"c_tf", c.constants.c_tf},
            {"c_d", c.constants.c_d},
            {"grid", grid_json(c.grid())},
            {"momentum_half_width", lift.momentum_grid().half_width()},
            {"e_tf", rep.e_tf},
            {"e_vlasov", rep.e_vlasov},
            {"relative_difference", rep.relative_difference},
            {"kinetic_tf", rep.kinetic_tf},
            {"kinetic_vlasov", rep.kinetic_vlasov},
            {"kinetic_ratio", rep.kinetic_ratio},
            {"lift_normalization", rep.lift_normalization},
            {"tol", a.tol},
            {"pass", rep.pass},
            {"warning", rep.warning ? json(*rep.warning) : json(nullptr)}};
  out.add_json("vlasov.json", j);

  std::ostringstream os;
  const auto& g = s.rho.grid();
  bool two = g.dim().value() == 2;
  os << (two ? "x,y,fermi_radius,rho_tf,rho_m\n" : "x,fermi_radius,rho_tf,rho_m\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point x = g.point(i);
    os << num(x[0]) << ',';
    if (two) os << num(x[1]) << ',';
    os << num(lift.radii()[i]) << ',' << num(s.rho[i]) << ',' << num(rho_m[i]) << '\n';
  }
  out.add("vlasov_lift.csv", os.str());
  return {{"e_tf", rep.e_tf},
          {"e_vlasov", rep.e_vlasov},
          {"relative_difference", rep.relative_difference},
          {"pass", rep.pass ? 1 : 0}};
}

// ------------------------------------------------------------------ husimi / semiclassics

struct HusimiArgs {
  std::string config;
  int n = 0;
  double beta = -1;
  double hbar_x = 0;
  int vectors = 20;
  unsigned long long seed = 7;
  int stride = 1;
  int points_per_width = 100;
};

CoherentFamily family_for(const ModelConfig& c, const HusimiArgs& a, double n) {
  Envelope f(c.d, c.envelope_sharpness);
  double hx = a.hbar_x > 0 ? a.hbar_x : c.hbar_x.value_or(0.0);
  if (hx > 0) return CoherentFamily::with_hbar_x(n, hx, f);
  double beta = a.beta >= 0 ? a.beta : c.interaction->beta();
  return CoherentFamily::for_particles(n, beta, f);
}

json cmd_husimi(const HusimiArgs& a, Outputs& out, RunInfo& info) {
  ModelConfig c = config_for(a.config, info);
  if (c.d.value() != 1) throw ValidationError("husimi works on 1D configs only");
  if (a.stride < 1) throw ValidationError("--stride must be positive");
  int n = a.n > 0 ? a.n : static_cast<int>(std::lround(c.particles));
  auto fam = family_for(c, a, n);
  auto g = c.grid();
  auto v = sample(*c.potential, g);
  auto gamma = free_fermion_gamma(g, v, fam.hbar, n);
  auto table = husimi(gamma, fam);
  auto rc = resolution_of_identity(fam, g, a.vectors, a.seed);
  auto mc = marginal_identities(gamma, fam);
  ScaledInteraction wn(c.interaction, n);
  auto rep = semiclassical_error_decomposition(gamma, fam, v, wn);
  info.seed = a.seed;

  std::ostringstream os;
  os << "x,p,m\n";
  for (int i = 0; i < static_cast<int>(table.x.size()); i += a.stride)
    for (int q = 0; q < static_cast<int>(table.p.size()); q += a.stride)
      os << num(table.x[i]) << ',' << num(table.p[q]) << ',' << num(table.values(i, q)) << '\n';
  out.add("husimi.csv", os.str());

  double kin_diff = rep.kinetic_correction - rep.kinetic_correction_exact;
  json j = {{"subcommand", "husimi"},
            {"state", "free-fermion Slater ground state of hbar^2(-Lap) + V"},
            {"n", n},
            {"hbar", fam.hbar},
            {"hbar_x", fam.hbar_x},
            {"hbar_p", fam.hbar_p},
            {"grid", grid_json(g)},
            {"max", table.max()},
            {"min", table.min()},
            {"pauli_ok", table.max() <= 1 + 1e-12},
            {"resolution_max_relative_error", rc.max_relative_error},
            {"resolution_vectors", rc.vectors},
            {"trace_identity", mc.trace_identity},
            {"trace_over_n", gamma.trace() / n},
            {"position_marginal_l1", mc.position_l1},
            {"momentum_marginal_l1", mc.momentum_l1},
            {"kinetic_correction", rep.kinetic_correction},
            {"kinetic_correction_exact", rep.kinetic_correction_exact},
            {"kinetic_identity_error", std::abs(kin_diff)}};
  out.add_json("husimi.json", j);
  return {{"max", table.max()},
          {"resolution_error", rc.max_relative_error},
          {"position_marginal_l1", mc.position_l1},
          {"momentum_marginal_l1", mc.momentum_l1},
          {"kinetic_identity_error", std::abs(kin_diff)}};
}

json cmd_semiclassics(const HusimiArgs& a, Outputs& out, RunInfo& info) {
  ModelConfig c = config_for(a.config, info);
  if (c.d.value() != 1) throw ValidationError("semiclassics-check works on 1D configs only");
  int n = a.n > 0 ? a.n : static_cast<int>(std::lround(c.particles));
  auto fam = family_for(c, a, n);
  ScaledInteraction wn(c.interaction, n);
  auto sm = smearing_defect(wn, fam, a.points_per_width);
  json j = {{"subcommand", "semiclassics-check"},
            {"n", n},
            {"hbar", fam.hbar},
            {"hbar_x", fam.hbar_x},
            {"hbar_p", fam.hbar_p},
            {"interaction", c.interaction->family()},
            {"smearing",
             {{"l1_defect", sm.l1_defect},
              {"gradient_l1", sm.gradient_l1},
              {"ratio", sm.ratio},
              {"bound_shape", std::sqrt(sm.hbar_x) * sm.gradient_l1}}}};
  json summary = {{"hbar_x", fam.hbar_x}, {"smearing_l1", sm.l1_defect}, {"smearing_ratio", sm.ratio}};
  try {
    auto g = c.grid();
    auto v = sample(*c.potential, g);
    auto gamma = free_fermion_gamma(g, v, fam.hbar, n);
    auto r = semiclassical_error_decomposition(gamma, fam, v, wn);
    j["decomposition"] = {{"kinetic_correction", r.kinetic_correction},
                          {"kinetic_correction_exact", r.kinetic_correction_exact},
                          {"potential_smearing", r.potential_smearing},
                          {"potential_fitted_c", r.potential_fitted_c},
                          {"interaction_smearing", r.interaction_smearing},
                          {"interaction_fitted_c", r.interaction_fitted_c},
                          {"pauli_max", r.pauli_max}};
    summary["kinetic_correction"] = r.kinetic_correction;
    summary["potential_smearing"] = r.potential_smearing;
    summary["pauli_max"] = r.pauli_max;
  } catch (const ValidationError& e) {
    // the coherent state does not fit the config grid at this hbar_x
    j["decomposition"] = {{"skipped", e.what()}};
  }
  out.add_json("semiclassics.json", j);
  return summary;
}

// ------------------------------------------------------------------------------- oracle

struct OracleArgs {
  std::string config;
  int n = 3;
  int m = 40;
  double half_width = 4.0;
  double cap = 1e6;
  double hbar = 0;
  std::string potential = "harmonic";
  std::string interaction = "zero";
  double height = 1.0, radius = 1.0, beta = 0.1;
  int tf_points = 2048;
};

json cmd_oracle(const OracleArgs& a, Outputs& out, RunInfo& info) {
  Dimension d(1);
  std::shared_ptr<const TrapPotential> pot;
  std::shared_ptr<const InteractionProfile> w;
  TFConstants constants = TFConstants::make(d, ConstantsConvention::BathTubConsistent);
  double eta = 0.5;
  SolverOptions tf_opts;
  tf_opts.mass_tol = 1e-3;  // the E_TF column is a reference only
  if (!a.config.empty()) {
    ModelConfig c = config_for(a.config, info);
    if (c.d.value() != 1) throw ValidationError("the oracle is one-dimensional");
    pot = c.potential;
    w = c.interaction;
    constants = c.constants;
    eta = c.eta;
    if (c.raw.contains("solver")) tf_opts = c.solver;
  } else {
    if (a.potential == "harmonic")
      pot = std::make_shared<TrapPotential>(TrapPotential::harmonic(d));
    else if (a.potential == "quartic")
      pot = std::make_shared<TrapPotential>(TrapPotential::quartic(d));
    else if (a.potential == "double_well")
      pot = std::make_shared<TrapPotential>(TrapPotential::double_well(d));
    else
      throw ValidationError("unknown potential '" + a.potential + "'");
    if (a.interaction == "zero")
      w = std::make_shared<InteractionProfile>(InteractionProfile::zero(d, a.beta));
    else if (a.interaction == "indicator")
      w = std::make_shared<InteractionProfile>(InteractionProfile::indicator(d, a.height, a.radius, a.beta));
    else if (a.interaction == "bump")
      w = std::make_shared<InteractionProfile>(InteractionProfile::bump(d, a.height, a.radius, a.beta));
    else
      throw ValidationError("unknown interaction '" + a.interaction + "'");
  }
  if (a.n < 1) throw ValidationError("--N must be at least 1");
  SpatialGrid g(d, a.half_width, a.m);
  auto v = sample(*pot, g);
  std::optional<ScaledInteraction> wn;
  if (w->family() != "zero") wn = ScaledInteraction(w, a.n);
  double hbar = a.hbar > 0 ? a.hbar : 1.0 / a.n;
  DiscreteHamiltonian h(g, a.n, v, wn, hbar, a.cap);
  auto gs = ground_state(h);
  auto spec = one_body_spectrum(h);
  double free = 0;
  for (int i = 0; i < a.n; ++i) free += spec[i];
  auto rd = reduced_densities(gs.state, a.n >= 2 ? 2 : 1);
  double rho2_diag = 0;
  if (rd.rho2.size())
    for (int i = 0; i < rd.rho2.rows(); ++i) rho2_diag = std::max(rho2_diag, std::abs(rd.rho2(i, i)));
  auto sb = slater_upper_bound(rd.gamma1, h, gs.energy);
  auto ap = apriori_diagnostics(gs.state, h);

  SpatialGrid tf_grid(d, std::max(a.half_width, 4.0), a.tf_points);
  RelaxedLocalEnergy rel(constants.c_tf, w->integral(), eta);
  double e_tf = NAN, tf_gap = NAN;
  std::string tf_note;
  try {
    TFSolution tf = minimize_1d_relaxed(*pot, rel, tf_grid, tf_opts);
    e_tf = tf.energy.total;
    tf_gap = tf.mass_gap;
  } catch (const MassJumpError& e) {
    tf_note = e.what();
  }

  json j = {{"subcommand", "oracle"},
            {"n", a.n},
            {"sites", a.m},
            {"grid", grid_json(g)},
            {"hbar", hbar},
            {"basis_dimension", h.dimension()},
            {"basis_cap", a.cap},
            {"interaction", w->family()},
            {"method", gs.method},
            {"energy", gs.energy},
            {"energy_per_particle", gs.energy / a.n},
            {"residual", gs.residual},
            {"iterations", gs.iterations},
            {"free_energy", free},
            {"interaction_shift", gs.energy - free},
            {"max_occupation", rd.occupations.size() ? rd.occupations.maxCoeff() : 0.0},
            {"rho2_diagonal_max", rho2_diag},
            {"slater",
             {{"trial_energy", sb.trial_energy},
              {"ground_energy", sb.ground_energy},
              {"gap", sb.trial_energy - sb.ground_energy},
              {"pass", sb.pass}}},
            {"apriori",
             {{"one_body", ap.one_body},
              {"interaction_integral", ap.interaction_integral},
              {"reference_one_body", ap.reference_one_body},
              {"reference_interaction", ap.reference_interaction}}},
            {"e_tf", std::isnan(e_tf) ? json(nullptr) : json(e_tf)},
            {"tf_mass_gap", std::isnan(tf_gap) ? json(nullptr) : json(tf_gap)},
            {"tf_note", tf_note},
            {"tf_constants", to_string(constants.source)}};
  out.add_json("oracle.json", j);
  std::ostringstream os;
  os << "x,rho1\n";
  for (int i = 0; i < g.points(); ++i) os << num(g.coordinate(i)) << ',' << num(rd.rho1[i]) << '\n';
  out.add("oracle_density.csv", os.str());
  if (rd.rho2.size()) {
    std::ostringstream o2;
    o2 << "x1,x2,rho2\n";
    for (int i = 0; i < g.points(); ++i)
      for (int k = 0; k < g.points(); ++k)
        o2 << num(g.coordinate(i)) << ',' << num(g.coordinate(k)) << ',' << num(rd.rho2(i, k)) << '\n';
    out.add("oracle_rho2.csv", o2.str());
  }
  json summary = {{"n", a.n},
          {"energy", gs.energy},
          {"energy_per_particle", gs.energy / a.n},
          {"free_energy", free},
          {"interaction_shift", gs.energy - free},
          {"max_occupation", rd.occupations.size() ? rd.occupations.maxCoeff() : 0.0},
          {"rho2_diagonal_max", rho2_diag},
          {"slater_gap", sb.trial_energy - sb.ground_energy},
          {"e_tf", std::isnan(e_tf) ? json(nullptr) : json(e_tf)}};
  // without interaction the ground state is the filled Fermi sea
  if (!wn) summary["free_error"] = std::abs(gs.energy - free);
  return summary;
}

// -------------------------------------------------------------------------- df-experiment

struct DFArgs {
  std::string preset = "pauli-critical";
  int dim = 1;
  int n = 64;
  double epsilon = 0.5;
  int trials = 10000;
  int cells = 4;
  int n_tiles = 1;
  long cell = 0;
  std::string sweep = "16,64,256";
  double delta = 0.05;
  unsigned long long seed = 0;
  int states = 3;
  int law_particles = 3;
};

Tiling tiling_for(const DFArgs& a, int n) {
  Dimension d(a.dim);
  if (a.preset == "paper-scaling") return Tiling::paper_scaling(d, n, a.n_tiles);
  if (a.preset == "pauli-critical") {
    // |S_L| = (2 pi)^d, so uniform points sit exactly at the Pauli density
    double half = 0.5 * std::sqrt(2.0 * std::numbers::pi);
    return Tiling(d, half, a.cells, a.cells);
  }
  throw ValidationError("unknown preset '" + a.preset + "'");
}

json stats_json(const PauliStats& s, const Tiling& t) {
  return {{"n", s.particles},
          {"epsilon", s.epsilon},
          {"trials", s.trials},
          {"cell", s.cell},
          {"threshold_count", s.threshold_count},
          {"hits_cell", s.hits_cell},
          {"frequency_cell", s.frequency_cell},
          {"ci95", {s.ci_low, s.ci_high}},
          {"hits_any", s.hits_any},
          {"frequency_any", s.frequency_any},
          {"ci95_any", {s.any_ci_low, s.any_ci_high}},
          {"exact_tail", s.exact_tail ? json(*s.exact_tail) : json(nullptr)},
          {"within_ci", s.within_ci()},
          {"tiling",
           {{"half_width", t.half_width()},
            {"l_x", t.l_x()},
            {"l_p", t.l_p()},
            {"cells", t.cell_count()},
            {"cell_volume", t.cell_volume()}}}};
}

json cmd_df(const DFArgs& a, Outputs& out, RunInfo& info) {
  info.seed = a.seed;
  auto run_at = [&](int n, unsigned long long seed) {
    Tiling t = tiling_for(a, n);
    auto sampler = iid_configurations(uniform_sampler(t), n);
    double q = 1.0 / static_cast<double>(t.cell_count());
    return std::make_pair(pauli_violation_stats(sampler, n, t, a.cell, a.epsilon, a.trials, seed, q), t);
  };
  auto [main_stats, main_tiling] = run_at(a.n, a.seed);

  auto ns = parse_numbers(a.sweep);
  std::vector<double> freq;
  std::ostringstream csv;
  csv << "n,threshold_count,hits,frequency,ci_low,ci_high,exact_tail\n";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    int n = static_cast<int>(ns[i]);
    auto [s, t] = run_at(n, a.seed + 1 + i);
    freq.push_back(s.frequency_cell);
    csv << n << ',' << num(s.threshold_count) << ',' << s.hits_cell << ',' << num(s.frequency_cell)
        << ',' << num(s.ci_low) << ',' << num(s.ci_high) << ',' << num(s.exact_tail.value_or(NAN))
        << '\n';
  }
  auto fit = fit_pauli_decay(ns, freq, a.delta, a.epsilon);
  auto loglin = fit_pauli_decay(ns, freq, 1.0, a.epsilon);

  // exact DF block on a small uniform law
  auto law = FiniteExchangeableLaw::uniform(a.states, a.law_particles);
  auto d = df_decomposition(law);
  bool first_equal = d.marginal1 == d.df_marginal1;
  json tv = json::array();
  bool tv_ok = true;
  for (int k = 1; k <= std::min(2, a.law_particles); ++k) {
    auto c = tv_bound_check(law, k);
    tv_ok = tv_ok && c.pass;
    tv.push_back({{"k", k},
                  {"tv", c.tv.str()},
                  {"bound", c.bound.str()},
                  {"tv_value", static_cast<double>(c.tv)},
                  {"pass", c.pass}});
  }

  json j = {{"subcommand", "df-experiment"},
            {"preset", a.preset},
            {"dimension", a.dim},
            {"seed", a.seed},
            {"sampler", "iid-uniform"},
            {"stats", stats_json(main_stats, main_tiling)},
            {"decay",
             {{"n", ns},
              {"frequency", freq},
              {"delta", a.delta},
              {"slope_vs_n_delta", fit.slope},
              {"rate", fit.rate},
              {"slope_vs_n", loglin.slope},
              {"points_used", fit.used}}},
            {"exact_law",
             {{"states", a.states},
              {"particles", a.law_particles},
              {"atoms", d.atoms.size()},
              {"first_marginals_equal", first_equal},
              {"tv", tv}}}};
  out.add_json("df_stats.json", j);
  out.add("df_decay.csv", csv.str());
  return {{"frequency_cell", main_stats.frequency_cell},
          {"exact_tail", main_stats.exact_tail.value_or(NAN)},
          {"within_ci", main_stats.within_ci() ? 1 : 0},
          {"decay_slope", loglin.slope},
          {"law_first_marginals_equal", first_equal ? 1 : 0},
          {"law_tv_pass", tv_ok ? 1 : 0}};
}

// ------------------------------------------------------------------------ constants-audit

json cmd_audit(int dim, Outputs& out) {
  json rows = json::array();
  json summary = json::object();
  std::vector<int> dims = dim == 0 ? std::vector<int>{1, 2} : std::vector<int>{dim};
  for (int d : dims) {
    auto a = audit_constants(Dimension(d));
    rows.push_back({{"dimension", d},
                    {"paper_literal", {{"c_tf", a.paper_literal.c_tf}, {"c_d", a.paper_literal.c_d}}},
                    {"bath_tub_consistent", {{"c_tf", a.bath_tub.c_tf}, {"c_d", a.bath_tub.c_d}}},
                    {"probe_mass", a.probe_mass},
                    {"tf_kinetic_paper", a.tf_kinetic_paper},
                    {"tf_kinetic_bathtub", a.tf_kinetic_bathtub},
                    {"lift_kinetic_paper", a.lift_kinetic_paper},
                    {"lift_kinetic_bathtub", a.lift_kinetic_bathtub},
                    {"mismatch_factor_paper", a.mismatch_factor_paper}});
    summary["mismatch_factor_d" + std::to_string(d)] = a.mismatch_factor_paper;
  }
  out.add_json("constants_audit.json", {{"subcommand", "constants-audit"}, {"audits", rows}});
  return summary;
}

// ---------------------------------------------------------------------------------- run

struct Outcome {
  int code = kExitOk;
  json summary = json::object();
  std::string message;
};

void report_error(std::ostream& err, const char* kind, int code, const std::string& msg) {
  err << json{{"status", "error"}, {"kind", kind}, {"exit_code", code}, {"message", msg}}.dump()
      << "\n";
}

Outcome execute(std::vector<std::string> args, std::ostream& out, std::ostream& err);

json cmd_sweep(const std::string& command, const std::string& param, const std::string& values,
               const std::vector<std::string>& extra, Outputs& outputs) {
  static const std::set<std::string> allowed = {"tf-minimize", "vlasov-lift", "husimi",
                                                "semiclassics-check", "oracle", "df-experiment",
                                                "constants-audit"};
  if (!allowed.count(command)) throw ValidationError("cannot sweep '" + command + "'");
  if (param.empty()) throw ValidationError("--param is required");
  auto vals = split_list(values);
  std::vector<std::string> keys;
  std::vector<Outcome> rows;
  for (const auto& v : vals) {
    std::vector<std::string> sub{command};
    sub.insert(sub.end(), extra.begin(), extra.end());
    sub.push_back("--" + param);
    sub.push_back(v);
    sub.push_back("--out");
    sub.push_back((fs::path(outputs.dir()) / (param + "=" + v)).string());
    std::ostringstream sink, errs;
    Outcome o = execute(sub, sink, errs);
    if (o.code != kExitOk && o.message.empty()) o.message = errs.str();
    for (auto it = o.summary.begin(); it != o.summary.end(); ++it)
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
    rows.push_back(std::move(o));
  }
  std::ostringstream csv;
  csv << param << ",exit_code";
  for (const auto& k : keys) csv << ',' << k;
  csv << ",error\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    csv << vals[r] << ',' << rows[r].code;
    for (const auto& k : keys) {
      csv << ',';
      if (rows[r].summary.contains(k)) {
        const auto& x = rows[r].summary[k];
        csv << (x.is_number() ? num(x.get<double>()) : x.dump());
      }
    }
    std::string msg = rows[r].message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    csv << ',' << msg << '\n';
  }
  outputs.add("sweep.csv", csv.str());

  // log-log slope of every positive column against the swept value
  json fits = json::object();
  std::vector<double> xs;
  bool numeric = true;
  for (const auto& v : vals) {
    try {
      xs.push_back(std::stod(v));
    } catch (const std::exception&) {
      numeric = false;
    }
  }
  if (numeric && rows.size() >= 2) {
    for (const auto& k : keys) {
      std::vector<double> px, py;
      bool ok = true;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].code != kExitOk || !rows[r].summary.contains(k) ||
            !rows[r].summary[k].is_number()) {
          ok = false;
          break;
        }
        double y = rows[r].summary[k].get<double>();
        if (!(y > 0) || !(xs[r] > 0)) {
          ok = false;
          break;
        }
        px.push_back(xs[r]);
        py.push_back(y);
      }
      if (!ok) continue;
      auto f = loglog_fit(px, py);
      fits[k] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
    }
  }
  int failed = 0;
  for (const auto& r : rows) failed += r.code != kExitOk;
  outputs.add_json("sweep_fit.json", {{"subcommand", "sweep"},
                                      {"command", command},
                                      {"param", param},
                                      {"values", vals},
                                      {"failed_rows", failed},
                                      {"loglog_fits", fits}});
  return {{"rows", rows.size()}, {"failed_rows", failed}};
}

Outcome execute(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thomas-Fermi, Vlasov and Husimi toolkit for trapped attractive fermions",
               "fermigas"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir = "fermigas-out";
  int threads = 0;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (default: $FERMIGAS_THREADS or all)");
  app.set_version_flag("--version", FERMIGAS_VERSION);

  TFArgs tf;
  auto* c_tf = app.add_subcommand("tf-minimize", "Minimise the Thomas-Fermi functional");
  c_tf->add_option("--config", tf.config, "Model config (JSON)")->required();
  c_tf->add_flag("--relaxation-check", tf.relaxation, "Compare E_TF with the relaxed E_TF^J (1D)");
  c_tf->add_option("--tol", tf.tol, "Tolerance of the relaxation check")->capture_default_str();

  VlasovArgs vl;
  auto* c_vl = app.add_subcommand("vlasov-lift", "Bath-tub lift and Vlasov/TF equality check");
  c_vl->add_option("--config", vl.config, "Model config (JSON)")->required();
  c_vl->add_option("--density", vl.density, "Lift this density CSV instead of solving TF");
  c_vl->add_option("--tol", vl.tol, "Relative tolerance")->capture_default_str();

  HusimiArgs hu;
  auto add_husimi_opts = [](CLI::App* c, HusimiArgs& a) {
    c->add_option("--config", a.config, "Model config (JSON, d = 1)")->required();
    c->add_option("--N", a.n, "Particle number (default: config)");
    c->add_option("--beta", a.beta, "Scaling exponent for hbar_x (default: interaction beta)");
    c->add_option("--hbar-x", a.hbar_x, "Override hbar_x");
    c->add_option("--points-per-width", a.points_per_width, "Fine-grid resolution for smearing")
        ->capture_default_str();
  };
  auto* c_hu = app.add_subcommand("husimi", "Husimi function of the free Slater state plus identities");
  add_husimi_opts(c_hu, hu);
  c_hu->add_option("--vectors", hu.vectors, "Random vectors for the resolution check")->capture_default_str();
  c_hu->add_option("--seed", hu.seed, "Seed for the random vectors")->capture_default_str();
  c_hu->add_option("--stride", hu.stride, "Write every stride-th lattice point")->capture_default_str();

  HusimiArgs sc;
  auto* c_sc = app.add_subcommand("semiclassics-check", "Semiclassical error decomposition");
  add_husimi_opts(c_sc, sc);

  OracleArgs orc;
  auto* c_or = app.add_subcommand("oracle", "Exact diagonalisation on a 1D lattice");
  c_or->add_option("--config", orc.config, "Model config (JSON, d = 1); overrides the trap flags");
  c_or->add_option("--N", orc.n, "Particles")->capture_default_str();
  c_or->add_option("--M", orc.m, "Lattice sites")->capture_default_str();
  c_or->add_option("--L", orc.half_width, "Box half width")->capture_default_str();
  c_or->add_option("--basis-cap", orc.cap, "Largest allowed basis dimension")->capture_default_str();
  c_or->add_option("--hbar", orc.hbar, "hbar (default 1/N)");
  c_or->add_option("--potential", orc.potential, "harmonic | quartic | double_well")
      ->capture_default_str();
  c_or->add_option("--interaction", orc.interaction, "zero | indicator | bump")->capture_default_str();
  c_or->add_option("--height", orc.height, "Interaction height")->capture_default_str();
  c_or->add_option("--radius", orc.radius, "Interaction radius")->capture_default_str();
  c_or->add_option("--beta", orc.beta, "Interaction scaling exponent")->capture_default_str();
  c_or->add_option("--tf-points", orc.tf_points, "Grid for the reference E_TF")->capture_default_str();

  DFArgs df;
  auto* c_df = app.add_subcommand("df-experiment", "Pauli-violation statistics and exact DF checks");
  c_df->add_option("--seed", df.seed, "Random seed")->required();
  c_df->add_option("--preset", df.preset, "pauli-critical | paper-scaling")->capture_default_str();
  c_df->add_option("--dim", df.dim, "Phase-space dimension d")->capture_default_str();
  c_df->add_option("--N", df.n, "Particles")->capture_default_str();
  c_df->add_option("--epsilon", df.epsilon, "Pauli slack")->capture_default_str();
  c_df->add_option("--trials", df.trials, "Monte Carlo trials")->capture_default_str();
  c_df->add_option("--cells", df.cells, "Cells per axis (pauli-critical)")->capture_default_str();
  c_df->add_option("--n-tiles", df.n_tiles, "Multiplier n in L = n N^{-gamma/2d} (paper-scaling)")
      ->capture_default_str();
  c_df->add_option("--cell", df.cell, "Cell index for Gamma_eps^j")->capture_default_str();
  c_df->add_option("--sweep", df.sweep, "Comma separated N values")->capture_default_str();
  c_df->add_option("--delta", df.delta, "Exponent of the decay fit")->capture_default_str();
  c_df->add_option("--states", df.states, "States of the exact law")->capture_default_str();
  c_df->add_option("--law-particles", df.law_particles, "Particles of the exact law")
      ->capture_default_str();

  int audit_dim = 0;
  auto* c_au = app.add_subcommand("constants-audit", "Compare the two c_TF conventions");
  c_au->add_option("--dim", audit_dim, "1, 2, or 0 for both")->capture_default_str();

  std::string sw_cmd, sw_param, sw_values;
  auto* c_sw = app.add_subcommand("sweep", "Run a subcommand over a list of values");
  c_sw->add_option("--command", sw_cmd, "Subcommand to run")->required();
  c_sw->add_option("--param", sw_param, "Flag to vary, without dashes")->required();
  c_sw->add_option("--values", sw_values, "Comma separated values (may be empty)");

  // everything after a bare "--" belongs to the swept subcommand
  std::vector<std::string> passthrough;
  auto dash = std::find(args.begin(), args.end(), "--");
  if (dash != args.end()) {
    passthrough.assign(dash + 1, args.end());
    args.erase(dash, args.end());
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return {};
    }
    report_error(err, "usage", kExitValidation, e.what());
    return {kExitValidation, json::object(), e.what()};
  }

  if (!passthrough.empty() && !c_sw->parsed()) {
    report_error(err, "usage", kExitValidation, "arguments after -- are only used by sweep");
    return {kExitValidation, json::object(), "arguments after -- are only used by sweep"};
  }
  set_threads(threads);
  Outputs outputs(out_dir);
  RunInfo info;
  info.err = &err;
  info.subcommand = app.get_subcommands().front()->get_name();
  auto t0 = clk::now();
  Outcome res;
  try {
    if (c_tf->parsed())
      res.summary = cmd_tf(tf, outputs, info);
    else if (c_vl->parsed())
      res.summary = cmd_vlasov(vl, outputs, info);
    else if (c_hu->parsed())
      res.summary = cmd_husimi(hu, outputs, info);
    else if (c_sc->parsed())
      res.summary = cmd_semiclassics(sc, outputs, info);
    else if (c_or->parsed())
      res.summary = cmd_oracle(orc, outputs, info);
    else if (c_df->parsed())
      res.summary = cmd_df(df, outputs, info);
    else if (c_au->parsed())
      res.summary = cmd_audit(audit_dim, outputs);
    else if (c_sw->parsed())
      res.summary = cmd_sweep(sw_cmd, sw_param, sw_values, passthrough, outputs);
  } catch (const ValidationError& e) {
    res = {kExitValidation, json::object(), e.what()};
    report_error(err, "validation", res.code, e.what());
  } catch (const CapError& e) {
    res = {kExitCap, json::object(), e.what()};
    report_error(err, "cap", res.code, e.what());
  } catch (const NumericError& e) {
    res = {kExitNumeric, json::object(), e.what()};
    report_error(err, "numeric", res.code, e.what());
  } catch (const std::exception& e) {
    res = {kExitInternal, json::object(), e.what()};
    report_error(err, "internal", res.code, e.what());
  }
  if (res.code != kExitOk) return res;

  std::ostringstream argv;
  for (const auto& a : args) argv << a << ' ';
  if (info.config_hash == "none") info.config_hash = hex64(fnv1a64(argv.str()));
  json manifest = {
      {"schema_version", kSchemaVersion},
      {"subcommand", info.subcommand},
      {"args", args},
      {"config_hash", info.config_hash},
      {"module_versions",
       {{"fermigas", FERMIGAS_VERSION}, {"config_schema", kSchemaVersion}, {"output_schema", kSchemaVersion}}},
      {"seed", info.seed},
      {"constants_convention", info.convention},
      {"threads", current_threads()},
      {"wall_clock_seconds", std::chrono::duration<double>(clk::now() - t0).count()},
      {"outputs", outputs.files()}};
  write_atomic((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  out << json{{"status", "ok"}, {"subcommand", info.subcommand}, {"summary", res.summary}}.dump()
      << "\n";
  return res;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return execute(args, out, err).code;
}

}  // namespace fermigas
