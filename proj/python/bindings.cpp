// Thin Python layer: a few entry points returning plain dicts and numpy arrays.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fermigas/cli.hpp"
#include "fermigas/config.hpp"
#include "fermigas/df_measures.hpp"
#include "fermigas/oracle.hpp"
#include "fermigas/tf_solver.hpp"
#include "fermigas/tiling.hpp"
#include "fermigas/vlasov.hpp"

namespace py = pybind11;
using namespace fermigas;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<double> axis(const SpatialGrid& g) {
  std::vector<double> x(g.points());
  for (int i = 0; i < g.points(); ++i) x[i] = g.coordinate(i);
  return x;
}

py::dict tf_minimize(const std::string& config_json) {
  ModelConfig c = parse_config(nlohmann::json::parse(config_json));
  SpatialGrid g = c.grid();
  py::gil_scoped_release nogil;
  TFSolution s = c.d.value() == 2
                     ? minimize_2d(*c.potential, c.constants, c.i_w(), g, c.solver)
                     : minimize_1d_relaxed(*c.potential, RelaxedLocalEnergy(c.constants.c_tf, c.i_w(), c.eta),
                                           g, c.solver);
  py::gil_scoped_acquire gil;
  py::dict out;
  out["dimension"] = c.d.value();
  out["lambda"] = s.lambda;
  out["energy"] = s.energy.total;
  out["mass_gap"] = s.mass_gap;
  out["jump_min"] = s.jump_min;
  out["x"] = to_array(axis(g));
  auto rho = to_array(s.rho.values());
  if (c.d.value() == 2) rho = rho.reshape({g.points(), g.points()});
  out["rho"] = rho;
  return out;
}

py::dict vlasov_check(const std::string& config_json, double tol) {
  ModelConfig c = parse_config(nlohmann::json::parse(config_json));
  auto r = tf_vlasov_equality_check(*c.potential, c.constants, c.i_w(), c.grid(), tol, c.solver);
  py::dict out;
  out["e_tf"] = r.e_tf;
  out["e_vlasov"] = r.e_vlasov;
  out["relative_difference"] = r.relative_difference;
  out["kinetic_ratio"] = r.kinetic_ratio;
  out["pass"] = r.pass;
  out["warning"] = r.warning ? py::cast(*r.warning) : py::none();
  return out;
}

py::dict oracle_ground_state(int n, int m, double half_width, double height, double beta, double cap) {
  Dimension d(1);
  SpatialGrid g(d, half_width, m);
  std::optional<ScaledInteraction> wn;
  if (height > 0)
    wn = ScaledInteraction(std::make_shared<InteractionProfile>(InteractionProfile::indicator(d, height, 1.0, beta)),
                           n);
  DiscreteHamiltonian h(g, n, sample(TrapPotential::harmonic(d), g), wn, cap);
  py::gil_scoped_release nogil;
  auto gs = ground_state(h);
  auto rd = reduced_densities(gs.state, 1);
  auto spec = one_body_spectrum(h);
  py::gil_scoped_acquire gil;
  py::dict out;
  out["energy"] = gs.energy;
  out["basis_dimension"] = h.dimension();
  out["filled_spectrum_sum"] = spec.head(n).sum();
  out["x"] = to_array(axis(g));
  out["rho1"] = to_array(rd.rho1.values());
  out["occupations"] = to_array(std::vector<double>(rd.occupations.data(),
                                                    rd.occupations.data() + rd.occupations.size()));
  return out;
}

py::dict df_uniform_check(int states, int particles, int k) {
  auto law = FiniteExchangeableLaw::uniform(states, particles);
  auto d = df_decomposition(law);
  auto c = tv_bound_check(law, k);
  py::dict out;
  out["first_marginals_equal"] = d.marginal1 == d.df_marginal1;
  out["tv"] = c.tv.str();
  out["bound"] = c.bound.str();
  out["pass"] = c.pass;
  return out;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  int code;
  {
    py::gil_scoped_release nogil;
    code = run(args, o, e);
  }
  return py::make_tuple(code, o.str(), e.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Thomas-Fermi, Vlasov and exact-diagonalisation tools for trapped attractive fermions";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<CapError>(m, "CapError", PyExc_MemoryError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("tf_constants", [](int d, const std::string& convention) {
    auto c = TFConstants::make(Dimension(d), constants_convention_from_string(convention));
    return py::make_tuple(c.c_tf, c.c_d);
  }, py::arg("d"), py::arg("convention") = "bath_tub_consistent");
  m.def("mismatch_factor", [](int d) { return audit_constants(Dimension(d)).mismatch_factor_paper; },
        py::arg("d"));
  m.def("tf_minimize", &tf_minimize, py::arg("config_json"),
        "Minimise the TF functional for a JSON config; returns lambda, energy and the density.");
  m.def("vlasov_check", &vlasov_check, py::arg("config_json"), py::arg("tol") = 1e-3);
  m.def("oracle_ground_state", &oracle_ground_state, py::arg("n"), py::arg("m"), py::arg("half_width") = 4.0,
        py::arg("height") = 0.0, py::arg("beta") = 0.1, py::arg("cap") = 1e6);
  m.def("df_uniform_check", &df_uniform_check, py::arg("states"), py::arg("particles"), py::arg("k") = 2);
  m.def("binomial_upper_tail", &binomial_upper_tail, py::arg("n"), py::arg("q"), py::arg("threshold"));
  m.def("run_cli", &run_cli, py::arg("args"), "Run a CLI subcommand in-process; returns (code, stdout, stderr).");
  m.attr("__version__") = FERMIGAS_VERSION;
}
