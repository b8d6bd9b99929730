#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "effham/basis.hpp"
#include "effham/commands.hpp"
#include "effham/config.hpp"
#include "effham/deformed_su2.hpp"
#include "effham/dynamics.hpp"
#include "effham/error.hpp"
#include "effham/lie_transform.hpp"
#include "effham/multilevel.hpp"
#include "effham/table.hpp"

namespace py = pybind11;
using namespace effham;

namespace {

constexpr const char* kTag = "python";

Operator wrap(const Matrix& m) { return Operator(m, kTag); }

py::list states_of(const StateSpace& space) {
  py::list out;
  for (const auto& s : space) out.append(py::make_tuple(s.photons, s.occupations));
  return out;
}

CascadeModel cascade(int levels, int atoms, std::vector<double> detunings, std::vector<double> couplings,
                     double max_excitation) {
  return CascadeModel::from_detunings(levels, atoms, std::move(detunings), std::move(couplings),
                                      HalfInteger::from_double(max_excitation));
}

StarkConvention stark(const std::string& name) {
  if (name == "consistent") return StarkConvention::consistent;
  if (name == "quoted") return StarkConvention::quoted;
  throw Error("cli-io", "stark convention must be 'consistent' or 'quoted', got '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Effective Hamiltonians for deformed su(2) and cascade multilevel models";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<CascadeModel>(m, "CascadeModel")
      .def(py::init(&cascade), py::arg("levels"), py::arg("atoms"), py::arg("detunings"), py::arg("couplings"),
           py::arg("max_excitation"))
      .def_readonly("levels", &CascadeModel::levels)
      .def_readonly("atoms", &CascadeModel::atoms)
      .def_readonly("detunings", &CascadeModel::detunings)
      .def_readonly("couplings", &CascadeModel::couplings)
      .def_property_readonly("max_excitation", [](const CascadeModel& c) { return c.max_excitation.value(); });

  m.def("alpha1", [](const CascadeModel& c) { return alpha1(c); });
  m.def("psi_ladder", [](const CascadeModel& c) { return psi_ladder(c); },
        "psi[k-1][j-1] = psi_j^(k)");
  m.def("alpha2", [](const CascadeModel& c) { return alpha2(c); });
  m.def("resonant_pair_coupling", &resonant_pair_coupling, py::arg("model"), py::arg("photons"));

  m.def("sector_states", [](int levels, int atoms, double excitation) {
    return states_of(build_sector(levels, atoms, HalfInteger::from_double(excitation)).space);
  });
  m.def("basis_states", [](const CascadeModel& c) {
    return states_of(build_full_basis(c.levels, c.atoms, c.max_excitation).space());
  });
  m.def("full_hamiltonian", [](const CascadeModel& c) {
    const FullBasis b = build_full_basis(c.levels, c.atoms, c.max_excitation);
    return build_full_h(c, b).matrix;
  }, "h0 + V on the basis of basis_states(model)");
  m.def("reference_energies", [](const CascadeModel& c) {
    const FullBasis b = build_full_basis(c.levels, c.atoms, c.max_excitation);
    return RealVector(reference_h0(c, b.space()).real_diagonal());
  });
  m.def("effective_hamiltonian", [](const CascadeModel& c, bool keep_order3_terms, const std::string& convention) {
    const FullBasis b = build_full_basis(c.levels, c.atoms, c.max_excitation);
    if (c.levels == 3) return effective_two_photon(c, b.space(), true, stark(convention)).matrix;
    if (c.levels == 4) return effective_three_photon(c, b.space(), keep_order3_terms, stark(convention)).matrix;
    throw Error("multilevel", "closed-form effective Hamiltonian needs 3 or 4 levels");
  }, py::arg("model"), py::arg("keep_order3_terms") = false, py::arg("convention") = "consistent");

  m.def("algebra_residuals", [](const std::string& phi, double param, double m0, int dim) {
    StructuralPolynomial p;
    if (phi == "spin") p = StructuralPolynomial::spin(param);
    else if (phi == "boson") p = StructuralPolynomial::boson();
    else throw Error("deformed-su2", "phi must be 'spin' or 'boson'");
    const AlgebraResiduals r = verify_algebra(build_module(p, m0, dim));
    py::dict d;
    d["raise"] = r.raise;
    d["lower"] = r.lower;
    d["ladder_interior"] = r.ladder_interior;
    d["top_defect"] = r.top_defect;
    d["expected_top_defect"] = r.expected_top_defect;
    return d;
  }, py::arg("phi"), py::arg("param"), py::arg("m0"), py::arg("dim"));

  m.def("eigvalsh", [](const Matrix& h) { return RealVector(hermitian_eig(wrap(h)).values); },
        "Eigenvalues of a Hermitian matrix, ascending (Jacobi)");

  m.def("lie_transform", [](const Matrix& h, const RealVector& reference, int max_steps) {
    LieOptions o;
    o.max_steps = max_steps;
    const TransformReport r = iterate(wrap(h), Operator::diagonal(reference, kTag), o);
    py::dict d;
    d["final_h"] = r.final_h.matrix;
    d["rotation"] = r.rotation.matrix;
    d["residual"] = r.residual_offdiag;
    d["converged"] = r.converged;
    d["resonant_blocks"] = r.resonant_blocks;
    return d;
  }, py::arg("h"), py::arg("reference"), py::arg("max_steps") = 8);

  m.def("evolve", [](const Matrix& h, const Vector& psi0, const std::vector<double>& times) {
    const auto states = evolve(wrap(h), psi0, TimeGrid{times});
    Matrix out(psi0.size(), Eigen::Index(states.size()));
    for (std::size_t k = 0; k < states.size(); ++k) out.col(Eigen::Index(k)) = states[k];
    return out;
  }, py::arg("h"), py::arg("psi0"), py::arg("times"), "States as columns, one per time");

  m.def("run_command", [](const std::string& config_text, const std::string& command) {
    const CommandResult r = run_command(parse_config(config_text), command);
    return py::make_tuple(format_table(r.table), r.report, r.exit_code);
  }, py::arg("config_text"), py::arg("command"), "Returns (csv_text, report, exit_code)");
}
