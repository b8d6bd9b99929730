#pragma once

// Run configuration. The format is flat sections of `key = value` lines:
//
//   # comment
//   [model]
//   kind = cascade            # or deformed_su2
//   levels = 3
//   atoms = 1
//   g = 1, 1
//   detunings = 0, 20, 0      # or: frequencies = ... with omega_f = ...
//   max_excitation = 3        # half-integers allowed: 5/2 or 2.5
//
//   [run]
//   order = 1
//   seed = 7
//
// Lists are comma separated. Keys are case sensitive; unknown keys,
// duplicate keys and keys outside a section are errors reported with their
// line number. See README.md for the full key list.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "effham/deformed_su2.hpp"
#include "effham/multilevel.hpp"

namespace effham {

enum class ModelKind { cascade, deformed_su2 };

struct Su2ModelConfig {
  std::string phi = "spin";  // spin | boson | roots | polynomial
  double j = 0.5;
  std::vector<double> roots;
  std::vector<double> coefficients;
  double scale = 1.0;
  double m0 = -0.5;
  int dim = 2;
  double delta = 10.0;
  double g = 1.0;

  StructuralPolynomial structural_polynomial() const;
  Su2Hamiltonian hamiltonian() const;
  /// Same module and coupling with detuning g / eps.
  Su2Hamiltonian hamiltonian_at(double eps) const;
};

struct RunParams {
  int order = 1;
  std::optional<double> resonance_tol;
  int max_steps = 8;
  std::uint64_t seed = 0;
  int samples = 0;  // seeded random specs checked by verify
  double t_end = 0;  // 0: three effective periods (cascade) or 50/|Delta| periods (su2)
  int points = 601;
  std::vector<double> epsilons{0.1, 0.05, 0.025};
  int initial_photons = 0;
  int initial_level = 1;
  int initial_index = 0;
  StarkConvention stark = StarkConvention::consistent;
  std::string units = "g";
};

struct RunConfig {
  ModelKind kind = ModelKind::cascade;
  std::optional<CascadeModel> cascade;
  std::optional<Su2ModelConfig> su2;
  RunParams run;
  /// Every `section.key = value` as read, in file order.
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Parses and validates. Errors are Error("cli-io", "line N: ...") for
/// syntax problems and Error("cli-io", "<field>: ...") for validation.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace effham
