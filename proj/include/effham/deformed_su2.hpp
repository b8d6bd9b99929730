#pragma once

// Finite lowest-weight modules of a polynomially deformed su(2):
//
//   [X3, X+-] = +-X+-,   [X+, X-] = P(X3) = Phi(X3) - Phi(X3 + 1),
//
// with Phi(X3) = X+ X- the structural function. The difference operator used
// throughout is the forward difference  grad f(m) = f(m + 1) - f(m), so
// P = -grad Phi.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "effham/operator.hpp"

namespace effham {

/// Phi(m) = sum_k c_k m^k. Named parameters record the integrals of motion
/// the coefficients were derived from; they do not enter evaluation.
class StructuralPolynomial {
 public:
  StructuralPolynomial() = default;
  explicit StructuralPolynomial(std::vector<double> coefficients,
                                std::map<std::string, double> parameters = {});

  /// Ordinary spin j: Phi(m) = (j + m)(j - m + 1).
  static StructuralPolynomial spin(double j);
  /// Heisenberg limit Phi(m) = m.
  static StructuralPolynomial boson();
  /// Product of linear factors prod_k (m - r_k), scaled by `scale`.
  static StructuralPolynomial from_roots(const std::vector<double>& roots, double scale = 1.0);

  double operator()(double m) const;
  const std::vector<double>& coefficients() const { return coefficients_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }

 private:
  std::vector<double> coefficients_;
  std::map<std::string, double> parameters_;
};

struct DeformedModule {
  double m0 = 0;
  int dim = 0;
  StructuralPolynomial phi;
  Operator x3;
  Operator xp;
  Operator xm;

  double weight(int index) const { return m0 + index; }
  std::string tag() const { return x3.basis_tag; }
  /// Diagonal operator f(X3 + shift).
  Operator diag_function(const std::function<double(double)>& f, double shift = 0.0) const;
  /// Expected [X+, X-] - P(X3) defect on the top rung: Phi(m0 + dim).
  double top_defect() const { return phi(m0 + dim); }
};

/// Ladder construction |m> ~ X+^(m - m0)|m0>. Throws unless Phi(m0) = 0 and
/// Phi > 0 on every rung that raising reaches.
DeformedModule build_module(const StructuralPolynomial& phi, double m0, int dim);

struct Su2Hamiltonian {
  double delta = 1;  // detuning
  double g = 0;      // coupling
  DeformedModule module;

  double epsilon() const { return g / delta; }
};

/// Throws unless delta is finite and nonzero.
void validate(const Su2Hamiltonian& spec);

/// Delta X3 + g (X+ + X-).
Operator interaction_hamiltonian(const Su2Hamiltonian& spec);

/// T = X+ - X-.
Operator rotation_generator(const DeformedModule& module);

/// U = exp(eps T).
Operator small_rotation(const Su2Hamiltonian& spec);

/// Delta X3 + (g^2 / Delta) P(X3); diagonal.
Operator effective_order1(const Su2Hamiltonian& spec);

/// Delta X3 + g sum_{k<=order} eps^k (k/(k+1)!) ad_T^k(V) in closed form:
///   k=1: -grad Phi(X3)
///   k=2: (2/3)[X+ grad^2 Phi(X3) + grad^2 Phi(X3) X-]
///   k=3: -(1/4){X+^2 grad^3 Phi(X3) + grad^3 Phi(X3) X-^2
///                + 2 grad[Phi(X3) grad^2 Phi(X3 - 1)]}
/// `order` must be 1, 2 or 3.
Operator effective_series(const Su2Hamiltonian& spec, int order);

/// Approximate eigenvector U^dag|m> expanded to `order` (1 or 2) in eps and
/// normalized. `index` counts rungs from the lowest weight.
Vector eigenstate_correction(const Su2Hamiltonian& spec, int index, int order);

struct AlgebraResiduals {
  double raise = 0;             // ||[X3, X+] - X+||_F
  double lower = 0;             // ||[X3, X-] + X-||_F
  double ladder_interior = 0;   // ||[X+, X-] - P(X3)||_F without the top corner
  double top_defect = 0;        // measured top-corner entry of [X+, X-] - P(X3)
  double expected_top_defect = 0;  // Phi(m0 + dim)

  double max_interior() const;
};

AlgebraResiduals verify_algebra(const DeformedModule& module);

}  // namespace effham
