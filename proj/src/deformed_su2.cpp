#include "effham/deformed_su2.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "effham/error.hpp"
#include "effham/linalg.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "deformed-su2";

std::string module_tag(double m0, int dim) {
  std::ostringstream os;
  os.precision(17);
  os << "su2[m0=" << m0 << ",dim=" << dim << "]";
  return os.str();
}

}  // namespace

StructuralPolynomial::StructuralPolynomial(std::vector<double> coefficients,
                                           std::map<std::string, double> parameters)
    : coefficients_(std::move(coefficients)), parameters_(std::move(parameters)) {
  for (double c : coefficients_)
    if (!std::isfinite(c)) throw Error(kModule, "structural polynomial has a non-finite coefficient");
}

StructuralPolynomial StructuralPolynomial::spin(double j) {
  // (j + m)(j - m + 1) = j(j+1) + m - m^2
  return StructuralPolynomial({j * (j + 1), 1.0, -1.0}, {{"j", j}});
}

StructuralPolynomial StructuralPolynomial::boson() { return StructuralPolynomial({0.0, 1.0}); }

StructuralPolynomial StructuralPolynomial::from_roots(const std::vector<double>& roots, double scale) {
  std::vector<double> c{scale};
  for (double r : roots) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return StructuralPolynomial(std::move(c));
}

double StructuralPolynomial::operator()(double m) const {
  double v = 0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) v = v * m + *it;
  return v;
}

Operator DeformedModule::diag_function(const std::function<double(double)>& f, double shift) const {
  RealVector v(dim);
  for (int k = 0; k < dim; ++k) v(k) = f(weight(k) + shift);
  return Operator::diagonal(v, tag());
}

DeformedModule build_module(const StructuralPolynomial& phi, double m0, int dim) {
  if (dim < 1) throw Error(kModule, "module dimension must be positive");
  if (std::abs(phi(m0)) > 1e-12)
    throw Error(kModule, "Phi(m0) = " + std::to_string(phi(m0)) +
                             " but the lowest weight requires Phi(m0) = 0");
  for (int k = 1; k < dim; ++k)
    if (!(phi(m0 + k) > 0))
      throw Error(kModule, "Phi(" + std::to_string(m0 + k) + ") = " + std::to_string(phi(m0 + k)) +
                               " is not positive inside the module");
  DeformedModule mod;
  mod.m0 = m0;
  mod.dim = dim;
  mod.phi = phi;
  const std::string tag = module_tag(m0, dim);
  Matrix x3 = Matrix::Zero(dim, dim);
  Matrix xm = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    x3(k, k) = m0 + k;
    // X-|m> = sqrt(Phi(m)) |m-1>
    if (k > 0) xm(k - 1, k) = std::sqrt(phi(m0 + k));
  }
  mod.x3 = Operator(x3, tag);
  mod.xm = Operator(xm, tag);
  mod.xp = mod.xm.adjoint();
  return mod;
}

void validate(const Su2Hamiltonian& spec) {
  if (!std::isfinite(spec.delta) || spec.delta == 0.0)
    throw Error(kModule, "detuning must be finite and nonzero (eps = g / Delta)");
  if (!std::isfinite(spec.g)) throw Error(kModule, "coupling must be finite");
}

Operator interaction_hamiltonian(const Su2Hamiltonian& spec) {
  validate(spec);
  const auto& m = spec.module;
  return spec.delta * m.x3 + spec.g * (m.xp + m.xm);
}

Operator rotation_generator(const DeformedModule& module) { return module.xp - module.xm; }

Operator small_rotation(const Su2Hamiltonian& spec) {
  validate(spec);
  return expm_antihermitian(spec.epsilon() * rotation_generator(spec.module));
}

Operator effective_order1(const Su2Hamiltonian& spec) {
  validate(spec);
  const auto& m = spec.module;
  const auto& phi = m.phi;
  const Operator p = m.diag_function([&](double x) { return phi(x) - phi(x + 1); });
  return spec.delta * m.x3 + (spec.g * spec.g / spec.delta) * p;
}

Operator effective_series(const Su2Hamiltonian& spec, int order) {
  validate(spec);
  if (order < 1 || order > 3)
    throw Error(kModule, "effective_series order must be 1, 2 or 3 (got " + std::to_string(order) + ")");
  const auto& m = spec.module;
  const auto& phi = m.phi;
  const double eps = spec.epsilon();

  auto grad1 = [&](double x) { return phi(x + 1) - phi(x); };
  auto grad2 = [&](double x) { return phi(x + 2) - 2 * phi(x + 1) + phi(x); };
  auto grad3 = [&](double x) { return phi(x + 3) - 3 * phi(x + 2) + 3 * phi(x + 1) - phi(x); };

  Operator series = -eps * m.diag_function(grad1);
  if (order >= 2) {
    const Operator g2 = m.diag_function(grad2);
    series += (eps * eps * 2.0 / 3.0) * (m.xp * g2 + g2 * m.xm);
  }
  if (order >= 3) {
    const Operator g3 = m.diag_function(grad3);
    auto h = [&](double x) { return phi(x) * grad2(x - 1); };
    const Operator grad_h = m.diag_function([&](double x) { return h(x + 1) - h(x); });
    const Operator xp2 = m.xp * m.xp;
    const Operator xm2 = m.xm * m.xm;
    series -= (eps * eps * eps / 4.0) * (xp2 * g3 + g3 * xm2 + 2.0 * grad_h);
  }
  return spec.delta * m.x3 + spec.g * series;
}

Vector eigenstate_correction(const Su2Hamiltonian& spec, int index, int order) {
  validate(spec);
  const auto& m = spec.module;
  if (index < 0 || index >= m.dim)
    throw Error(kModule, "eigenstate index " + std::to_string(index) + " outside 0.." +
                             std::to_string(m.dim - 1));
  if (order < 1 || order > 2)
    throw Error(kModule, "eigenstate_correction order must be 1 or 2");
  const double eps = spec.epsilon();
  Vector ket = Vector::Zero(m.dim);
  ket(index) = 1.0;
  Vector out = ket - eps * (m.xp.matrix - m.xm.matrix) * ket;
  if (order >= 2) {
    const auto& phi = m.phi;
    const Operator shell = m.diag_function([&](double x) { return phi(x) + phi(x + 1); });
    const Matrix second = m.xp.matrix * m.xp.matrix + m.xm.matrix * m.xm.matrix - shell.matrix;
    out += (0.5 * eps * eps) * second * ket;
  }
  return out / out.norm();
}

double AlgebraResiduals::max_interior() const { return std::max({raise, lower, ladder_interior}); }

AlgebraResiduals verify_algebra(const DeformedModule& module) {
  AlgebraResiduals r;
  r.raise = frobenius_norm(commutator(module.x3, module.xp) - module.xp);
  r.lower = frobenius_norm(commutator(module.x3, module.xm) + module.xm);
  const auto& phi = module.phi;
  const Operator p = module.diag_function([&](double x) { return phi(x) - phi(x + 1); });
  Matrix diff = commutator(module.xp, module.xm).matrix - p.matrix;
  const Eigen::Index top = module.dim - 1;
  r.top_defect = diff(top, top).real();
  diff(top, top) = 0;
  r.ladder_interior = diff.norm();
  r.expected_top_defect = module.top_defect();
  return r;
}

}  // namespace effham
