#include "effham/multilevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "multilevel";
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double detuning_scale(const CascadeModel& m) {
  double s = 1.0;
  for (double d : m.detunings) s = std::max(s, std::abs(d));
  return s;
}

bool vanishes(double denominator, const CascadeModel& m) {
  return std::abs(denominator) <= 1e-12 * detuning_scale(m);
}

void require_space(const CascadeModel& m, const StateSpace& space, const char* what) {
  if (space.levels() != m.levels || space.atoms() != m.atoms) {
    std::ostringstream os;
    os << what << ": model (N=" << m.levels << ", A=" << m.atoms << ") does not match basis "
       << space.tag();
    throw Error(kModule, os.str());
  }
}

void require_levels(const CascadeModel& m, int levels, const char* what) {
  if (m.levels != levels)
    throw Error(kModule, std::string(what) + " needs N = " + std::to_string(levels) + " (got N = " +
                             std::to_string(m.levels) + ")");
}

Operator diagonal_of(const StateSpace& space, const std::function<double(const BasisState&)>& f) {
  RealVector v(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < space.size(); ++i) v(static_cast<Eigen::Index>(i)) = f(space[i]);
  return Operator::diagonal(v, space.tag());
}

int occ(const BasisState& s, int level) { return s.occupations[static_cast<std::size_t>(level - 1)]; }

// X - X^dag for a single-valued action X.
Operator antisymmetrized(const StateSpace& space, const Action& x) {
  const Operator m = matrix_of(space, x);
  return m - m.adjoint();
}

// S_+^{j,j+k} a^k, built state by state.
Action photon_assisted_raise(int j, int k) {
  return actions::compose(actions::transition(j + k, j), actions::lower_photons(k));
}

// S_+^{i,i+1} S_-^{j,j+1}
Action exchange(int i, int j) {
  return actions::compose(actions::transition(i + 1, i), actions::transition(j, j + 1));
}

}  // namespace

CascadeModel CascadeModel::from_detunings(int levels, int atoms, std::vector<double> detunings,
                                          std::vector<double> couplings, HalfInteger max_excitation,
                                          double omega_f, double omega1) {
  CascadeModel m;
  m.levels = levels;
  m.atoms = atoms;
  m.omega_f = omega_f;
  m.omega1 = omega1;
  m.detunings = std::move(detunings);
  m.couplings = std::move(couplings);
  m.max_excitation = max_excitation;
  validate(m);
  return m;
}

CascadeModel CascadeModel::from_frequencies(int levels, int atoms, double omega_f,
                                            const std::vector<double>& level_frequencies,
                                            std::vector<double> couplings, HalfInteger max_excitation) {
  for (std::size_t j = 1; j < level_frequencies.size(); ++j)
    if (!(level_frequencies[j] > level_frequencies[j - 1]))
      throw Error(kModule, "level frequencies must increase strictly (cascade ordering), violated at level " +
                               std::to_string(j + 1));
  if (level_frequencies.empty()) throw Error(kModule, "no level frequencies given");
  return from_detunings(levels, atoms, effham::detunings(omega_f, level_frequencies), std::move(couplings),
                        max_excitation, omega_f, level_frequencies.front());
}

std::vector<double> CascadeModel::level_frequencies() const {
  std::vector<double> w(detunings.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = omega1 + detunings[j] + static_cast<double>(j) * omega_f;
  return w;
}

double CascadeModel::mean_frequency() const {
  const auto w = level_frequencies();
  return 0.5 * (w.front() + w.back());
}

void validate(const CascadeModel& m) {
  if (m.levels < 2) throw Error(kModule, "need at least 2 levels");
  if (m.atoms < 1) throw Error(kModule, "need at least one atom");
  if (m.detunings.size() != static_cast<std::size_t>(m.levels))
    throw Error(kModule, "expected " + std::to_string(m.levels) + " detunings, got " +
                             std::to_string(m.detunings.size()));
  if (m.couplings.size() != static_cast<std::size_t>(m.levels - 1))
    throw Error(kModule, "g: expected " + std::to_string(m.levels - 1) + " couplings, got " +
                             std::to_string(m.couplings.size()));
  for (double d : m.detunings)
    if (!std::isfinite(d)) throw Error(kModule, "non-finite detuning");
  for (double g : m.couplings)
    if (!std::isfinite(g)) throw Error(kModule, "non-finite coupling");
  if (!std::isfinite(m.omega_f) || !std::isfinite(m.omega1)) throw Error(kModule, "non-finite frequency");
  if (m.detunings.front() != 0.0)
    throw Error(kModule, "Delta_1 must be 0 (got " + std::to_string(m.detunings.front()) + ")");
}

std::vector<double> detunings(double omega_f, const std::vector<double>& level_frequencies) {
  std::vector<double> d(level_frequencies.size());
  for (std::size_t j = 0; j < d.size(); ++j)
    d[j] = level_frequencies[j] - level_frequencies.front() - static_cast<double>(j) * omega_f;
  return d;
}

std::vector<double> detunings(const CascadeModel& model) {
  validate(model);
  return model.detunings;
}

void require_resonance(const CascadeModel& model, double tol) {
  validate(model);
  const double dn = model.detunings.back();
  if (std::abs(dn) > tol) {
    std::ostringstream os;
    os << "Delta_" << model.levels << " = " << dn << " but the " << model.levels - 1
       << "-photon resonance requires Delta_" << model.levels << " = 0";
    throw Error(kModule, os.str());
  }
}

Operator reference_h0(const CascadeModel& model, const StateSpace& space) {
  validate(model);
  require_space(model, space, "reference_h0");
  return diagonal_of(space, [&](const BasisState& s) {
    double e = 0;
    for (int j = 1; j <= model.levels; ++j) e += model.delta(j) * occ(s, j);
    return e;
  });
}

Operator coupling_v(const CascadeModel& model, const StateSpace& space) {
  validate(model);
  require_space(model, space, "coupling_v");
  Operator v = Operator::zero(space);
  for (int j = 1; j < model.levels; ++j) v += model.g(j) * multiphoton_coupling(space, j, 1);
  return v;
}

Operator build_full_h(const CascadeModel& model, const StateSpace& space, bool include_free_part) {
  Operator h = reference_h0(model, space) + coupling_v(model, space);
  if (include_free_part) {
    const auto w = model.level_frequencies();
    // w_f a^dag a + sum_j w_j S^{jj} replaces h0 = sum_j Delta_j S^{jj}
    h += diagonal_of(space, [&](const BasisState& s) {
      double e = model.omega_f * s.photons;
      for (int j = 1; j <= model.levels; ++j) e += (w[static_cast<std::size_t>(j - 1)] - model.delta(j)) * occ(s, j);
      return e;
    });
  }
  return h;
}

Operator build_full_h(const CascadeModel& model, const FullBasis& basis, bool include_free_part) {
  if (basis.levels() != model.levels || basis.atoms() != model.atoms)
    throw Error(kModule, "build_full_h: basis " + basis.space().tag() + " does not match the model");
  return build_full_h(model, basis.space(), include_free_part);
}

std::vector<double> alpha1(const CascadeModel& model, const SmallnessPolicy& policy,
                           std::vector<std::string>* warnings) {
  validate(model);
  std::vector<double> a(static_cast<std::size_t>(model.levels - 1));
  for (int j = 1; j < model.levels; ++j) {
    const double den = model.delta(j + 1) - model.delta(j);
    if (vanishes(den, model))
      throw Error(kModule, "one-photon resonance between levels " + std::to_string(j) + " and " +
                               std::to_string(j + 1) + " (Delta_" + std::to_string(j + 1) +
                               " = Delta_" + std::to_string(j) + ")");
    const double v = model.g(j) / den;
    std::ostringstream os;
    os << "|alpha_" << j << "| = " << std::abs(v);
    if (std::abs(v) > policy.fail) throw Error(kModule, os.str() + " exceeds the smallness limit " + std::to_string(policy.fail));
    if (std::abs(v) > policy.warn && warnings) warnings->push_back(os.str() + " is not small");
    a[static_cast<std::size_t>(j - 1)] = v;
  }
  return a;
}

std::vector<std::vector<double>> psi_ladder(const CascadeModel& model, const SmallnessPolicy& policy) {
  const auto a = alpha1(model, policy);
  const int n = model.levels;
  std::vector<std::vector<double>> psi;
  psi.push_back(model.couplings);
  for (int k = 1; k < n - 1; ++k) {
    const auto& prev = psi.back();
    std::vector<double> next(static_cast<std::size_t>(n - k - 1));
    for (int j = 1; j <= n - k - 1; ++j) {
      const auto jj = static_cast<std::size_t>(j - 1);
      next[jj] = a[jj + static_cast<std::size_t>(k)] * prev[jj] - a[jj] * prev[jj + 1];
    }
    psi.push_back(std::move(next));
  }
  return psi;
}

std::vector<double> alpha2(const CascadeModel& model, const SmallnessPolicy& policy) {
  const auto psi = psi_ladder(model, policy);
  std::vector<double> out;
  if (model.levels < 3) return out;
  for (int j = 1; j <= model.levels - 2; ++j) {
    const double den = model.delta(j + 2) - model.delta(j);
    if (vanishes(den, model))
      throw Error(kModule, "two-photon resonance between levels " + std::to_string(j) + " and " +
                               std::to_string(j + 2));
    out.push_back(psi[1][static_cast<std::size_t>(j - 1)] / den);
  }
  return out;
}

Eigen::MatrixXd beta(const CascadeModel& model, const SmallnessPolicy& policy) {
  const auto a = alpha1(model, policy);
  const int m = model.levels - 1;
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(m, m, kNaN);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) {
      if (i == j) continue;
      const double den = model.delta(i + 1) - model.delta(i) + model.delta(j) - model.delta(j + 1);
      if (vanishes(den, model))
        throw Error(kModule, "beta_" + std::to_string(i) + std::to_string(j) + ": vanishing denominator");
      b(i - 1, j - 1) = a[static_cast<std::size_t>(i - 1)] * model.g(j) / den;
    }
  return b;
}

double CouplingLadder::psi_at(int j, int k) const {
  if (k < 1 || k > static_cast<int>(psi.size())) throw Error(kModule, "psi order " + std::to_string(k) + " out of range");
  const auto& row = psi[static_cast<std::size_t>(k - 1)];
  if (j < 1 || j > static_cast<int>(row.size()))
    throw Error(kModule, "psi_" + std::to_string(j) + "^(" + std::to_string(k) + ") out of range");
  return row[static_cast<std::size_t>(j - 1)];
}

CouplingLadder coupling_ladder(const CascadeModel& model, const SmallnessPolicy& policy) {
  CouplingLadder c;
  c.alpha1 = alpha1(model, policy, &c.warnings);
  c.psi = psi_ladder(model, policy);
  for (int j = 1; j <= model.levels - 2; ++j) {
    const double den = model.delta(j + 2) - model.delta(j);
    c.alpha2.push_back(vanishes(den, model) ? kNaN : c.psi[1][static_cast<std::size_t>(j - 1)] / den);
  }
  const int m = model.levels - 1;
  c.beta = Eigen::MatrixXd::Constant(m, m, kNaN);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) {
      const double den = model.delta(i + 1) - model.delta(i) + model.delta(j) - model.delta(j + 1);
      if (i != j && !vanishes(den, model))
        c.beta(i - 1, j - 1) = c.alpha1[static_cast<std::size_t>(i - 1)] * model.g(j) / den;
    }
  return c;
}

Operator t1_generator(const CascadeModel& model, const StateSpace& space) {
  require_space(model, space, "t1_generator");
  const auto a = alpha1(model);
  Operator t = Operator::zero(space);
  for (int j = 1; j < model.levels; ++j)
    t += a[static_cast<std::size_t>(j - 1)] * antisymmetrized(space, photon_assisted_raise(j, 1));
  return t;
}

Operator h_diag_first(const CascadeModel& model, const StateSpace& space, StarkConvention convention) {
  require_space(model, space, "h_diag_first");
  const auto a = alpha1(model);
  const double z_scale = convention == StarkConvention::consistent ? 1.0 : 0.5;
  return diagonal_of(space, [&](const BasisState& s) {
    double e = 0;
    for (int j = 1; j < model.levels; ++j) {
      const int mj = occ(s, j), mk = occ(s, j + 1);
      const double z = z_scale * (mk - mj);
      // {S_+, S_-} = S^{j+1,j} S^{j,j+1} + S^{j,j+1} S^{j+1,j}
      const double anti = static_cast<double>(mk * (mj + 1) + mj * (mk + 1));
      e += 0.5 * model.g(j) * a[static_cast<std::size_t>(j - 1)] * (z * (2.0 * s.photons + 1.0) + anti);
    }
    return e;
  });
}

Operator h_nondiag_first(const CascadeModel& model, const StateSpace& space) {
  require_space(model, space, "h_nondiag_first");
  const auto a = alpha1(model);
  Operator h = Operator::zero(space);
  for (int i = 1; i < model.levels; ++i)
    for (int j = 1; j < model.levels; ++j) {
      if (i == j) continue;
      const Operator x = matrix_of(space, exchange(i, j));
      h += (0.5 * a[static_cast<std::size_t>(i - 1)] * model.g(j)) * (x + x.adjoint());
    }
  return h;
}

std::vector<bool> empty_levels_mask(const StateSpace& space, const std::vector<int>& levels) {
  for (int l : levels)
    if (l < 1 || l > space.levels()) throw Error(kModule, "level " + std::to_string(l) + " out of range");
  std::vector<bool> mask(space.size(), true);
  for (std::size_t i = 0; i < space.size(); ++i)
    for (int l : levels)
      if (occ(space[i], l) != 0) mask[i] = false;
  return mask;
}

Operator project(const Operator& op, const std::vector<bool>& mask) {
  if (mask.size() != static_cast<std::size_t>(op.dim()))
    throw Error(kModule, "projection mask size does not match " + op.basis_tag);
  Operator out = op;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) {
      const auto k = static_cast<Eigen::Index>(i);
      out.matrix.row(k).setZero();
      out.matrix.col(k).setZero();
    }
  return out;
}

Operator effective_two_photon(const CascadeModel& model, const StateSpace& space, bool assume_level2_empty,
                              StarkConvention convention) {
  require_levels(model, 3, "effective_two_photon");
  require_resonance(model);
  require_space(model, space, "effective_two_photon");
  const auto psi = psi_ladder(model);
  if (!assume_level2_empty)
    return reference_h0(model, space) + h_diag_first(model, space, convention) +
           (0.5 * psi[1][0]) * multiphoton_coupling(space, 1, 2);

  const double g1 = model.g(1), g2 = model.g(2), d2 = model.delta(2);
  const double s = convention == StarkConvention::consistent ? -1.0 : 1.0;
  const double a = model.atoms;
  Operator h = (g1 * g2 / d2) * multiphoton_coupling(space, 1, 2);
  h += diagonal_of(space, [&](const BasisState& st) {
    const double sz = 0.5 * (occ(st, 3) - occ(st, 1));
    const double n = st.photons;
    return (sz + a / 2) * (((g2 * g2 - g1 * g1) / d2) * n + g2 * g2 / d2) + a * (g1 * g1 / d2) * n;
  });
  return project(s * h, empty_levels_mask(space, {2}));
}

Operator effective_three_photon(const CascadeModel& model, const StateSpace& space, bool keep_order3_terms,
                                StarkConvention convention) {
  require_levels(model, 4, "effective_three_photon");
  require_resonance(model);
  require_space(model, space, "effective_three_photon");
  const auto a1 = alpha1(model);
  const auto psi = psi_ladder(model);
  const auto a2 = alpha2(model);
  const Eigen::MatrixXd b = beta(model);
  const double x = a1[0] * model.g(1);   // g1^2 / D2
  const double y = -a1[2] * model.g(3);  // g3^2 / D3
  const bool consistent = convention == StarkConvention::consistent;

  Operator h = (psi[2][0] / 3.0) * multiphoton_coupling(space, 1, 3);
  h += diagonal_of(space, [&](const BasisState& st) {
    const double n = st.photons;
    const double m1 = occ(st, 1), m4 = occ(st, 4);
    double e = consistent ? -(x * n * m1 + y * (n + 1) * m4)
                          : -0.5 * (x * (n - 0.5) * m1 + y * (n + 1.5) * m4);
    if (keep_order3_terms) {
      // Level shifts from the two-photon couplings removed by T2^(1).
      e -= 0.25 * (a2[0] * psi[1][0] * n * (n - 1) * m1 - a2[1] * psi[1][1] * (n + 1) * (n + 2) * m4);
      if (consistent) {
        // Second-order shift of the 1+4 -> 2+3 atom exchange left by h_nondiag.
        const double c = 0.5 * (a1[0] * model.g(3) + a1[2] * model.g(1));
        e -= c * c / (model.delta(2) + model.delta(3)) * m1 * m4;
      } else {
        e -= 0.5 * b(2, 0) * m1 * m4;
      }
    }
    return e;
  });
  return project(h, empty_levels_mask(space, {2, 3}));
}

std::pair<Operator, Operator> t2_generators(const CascadeModel& model, const StateSpace& space) {
  require_space(model, space, "t2_generators");
  Operator t21 = Operator::zero(space);
  Operator t22 = Operator::zero(space);
  if (model.levels < 3) return {t21, t22};
  const auto a2 = alpha2(model);
  for (int j = 1; j <= model.levels - 2; ++j)
    t21 += (0.5 * a2[static_cast<std::size_t>(j - 1)]) * antisymmetrized(space, photon_assisted_raise(j, 2));
  const Eigen::MatrixXd b = beta(model);
  for (int i = 1; i < model.levels; ++i)
    for (int j = 1; j < model.levels; ++j)
      if (i != j) t22 += (0.5 * b(i - 1, j - 1)) * antisymmetrized(space, exchange(i, j));
  return {t21, t22};
}

double resonant_pair_coupling(const CascadeModel& model, int photons) {
  validate(model);
  const int k = model.levels - 1;
  if (k < 2) throw Error(kModule, "resonant_pair_coupling needs N >= 3");
  if (photons < k) return 0.0;
  const auto psi = psi_ladder(model);
  double fact = 1, bosonic = 1;
  for (int i = 0; i < k; ++i) {
    fact *= i + 1;
    bosonic *= photons - i;
  }
  return (k - 1) / fact * psi[static_cast<std::size_t>(k - 1)][0] * std::sqrt(bosonic);
}

}  // namespace effham
