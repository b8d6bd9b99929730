#pragma once

// Cascade N-level atoms (A identical atoms, symmetric representation)
// coupled to one field mode:
//
//   H = w_f a^dag a + sum_j w_j S^{jj} + sum_j g_j (a S_+^{j,j+1} + h.c.)
//     = w_f Nhat + w A + h0 + V,      h0 = sum_j Delta_j S^{jj},
//
// with detunings Delta_j = w_j - w_1 - (j - 1) w_f. Eliminating the
// one-photon couplings with T1 = sum_j alpha_j (a S_+^{j,j+1} - h.c.),
// alpha_j = g_j / (Delta_{j+1} - Delta_j), generates k-photon couplings with
// strengths psi_j^(k) from the recurrence
//
//   psi_j^(k+1) = alpha_{j+k} psi_j^(k) - alpha_j psi_{j+1}^(k),  psi_j^(1) = g_j.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "effham/basis.hpp"
#include "effham/operator.hpp"

namespace effham {

struct CascadeModel {
  int levels = 0;
  int atoms = 1;
  double omega_f = 1.0;  // field frequency
  double omega1 = 0.0;   // frequency of level 1
  std::vector<double> detunings;  // Delta_1..Delta_N, Delta_1 = 0
  std::vector<double> couplings;  // g_1..g_{N-1}
  HalfInteger max_excitation = HalfInteger::from_int(0);

  static CascadeModel from_detunings(int levels, int atoms, std::vector<double> detunings,
                                     std::vector<double> couplings, HalfInteger max_excitation,
                                     double omega_f = 1.0, double omega1 = 0.0);
  /// Level frequencies must be strictly increasing (cascade ordering).
  static CascadeModel from_frequencies(int levels, int atoms, double omega_f,
                                       const std::vector<double>& level_frequencies,
                                       std::vector<double> couplings, HalfInteger max_excitation);

  double delta(int j) const { return detunings.at(static_cast<std::size_t>(j - 1)); }
  double g(int j) const { return couplings.at(static_cast<std::size_t>(j - 1)); }
  std::vector<double> level_frequencies() const;
  /// (w_N + w_1) / 2
  double mean_frequency() const;
};

/// Throws on inconsistent sizes, non-finite values or Delta_1 != 0.
void validate(const CascadeModel& model);

/// Delta_j = w_j - w_1 - (j - 1) w_f.
std::vector<double> detunings(double omega_f, const std::vector<double>& level_frequencies);
std::vector<double> detunings(const CascadeModel& model);

/// Throws unless Delta_N = 0 ((N-1)-photon resonance).
void require_resonance(const CascadeModel& model, double tol = 1e-12);

/// Sum_j Delta_j S^{jj}.
Operator reference_h0(const CascadeModel& model, const StateSpace& space);
/// Sum_j g_j (a S_+^{j,j+1} + h.c.).
Operator coupling_v(const CascadeModel& model, const StateSpace& space);
/// H_int = h0 + V, or the full Hamiltonian with the free part when requested.
Operator build_full_h(const CascadeModel& model, const StateSpace& space, bool include_free_part = false);
Operator build_full_h(const CascadeModel& model, const FullBasis& basis, bool include_free_part = false);

struct SmallnessPolicy {
  double warn = 0.2;  // |alpha| above this is recorded as a warning
  double fail = 0.5;  // |alpha| above this is an error
};

/// alpha_j^(1), j = 1..N-1. Throws on one-photon resonance or |alpha| > fail.
std::vector<double> alpha1(const CascadeModel& model, const SmallnessPolicy& policy = {},
                           std::vector<std::string>* warnings = nullptr);

/// psi[k-1][j-1] = psi_j^(k) for k = 1..N-1, j = 1..N-k.
std::vector<std::vector<double>> psi_ladder(const CascadeModel& model, const SmallnessPolicy& policy = {});

/// alpha_j^(2) = psi_j^(2) / (Delta_{j+2} - Delta_j), j = 1..N-2. Throws on
/// two-photon resonance.
std::vector<double> alpha2(const CascadeModel& model, const SmallnessPolicy& policy = {});

/// beta_ij = alpha_i g_j / (Delta_{i+1} - Delta_i + Delta_j - Delta_{j+1}),
/// i != j in 1..N-1; the diagonal is NaN. Throws on a vanishing denominator.
Eigen::MatrixXd beta(const CascadeModel& model, const SmallnessPolicy& policy = {});

struct CouplingLadder {
  std::vector<double> alpha1;
  std::vector<std::vector<double>> psi;
  std::vector<double> alpha2;  // NaN where the denominator vanishes
  Eigen::MatrixXd beta;        // NaN on the diagonal and where denominators vanish
  std::vector<std::string> warnings;

  double psi_at(int j, int k) const;
};

/// All constants at once; resonant alpha2/beta entries become NaN instead of throwing.
CouplingLadder coupling_ladder(const CascadeModel& model, const SmallnessPolicy& policy = {});

/// T1 = sum_j alpha_j (a S_+^{j,j+1} - a^dag S_-^{j,j+1}); [T1, h0] = -V.
Operator t1_generator(const CascadeModel& model, const StateSpace& space);

/// How the diagonal Stark terms are normalized in the closed forms.
///  - consistent: matches the diagonal of exp(T1) H_int exp(-T1) through
///    first order in alpha, i.e. the inversion inside h_diag is the full
///    population difference S^{j+1,j+1} - S^{jj}.
///  - quoted: the closed forms as commonly quoted; h_diag uses the half
///    difference (S^{j+1,j+1} - S^{jj}) / 2, the three-photon Stark terms
///    carry (n - 1/2) and (n + 3/2), and the two-photon form has the
///    opposite overall sign.
enum class StarkConvention { consistent, quoted };

/// h_diag = 1/2 sum_j g_j alpha_j [Z_j (2 a^dag a + 1) + {S_+^{j,j+1}, S_-^{j,j+1}}],
/// Z_j per the convention above.
Operator h_diag_first(const CascadeModel& model, const StateSpace& space,
                      StarkConvention convention = StarkConvention::consistent);

/// 1/2 sum_{i != j} alpha_i g_j (S_+^{i,i+1} S_-^{j,j+1} + S_+^{j,j+1} S_-^{i,i+1}).
Operator h_nondiag_first(const CascadeModel& model, const StateSpace& space);

/// Mask of states with no population in any of `levels`.
std::vector<bool> empty_levels_mask(const StateSpace& space, const std::vector<int>& levels);
/// Zeroes the rows and columns of states outside `mask`.
Operator project(const Operator& op, const std::vector<bool>& mask);

/// N = 3, Delta_3 = 0. With `assume_level2_empty` the operator is the
/// reduced two-photon Hamiltonian
///   s [ (g1 g2/D2)(a^2 S_+^{13} + h.c.) + (S_z^{13} + A/2)(((g2^2 - g1^2)/D2) n + g2^2/D2)
///       + A (g1^2/D2) n ]
/// projected onto m_2 = 0, with s = -1 (consistent) or +1 (quoted).
/// Otherwise it is h0 + h_diag + (psi_1^(2)/2)(a^2 S_+^{13} + h.c.).
Operator effective_two_photon(const CascadeModel& model, const StateSpace& space,
                              bool assume_level2_empty = true,
                              StarkConvention convention = StarkConvention::consistent);

/// N = 4, Delta_4 = 0, no one- or two-photon resonance; projected onto
/// m_2 = m_3 = 0:
///   (psi_1^(3)/3)(a^3 S_+^{14} + h.c.) + Stark terms
/// consistent: -[alpha_1 g_1 n S^{11} - alpha_3 g_3 (n + 1) S^{44}]
/// quoted:     -1/2 [alpha_1 g_1 (n - 1/2) S^{11} - alpha_3 g_3 (n + 3/2) S^{44}]
/// `keep_order3_terms` adds the 1/Delta^3 corrections
///   -1/4 [alpha_1^(2) psi_1^(2) n (n-1) S^{11} - alpha_2^(2) psi_2^(2) (n+1)(n+2) S^{44}]
/// and an S^{11} S^{44} collective shift: -(c^2 / (D2 + D3)), c = (alpha_1 g_3 + alpha_3 g_1)/2
/// (consistent) or -beta_31 / 2 (quoted). Other fourth-order one-photon
/// shifts of the same order are not included.
Operator effective_three_photon(const CascadeModel& model, const StateSpace& space,
                                bool keep_order3_terms = false,
                                StarkConvention convention = StarkConvention::consistent);

/// T2^(1) = 1/2 sum_j alpha_j^(2) (a^2 S_+^{j,j+2} - h.c.) and the
/// anti-Hermitian T2^(2) = 1/2 sum_{i != j} beta_ij (X_ij - X_ij^dag),
/// X_ij = S_+^{i,i+1} S_-^{j,j+1}.
std::pair<Operator, Operator> t2_generators(const CascadeModel& model, const StateSpace& space);

/// Leading-order coupling of the resonant pair (n, level 1) <-> (n - k, level N),
/// k = N - 1, for A = 1: ((k - 1)/k!) psi_1^(k) sqrt(n (n-1) ... (n-k+1)).
double resonant_pair_coupling(const CascadeModel& model, int photons);

}  // namespace effham
