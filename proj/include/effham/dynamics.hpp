#pragma once

// Time evolution through the spectral decomposition of a Hermitian H,
// comparison of exact and effective dynamics, and order-of-error fits.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "effham/basis.hpp"
#include "effham/linalg.hpp"

namespace effham {

struct TimeGrid {
  std::vector<double> times;

  /// `points` equally spaced times on [0, t_end].
  static TimeGrid uniform(double t_end, int points);
  /// Throws unless strictly ascending and nonnegative.
  void validate() const;
};

/// psi(t) = Q exp(-i Lambda t) Q^dag psi0 for a fixed H.
class Propagator {
 public:
  explicit Propagator(const Operator& h);
  Vector at(const Vector& psi0, double t) const;
  const EigenDecomposition& spectrum() const { return eig_; }
  const std::string& basis_tag() const { return tag_; }

 private:
  EigenDecomposition eig_;
  std::string tag_;
};

/// Throws when psi0 is not normalized (1e-10) or has the wrong dimension.
std::vector<Vector> evolve(const Operator& h, const Vector& psi0, const TimeGrid& grid);

/// Normalized basis vector for `state` in `space`.
Vector basis_vector(const StateSpace& space, const BasisState& state);

struct FidelityOptions {
  /// U with H_eff ~ U H_exact U^dag on the effective subspace; the exact
  /// state is compared as U psi_exact(t).
  std::optional<Operator> rotation;
  /// States kept by the effective model. The effective initial state and the
  /// comparison state are projected onto it and renormalized.
  std::optional<std::vector<bool>> subspace;
  /// Skip the rotation and the projection of the exact state.
  bool bare = false;
};

struct FidelityReport {
  std::vector<double> times;
  std::vector<double> fidelity;
  double min_fidelity = 1;
  /// Smallest weight of the (rotated) exact state inside the subspace.
  double min_subspace_weight = 1;
};

/// F(t) = |<ref(t)|psi_eff(t)>|^2, see FidelityOptions for ref(t) and psi_eff(0).
FidelityReport fidelity_series(const Operator& h_exact, const Operator& h_eff, const Vector& psi0,
                               const TimeGrid& grid, const FidelityOptions& options = {});

struct ObservableSample {
  double photons = 0;
  std::vector<double> populations;  // <S^{jj}>, j = 1..N
  double inversion = 0;             // <S_z^{1N}> = (<S^{NN}> - <S^{11}>)/2
  double excitation = 0;            // <Nhat>
};

std::vector<ObservableSample> observables(const std::vector<Vector>& states, const StateSpace& space);

struct EigenvalueComparison {
  std::vector<double> effective;  // ascending
  std::vector<double> exact;      // paired with `effective`
  std::vector<double> overlap;    // |<exact|eff>|^2 of each pair
  std::vector<double> abs_error;
  double max_error = 0;
  double rms_error = 0;
  bool pairing_ok = true;
  std::string diagnostic;
};

/// Pairs each eigenvector of H_eff (restricted to `subspace` when given)
/// with the exact eigenvector of largest overlap, greedily by overlap.
/// Pairs with overlap below 0.5 mark the comparison as failed.
EigenvalueComparison eigenvalue_compare(const Operator& h_exact, const Operator& h_eff,
                                        const std::optional<std::vector<bool>>& subspace = std::nullopt,
                                        const std::optional<Operator>& rotation = std::nullopt);

struct ScalingStudy {
  std::vector<double> epsilons;  // descending
  std::vector<double> errors;
  double fitted_exponent = 0;  // least-squares slope of log error vs log eps
  double residual_rms = 0;
  bool flagged = false;        // |slope| < 0.5: the error does not shrink with eps
};

/// Least-squares slope and residual RMS of log y against log x.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Evaluates `error_metric` on each eps (>= 3 values, positive, descending).
ScalingStudy scaling_study(const std::vector<double>& epsilons,
                           const std::function<double(double)>& error_metric);

/// Angular frequency in (0, omega_max] maximizing the periodogram of a
/// uniformly sampled real signal, refined by golden-section search.
double dominant_frequency(const std::vector<double>& times, const std::vector<double>& signal,
                          double omega_max);

}  // namespace effham
