#pragma once

// Dense operators on a StateSpace and the elementary field/atom actions they
// are assembled from.
//
// Atomic transition operators follow S^{ij} = sum over atoms |i><j|: S^{ij}
// moves one atom from level j to level i. The cascade raising operator
// S_+^{ij} (i < j) promotes an atom from i to j and is therefore S^{ji};
// S_-^{ij} is its adjoint. Levels are 1-based throughout.

#include <complex>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "effham/basis.hpp"

namespace effham {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Dense complex square matrix bound to the space it acts on.
struct Operator {
  Matrix matrix;
  std::string basis_tag;

  Operator() = default;
  Operator(Matrix m, std::string tag);

  static Operator zero(const StateSpace& space);
  static Operator identity(const StateSpace& space);
  static Operator diagonal(const RealVector& values, std::string tag);

  Eigen::Index dim() const { return matrix.rows(); }
  Operator adjoint() const { return {matrix.adjoint(), basis_tag}; }
  RealVector real_diagonal() const { return matrix.diagonal().real(); }

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s) {
    matrix *= s;
    return *this;
  }
};

/// Throws unless both operators act on the same space.
void require_same_basis(const Operator& x, const Operator& y, const char* what);

Operator operator+(Operator x, const Operator& y);
Operator operator-(Operator x, const Operator& y);
Operator operator*(const Operator& x, const Operator& y);
Operator operator*(cplx s, Operator x);
Operator operator*(double s, Operator x);

/// XY - YX.
Operator commutator(const Operator& x, const Operator& y);
/// XY + YX.
Operator anticommutator(const Operator& x, const Operator& y);

/// Result of applying an elementary action to a basis state.
struct Amplitude {
  double value;
  BasisState state;
};

/// Maps a basis state to a single basis state with a real amplitude, or to
/// zero. All field and atom ladder operators here are of this form.
using Action = std::function<std::optional<Amplitude>(const BasisState&)>;

namespace actions {

/// a^k
Action lower_photons(int k = 1);
/// (a^dag)^k
Action raise_photons(int k = 1);
/// S^{ij}: level j -> level i with amplitude sqrt((m_i + 1) m_j); S^{ii} = m_i.
Action transition(int i, int j);
/// Diagonal f(n) in the photon number.
Action photon_function(std::function<double(int)> f);
/// `outer` applied after `inner`.
Action compose(Action outer, Action inner);

}  // namespace actions

/// Matrix of an action on `space`. Images that fall outside the space are
/// dropped, so only actions that keep the space invariant are exact.
Operator matrix_of(const StateSpace& space, const Action& action);

Operator annihilation_op(const StateSpace& space);
Operator creation_op(const StateSpace& space);
Operator number_op(const StateSpace& space);
/// S^{ij} (j -> i). Throws when a level index is out of range.
Operator transition_op(const StateSpace& space, int i, int j);
/// S_+^{ij}, i < j.
Operator raising_op(const StateSpace& space, int i, int j);
/// S_-^{ij} = (S_+^{ij})^dag, i < j.
Operator lowering_op(const StateSpace& space, int i, int j);
/// a^k S_+^{j,j+k} + h.c., built state by state so it is exact on any sector.
Operator multiphoton_coupling(const StateSpace& space, int j, int k);
/// The conserved excitation number Nhat as a diagonal operator.
Operator excitation_op(const StateSpace& space);

}  // namespace effham
