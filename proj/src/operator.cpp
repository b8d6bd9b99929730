#include "effham/operator.hpp"

#include <cmath>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "operator-core";

void check_level(const StateSpace& space, int level) {
  if (level < 1 || level > space.levels())
    throw Error(kModule, "level index " + std::to_string(level) + " outside 1.." +
                             std::to_string(space.levels()));
}

}  // namespace

Operator::Operator(Matrix m, std::string tag) : matrix(std::move(m)), basis_tag(std::move(tag)) {
  if (matrix.rows() != matrix.cols())
    throw Error(kModule, "operator on " + basis_tag + " is not square");
}

Operator Operator::zero(const StateSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  return {Matrix::Zero(n, n), space.tag()};
}

Operator Operator::identity(const StateSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  return {Matrix::Identity(n, n), space.tag()};
}

Operator Operator::diagonal(const RealVector& values, std::string tag) {
  return {values.cast<cplx>().asDiagonal(), std::move(tag)};
}

void require_same_basis(const Operator& x, const Operator& y, const char* what) {
  if (x.basis_tag != y.basis_tag || x.dim() != y.dim())
    throw Error(kModule, std::string(what) + ": basis mismatch (" + x.basis_tag + " vs " +
                             y.basis_tag + ")");
}

Operator& Operator::operator+=(const Operator& o) {
  require_same_basis(*this, o, "operator+");
  matrix += o.matrix;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  require_same_basis(*this, o, "operator-");
  matrix -= o.matrix;
  return *this;
}

Operator operator+(Operator x, const Operator& y) { return x += y; }
Operator operator-(Operator x, const Operator& y) { return x -= y; }

Operator operator*(const Operator& x, const Operator& y) {
  require_same_basis(x, y, "operator*");
  return {x.matrix * y.matrix, x.basis_tag};
}

Operator operator*(cplx s, Operator x) { return x *= s; }
Operator operator*(double s, Operator x) { return x *= cplx(s); }

Operator commutator(const Operator& x, const Operator& y) {
  require_same_basis(x, y, "commutator");
  return {x.matrix * y.matrix - y.matrix * x.matrix, x.basis_tag};
}

Operator anticommutator(const Operator& x, const Operator& y) {
  require_same_basis(x, y, "anticommutator");
  return {x.matrix * y.matrix + y.matrix * x.matrix, x.basis_tag};
}

namespace actions {

Action lower_photons(int k) {
  return [k](const BasisState& s) -> std::optional<Amplitude> {
    if (s.photons < k) return std::nullopt;
    double amp = 1.0;
    for (int q = 0; q < k; ++q) amp *= std::sqrt(static_cast<double>(s.photons - q));
    BasisState t = s;
    t.photons -= k;
    return Amplitude{amp, std::move(t)};
  };
}

Action raise_photons(int k) {
  return [k](const BasisState& s) -> std::optional<Amplitude> {
    double amp = 1.0;
    for (int q = 1; q <= k; ++q) amp *= std::sqrt(static_cast<double>(s.photons + q));
    BasisState t = s;
    t.photons += k;
    return Amplitude{amp, std::move(t)};
  };
}

Action transition(int i, int j) {
  return [i, j](const BasisState& s) -> std::optional<Amplitude> {
    const auto& m = s.occupations;
    if (i < 1 || j < 1 || i > s.levels() || j > s.levels())
      throw Error(kModule, "transition S^{" + std::to_string(i) + std::to_string(j) +
                               "} outside the level range");
    if (i == j) {
      if (m[i - 1] == 0) return std::nullopt;
      return Amplitude{static_cast<double>(m[i - 1]), s};
    }
    if (m[j - 1] == 0) return std::nullopt;
    BasisState t = s;
    const double amp = std::sqrt(static_cast<double>((m[i - 1] + 1) * m[j - 1]));
    t.occupations[i - 1] += 1;
    t.occupations[j - 1] -= 1;
    return Amplitude{amp, std::move(t)};
  };
}

Action photon_function(std::function<double(int)> f) {
  return [f = std::move(f)](const BasisState& s) -> std::optional<Amplitude> {
    const double v = f(s.photons);
    if (v == 0.0) return std::nullopt;
    return Amplitude{v, s};
  };
}

Action compose(Action outer, Action inner) {
  return [outer = std::move(outer), inner = std::move(inner)](
             const BasisState& s) -> std::optional<Amplitude> {
    auto mid = inner(s);
    if (!mid) return std::nullopt;
    auto out = outer(mid->state);
    if (!out) return std::nullopt;
    out->value *= mid->value;
    return out;
  };
}

}  // namespace actions

Operator matrix_of(const StateSpace& space, const Action& action) {
  Operator op = Operator::zero(space);
  for (std::size_t col = 0; col < space.size(); ++col) {
    const auto image = action(space[col]);
    if (!image) continue;
    if (const auto row = space.find(image->state)) {
      op.matrix(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col)) += image->value;
    }
  }
  return op;
}

Operator annihilation_op(const StateSpace& space) { return matrix_of(space, actions::lower_photons(1)); }

Operator creation_op(const StateSpace& space) { return matrix_of(space, actions::raise_photons(1)); }

Operator number_op(const StateSpace& space) {
  return matrix_of(space, actions::photon_function([](int n) { return static_cast<double>(n); }));
}

Operator transition_op(const StateSpace& space, int i, int j) {
  check_level(space, i);
  check_level(space, j);
  return matrix_of(space, actions::transition(i, j));
}

Operator raising_op(const StateSpace& space, int i, int j) {
  if (i >= j) throw Error(kModule, "raising operator S_+^{ij} requires i < j");
  return transition_op(space, j, i);
}

Operator lowering_op(const StateSpace& space, int i, int j) {
  if (i >= j) throw Error(kModule, "lowering operator S_-^{ij} requires i < j");
  return transition_op(space, i, j);
}

Operator multiphoton_coupling(const StateSpace& space, int j, int k) {
  check_level(space, j);
  check_level(space, j + k);
  const Operator up = matrix_of(space, actions::compose(actions::lower_photons(k),
                                                        actions::transition(j + k, j)));
  return up + up.adjoint();
}

Operator excitation_op(const StateSpace& space) {
  RealVector v(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < space.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = excitation_number(space[i], space.levels()).value();
  return Operator::diagonal(v, space.tag());
}

}  // namespace effham
