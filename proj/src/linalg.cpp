#include "effham/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "operator-core";
constexpr int kMaxSweeps = 100;

double tolerance_for(double scale) { return std::max(kRelativeTol * scale, kAbsoluteFloor); }

double offdiag_sq(const Matrix& a) {
  double s = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) s += std::norm(a(i, j));
  return s;
}

// One Jacobi rotation zeroing a(p, q); accumulates into v.
void rotate(Matrix& a, Matrix& v, Eigen::Index p, Eigen::Index q) {
  const cplx apq = a(p, q);
  const double mag = std::abs(apq);
  const cplx phase = apq / mag;  // e^{i phi}
  const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
  const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  // G = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on (p, q)
  const cplx gpp = c;
  const cplx gpq = s;
  const cplx gqp = -s * std::conj(phase);
  const cplx gqq = c * std::conj(phase);

  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx akp = a(k, p);
    const cplx akq = a(k, q);
    a(k, p) = akp * gpp + akq * gqp;
    a(k, q) = akp * gpq + akq * gqq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx apk = a(p, k);
    const cplx aqk = a(q, k);
    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
  }
  a(p, q) = 0;
  a(q, p) = 0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx vkp = v(k, p);
    const cplx vkq = v(k, q);
    v(k, p) = vkp * gpp + vkq * gqp;
    v(k, q) = vkp * gpq + vkq * gqq;
  }
}

}  // namespace

double frobenius_norm(const Operator& x) { return x.matrix.norm(); }

double hermiticity_residual(const Operator& x) { return (x.matrix - x.matrix.adjoint()).norm(); }

double antihermiticity_residual(const Operator& x) { return (x.matrix + x.matrix.adjoint()).norm(); }

double unitarity_residual(const Operator& u) {
  return (u.matrix.adjoint() * u.matrix - Matrix::Identity(u.dim(), u.dim())).norm();
}

EigenDecomposition hermitian_eig(const Operator& h) {
  const double scale = frobenius_norm(h);
  const double herm = hermiticity_residual(h);
  if (herm > tolerance_for(scale))
    throw Error(kModule, "hermitian_eig: input on " + h.basis_tag +
                             " is not Hermitian (||H - H^dag||_F = " + std::to_string(herm) + ")");
  const Eigen::Index n = h.dim();
  Matrix a = 0.5 * (h.matrix + h.matrix.adjoint());
  Matrix v = Matrix::Identity(n, n);

  const double target = std::max(1e-15 * scale, 1e-300);
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (std::sqrt(offdiag_sq(a)) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q)
        if (std::abs(a(p, q)) > 1e-18 * scale && std::abs(a(p, q)) > 1e-300) rotate(a, v, p, q);
  }
  if (sweep == kMaxSweeps && std::sqrt(offdiag_sq(a)) > 1e-12 * scale)
    throw Error(kModule, "hermitian_eig: Jacobi sweeps did not converge on " + h.basis_tag);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return a(x, x).real() < a(y, y).real();
  });
  EigenDecomposition out{RealVector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

Operator expm_antihermitian(const Operator& t) {
  const double scale = frobenius_norm(t);
  const double anti = antihermiticity_residual(t);
  if (anti > tolerance_for(scale))
    throw Error(kModule, "expm_antihermitian: generator on " + t.basis_tag +
                             " is not anti-Hermitian (||T + T^dag||_F = " + std::to_string(anti) +
                             ")");
  if (scale == 0.0) return {Matrix::Identity(t.dim(), t.dim()), t.basis_tag};
  const Operator h{cplx(0, 1) * t.matrix, t.basis_tag};
  const auto eig = hermitian_eig(h);
  Vector phases(eig.values.size());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) phases(k) = std::exp(cplx(0, -eig.values(k)));
  return {eig.vectors * phases.asDiagonal() * eig.vectors.adjoint(), t.basis_tag};
}

Operator conjugate(const Operator& u, const Operator& h) {
  require_same_basis(u, h, "conjugate");
  const double res = unitarity_residual(u);
  if (res > kRelativeTol * std::max(1.0, std::sqrt(static_cast<double>(u.dim()))))
    throw Error(kModule, "conjugate: rotation is not unitary (||U^dag U - I||_F = " +
                             std::to_string(res) + ")");
  return {u.matrix * h.matrix * u.matrix.adjoint(), h.basis_tag};
}

IndexBlocks degenerate_blocks(const RealVector& energies, double tol) {
  IndexBlocks blocks;
  const auto n = static_cast<std::size_t>(energies.size());
  if (n == 0) return blocks;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return energies(static_cast<Eigen::Index>(x)) < energies(static_cast<Eigen::Index>(y));
  });
  blocks.push_back({order[0]});
  for (std::size_t k = 1; k < n; ++k) {
    const double gap = energies(static_cast<Eigen::Index>(order[k])) -
                       energies(static_cast<Eigen::Index>(order[k - 1]));
    if (gap <= tol)
      blocks.back().push_back(order[k]);
    else
      blocks.push_back({order[k]});
  }
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  return blocks;
}

double offdiag_norm(const Operator& x, const IndexBlocks& blocks) {
  std::vector<std::size_t> label(static_cast<std::size_t>(x.dim()), 0);
  std::vector<bool> seen(label.size(), false);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (auto i : blocks[b]) {
      if (i >= label.size() || seen[i])
        throw Error(kModule, "offdiag_norm: block declaration is not a partition of the indices");
      label[i] = b;
      seen[i] = true;
    }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Error(kModule, "offdiag_norm: block declaration does not cover every index");
  double s = 0;
  for (Eigen::Index j = 0; j < x.dim(); ++j)
    for (Eigen::Index i = 0; i < x.dim(); ++i)
      if (label[static_cast<std::size_t>(i)] != label[static_cast<std::size_t>(j)])
        s += std::norm(x.matrix(i, j));
  return std::sqrt(s);
}

double offdiag_norm(const Operator& x, const RealVector& reference_energies, double tol) {
  return offdiag_norm(x, degenerate_blocks(reference_energies, tol));
}

double offdiag_norm(const Operator& x) { return std::sqrt(offdiag_sq(x.matrix)); }

}  // namespace effham
