#include "effham/lie_transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "lie-transform";

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cplx(0)) return false;
  return true;
}

std::vector<std::size_t> block_labels(const IndexBlocks& blocks, std::size_t n) {
  std::vector<std::size_t> label(n, 0);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (auto i : blocks[b]) label[i] = b;
  return label;
}

IndexBlocks nontrivial(const IndexBlocks& blocks) {
  IndexBlocks out;
  for (const auto& b : blocks)
    if (b.size() > 1) out.push_back(b);
  return out;
}

}  // namespace

double default_resonance_tol(const RealVector& reference) {
  const double scale = reference.size() ? reference.cwiseAbs().maxCoeff() : 0.0;
  return std::max(1e-6 * scale, 1e-12);
}

SplitHamiltonian split(const Operator& h, const Operator& reference, std::optional<double> resonance_tol) {
  require_same_basis(h, reference, "split");
  if (!is_diagonal(reference.matrix))
    throw Error(kModule, "split: diagonal reference on " + reference.basis_tag + " is not diagonal");
  if (reference.matrix.diagonal().imag().cwiseAbs().maxCoeff() > 0)
    throw Error(kModule, "split: diagonal reference has complex entries");
  const double tol = resonance_tol.value_or(default_resonance_tol(reference.real_diagonal()));
  if (!(tol >= 0)) throw Error(kModule, "split: resonance tolerance must be nonnegative");
  return {reference, h - reference, tol};
}

GeneratorStep solve_generator(const SplitHamiltonian& sh, int order) {
  const RealVector e = sh.h0.real_diagonal();
  const auto n = static_cast<std::size_t>(e.size());
  const IndexBlocks blocks = degenerate_blocks(e, sh.resonance_tol);
  const auto label = block_labels(blocks, n);

  GeneratorStep gs;
  gs.order = order;
  gs.generator = Operator(Matrix::Zero(e.size(), e.size()), sh.h0.basis_tag);
  gs.resonant_blocks = nontrivial(blocks);
  double eliminated = 0;
  for (Eigen::Index c = 0; c < e.size(); ++c)
    for (Eigen::Index r = 0; r < e.size(); ++r) {
      if (label[static_cast<std::size_t>(r)] == label[static_cast<std::size_t>(c)]) continue;
      const cplx v = sh.perturbation.matrix(r, c);
      if (v == cplx(0)) continue;
      const cplx t = v / (e(r) - e(c));
      gs.generator.matrix(r, c) = t;
      eliminated += std::norm(v);
      gs.largest_angle = std::max(gs.largest_angle, std::abs(t));
    }
  gs.eliminated_norm = std::sqrt(eliminated);
  return gs;
}

Operator step(const Operator& h, const GeneratorStep& gs) {
  const Operator u = expm_antihermitian(gs.generator);
  return conjugate(u, h);
}

TransformReport iterate(const Operator& h, const Operator& reference, const LieOptions& options) {
  if (options.max_steps < 1) throw Error(kModule, "iterate: max_steps must be >= 1");
  const double tol = split(h, reference, options.resonance_tol).resonance_tol;
  const IndexBlocks blocks = degenerate_blocks(reference.real_diagonal(), tol);

  TransformReport rep;
  rep.final_h = h;
  rep.rotation = Operator(Matrix::Identity(h.dim(), h.dim()), h.basis_tag);
  rep.resonant_blocks = nontrivial(blocks);

  double residual = offdiag_norm(h, blocks);
  for (int k = 1; k <= options.max_steps; ++k) {
    rep.residual_history.push_back(residual);
    if (residual <= options.target_residual) {
      rep.converged = true;
      break;
    }
    GeneratorStep gs = solve_generator(split(rep.final_h, reference, tol), k);
    if (gs.largest_angle > options.angle_warning) {
      std::ostringstream os;
      os << "step " << k << " on " << h.basis_tag << ": generator entry " << gs.largest_angle
         << " is not small (near-degenerate denominator)";
      rep.warnings.push_back(os.str());
    }
    const Operator u = expm_antihermitian(gs.generator);
    Operator next = conjugate(u, rep.final_h);
    const double next_residual = offdiag_norm(next, blocks);
    if (next_residual > 1.1 * residual && residual > options.target_residual) {
      std::ostringstream os;
      os << "off-resonant residual grew from " << residual << " to " << next_residual << " at step "
         << k << " on " << h.basis_tag << "; largest |V_mn / (h0_m - h0_n)| = " << gs.largest_angle
         << " (the small-parameter assumption fails)";
      throw Error(kModule, os.str());
    }
    rep.rotation = u * rep.rotation;
    rep.final_h = std::move(next);
    rep.steps.push_back(std::move(gs));
    residual = next_residual;
  }
  rep.residual_offdiag = residual;
  if (!rep.converged) {
    rep.converged = residual <= options.target_residual;
    rep.residual_history.push_back(residual);
  }
  return rep;
}

Operator block(const Operator& x, std::size_t offset, std::size_t size, std::string tag) {
  const auto o = static_cast<Eigen::Index>(offset);
  const auto s = static_cast<Eigen::Index>(size);
  return Operator(x.matrix.block(o, o, s, s), std::move(tag));
}

TransformReport iterate_sectors(const FullBasis& basis, const Operator& h, const Operator& reference,
                                const LieOptions& options) {
  if (h.basis_tag != basis.space().tag()) throw Error(kModule, "iterate_sectors: Hamiltonian is not on " + basis.space().tag());
  require_same_basis(h, reference, "iterate_sectors");
  const auto n = static_cast<Eigen::Index>(basis.total_states());
  TransformReport rep;
  rep.final_h = Operator(Matrix::Zero(n, n), h.basis_tag);
  rep.rotation = Operator(Matrix::Zero(n, n), h.basis_tag);
  rep.converged = true;
  double residual_sq = 0;
  for (std::size_t k = 0; k < basis.sectors().size(); ++k) {
    const auto& sec = basis.sectors()[k];
    const std::size_t off = basis.offset(k);
    const std::size_t size = sec.space.size();
    const Operator hk = block(h, off, size, sec.space.tag());
    const Operator rk = block(reference, off, size, sec.space.tag());
    // Couplings leaving the sector would be lost by the block decomposition.
    const auto o0 = static_cast<Eigen::Index>(off);
    const auto s0 = static_cast<Eigen::Index>(size);
    const double leak = h.matrix.block(o0, 0, s0, o0).norm() +
                        h.matrix.block(o0, o0 + s0, s0, n - o0 - s0).norm();
    if (leak > kRelativeTol * std::max(1.0, hk.matrix.norm()))
      throw Error(kModule, "iterate_sectors: Hamiltonian couples sector " + sec.excitation.str() +
                               " to other sectors");
    auto sub = iterate(hk, rk, options);
    const auto o = static_cast<Eigen::Index>(off);
    const auto s = static_cast<Eigen::Index>(size);
    rep.final_h.matrix.block(o, o, s, s) = sub.final_h.matrix;
    rep.rotation.matrix.block(o, o, s, s) = sub.rotation.matrix;
    for (auto b : sub.resonant_blocks) {
      for (auto& i : b) i += off;
      rep.resonant_blocks.push_back(std::move(b));
    }
    for (auto& w : sub.warnings) rep.warnings.push_back(std::move(w));
    residual_sq += sub.residual_offdiag * sub.residual_offdiag;
    rep.converged = rep.converged && sub.converged;
    for (auto& st : sub.steps) rep.steps.push_back(std::move(st));
  }
  rep.residual_offdiag = std::sqrt(residual_sq);
  return rep;
}

}  // namespace effham
