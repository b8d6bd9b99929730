#pragma once

// Numerical small-rotation engine. A Hamiltonian is split into a diagonal
// reference h0 plus a remainder V; each step solves [T, h0] = -V_off for the
// off-resonant part of V and conjugates exactly, H -> exp(T) H exp(-T).
// Couplings inside degenerate blocks of h0 cannot be rotated away and
// survive as the effective interaction.

#include <optional>
#include <string>
#include <vector>

#include "effham/basis.hpp"
#include "effham/linalg.hpp"

namespace effham {

struct SplitHamiltonian {
  Operator h0;  // diagonal
  Operator perturbation;
  double resonance_tol = 0;
};

/// 1e-6 * max|h0|, with a 1e-12 absolute floor.
double default_resonance_tol(const RealVector& reference);

/// h0 = reference, V = H - reference. Throws when the reference is not
/// diagonal or has complex diagonal entries.
SplitHamiltonian split(const Operator& h, const Operator& reference,
                       std::optional<double> resonance_tol = std::nullopt);

struct GeneratorStep {
  Operator generator;  // anti-Hermitian
  int order = 1;
  double eliminated_norm = 0;     // ||V_off||_F
  IndexBlocks resonant_blocks;    // degenerate blocks of h0 (size >= 2)
  double largest_angle = 0;       // max |T_mn|
};

/// T_mn = V_mn / (h0_m - h0_n) off resonance, 0 inside degenerate blocks.
GeneratorStep solve_generator(const SplitHamiltonian& sh, int order = 1);

/// exp(T) H exp(-T), exact.
Operator step(const Operator& h, const GeneratorStep& gs);

struct LieOptions {
  std::optional<double> resonance_tol;
  int max_steps = 8;
  double target_residual = 1e-12;
  /// A step whose generator has an entry above this is flagged as a small denominator.
  double angle_warning = 0.5;
};

struct TransformReport {
  std::vector<GeneratorStep> steps;
  Operator final_h;
  Operator rotation;  // accumulated U, final_h = U H U^dag
  double residual_offdiag = 0;
  std::vector<double> residual_history;  // residual before each step, then final
  IndexBlocks resonant_blocks;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Repeats solve_generator + step against the fixed reference until the
/// off-resonant residual is <= target_residual or max_steps is reached.
/// Throws when the residual grows by more than 10% between steps.
TransformReport iterate(const Operator& h, const Operator& reference, const LieOptions& options = {});

/// iterate() on every sector block of a block-diagonal Hamiltonian over
/// `basis`; the blocks are reassembled in sector order.
TransformReport iterate_sectors(const FullBasis& basis, const Operator& h, const Operator& reference,
                                const LieOptions& options = {});

/// Extracts the sub-block of `x` on rows/cols [offset, offset + size).
Operator block(const Operator& x, std::size_t offset, std::size_t size, std::string tag);

}  // namespace effham
