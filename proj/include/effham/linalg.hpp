#pragma once

#include <cstddef>
#include <vector>

#include "effham/operator.hpp"

namespace effham {

/// Eigenvalues ascending; eigenvectors as the columns of a unitary matrix.
struct EigenDecomposition {
  RealVector values;
  Matrix vectors;
};

/// Tolerances shared by the Hermiticity / unitarity checks.
inline constexpr double kRelativeTol = 1e-10;
inline constexpr double kAbsoluteFloor = 1e-14;

double frobenius_norm(const Operator& x);
/// ||X - X^dag||_F
double hermiticity_residual(const Operator& x);
/// ||X + X^dag||_F
double antihermiticity_residual(const Operator& x);
/// ||U^dag U - I||_F
double unitarity_residual(const Operator& u);

/// Cyclic complex Jacobi diagonalization. Throws for non-Hermitian input.
EigenDecomposition hermitian_eig(const Operator& h);

/// exp(T) for anti-Hermitian T, via the eigendecomposition of the Hermitian iT.
Operator expm_antihermitian(const Operator& t);

/// U H U^dag. Throws when U is not unitary.
Operator conjugate(const Operator& u, const Operator& h);

using IndexBlocks = std::vector<std::vector<std::size_t>>;

/// Groups indices whose reference energies are chained by gaps <= `tol`.
/// Blocks are sorted by energy; indices inside a block ascend.
IndexBlocks degenerate_blocks(const RealVector& energies, double tol);

/// Frobenius norm of everything outside the diagonal blocks.
double offdiag_norm(const Operator& x, const IndexBlocks& blocks);
/// Blocks from reference energies; see degenerate_blocks().
double offdiag_norm(const Operator& x, const RealVector& reference_energies, double tol);
/// Plain off-diagonal norm (every index its own block).
double offdiag_norm(const Operator& x);

}  // namespace effham
