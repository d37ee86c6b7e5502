#pragma once

// Every numerical threshold used by the library lives here so that tests and
// the CLI can refer to a single set of knobs.

namespace qbounds {

struct Tolerances {
  // Hermiticity check on construction (entries are symmetrized afterwards).
  double hermitian = 1e-12;
  // Density matrices: smallest admissible eigenvalue and trace slack.
  double psd = 1e-10;
  double trace = 1e-10;
  // Jacobi eigensolver.
  int jacobi_max_sweeps = 100;
  double jacobi_offdiag = 1e-12;
  double eigen_unitarity = 1e-9;
  // Eigenvalues below this are treated as zero for entropies and supports.
  double clip = 1e-10;
  double support = 1e-10;
  // Test operators 0 <= E <= 1.
  double test_bounds = 1e-9;
  // Hypothesis testing: boundary block width and the target duality gap.
  double boundary = 1e-10;
  double duality_gap = 1e-8;
  int bisection_max_steps = 200;
  // Projector idempotency for truncations.
  double projector = 1e-9;
  // Normalization of per-site amplitude vectors.
  double site_norm = 1e-10;
};

inline constexpr Tolerances kTol{};

}  // namespace qbounds
