#pragma once

#include "pcdg/dgcore.hpp"
#include "pcdg/types.hpp"

namespace pcdg {

/// Direct sparse solve of A u = b. Throws NotPositiveDefinite when the
/// factorization detects an indefinite A (insufficient penalty or broken
/// geometry).
VecX solve_source(const AssembledSystem& system);
VecX solve_source(const SpMat& A, const VecX& b);

struct EigenOptions {
    double shift = 0.5;       // shift-invert target in the (lambda+1) pencil scale
    int max_iter = 300;
    double tol = 1e-10;       // residual tolerance, relative to ||A||
    int dense_threshold = 3000;
    unsigned seed = 20240817; // deterministic subspace start
};

struct EigenResult {
    VecX values;        // ascending, with the unit shift removed (lambda)
    MatX vectors;       // columns, M-orthonormal
    VecX residual_norms; // ||A x - (lambda+1) M x|| per pair
};

/// Smallest `count` eigenpairs of A x = (lambda+1) M x. Dense generalized
/// solve below dense_threshold dofs, shift-invert subspace iteration above.
EigenResult solve_eigen(const AssembledSystem& system, int count,
                        const EigenOptions& opt = {});
EigenResult solve_eigen(const SpMat& A, const SpMat& M, int count,
                        const EigenOptions& opt = {});

} // namespace pcdg
