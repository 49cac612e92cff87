#pragma once

#include <vector>

#include "pcdg/types.hpp"

namespace pcdg {

/// Graded-lexicographic monomial exponents for bivariate polynomials of
/// degree <= k: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
/// This ordering is fixed; coefficient vectors are portable across tools.
std::vector<std::pair<int, int>> monomial_exponents(int k);

inline int poly_space_dim(int k) { return (k + 1) * (k + 2) / 2; }

/// Orthonormal modal basis on the reference triangle (0,0),(1,0),(0,1):
/// monomials orthonormalized against the flat reference mass matrix, so
/// the per-cell mass of a flat unit-metric element is the identity.
class ModalBasis {
  public:
    explicit ModalBasis(int degree);

    int degree() const { return degree_; }
    int size() const { return dim_; }

    /// Values of all basis functions at a reference point.
    VecX eval(const Vec2& x) const;
    /// Gradients (size x 2) with respect to reference coordinates.
    MatX grad(const Vec2& x) const;

  private:
    int degree_;
    int dim_;
    std::vector<std::pair<int, int>> exps_;
    MatX coef_; // coef_(i,j): weight of monomial j in basis function i
};

/// Principal (uniform barycentric) lattice of degree k on a triangle given
/// by three 2D vertices; nodes ordered by (i,j) with i+j<=k, i fastest.
std::vector<Vec2> principal_lattice(const Vec2& a, const Vec2& b, const Vec2& c, int k);

/// Barycentric multi-indices matching principal_lattice ordering.
std::vector<std::array<int, 3>> principal_lattice_indices(int k);

/// Lagrange basis on the degree-k principal lattice, in barycentric form.
/// Returns values of all (k+1)(k+2)/2 nodal functions at barycentric
/// coordinates lambda, and optionally d/dlambda (size x 3).
struct LagrangeEval {
    VecX values;
    MatX dlambda; // size x 3
};
LagrangeEval lagrange_lattice_eval(int k, const Vec3& lambda, bool with_grad);

} // namespace pcdg
