#pragma once

#include <functional>
#include <vector>

#include "pcdg/basis.hpp"
#include "pcdg/geometry.hpp"
#include "pcdg/meshgen.hpp"
#include "pcdg/types.hpp"

namespace pcdg {

/// Per-triangle parametric domain: the triangle's local frame and the images
/// of its three vertices in that frame. All geometric maps (reconstructed or
/// exact) for a triangle share this domain, so their values are comparable
/// pointwise.
struct ElementDomain {
    LocalFrame frame;
    std::array<Vec2, 3> tri;
};

ElementDomain element_domain(const ReferenceMesh& mesh, int t);

/// One reconstructed patch per mesh triangle. m < 0 selects the default
/// fitting-point count (k+1)(k+2).
std::vector<PatchMap> reconstruct_patches(const ReferenceMesh& mesh,
                                          const PointCloud& cloud, int k, int m = -1,
                                          double cond_bound = 1e10,
                                          double newton_tol = 1e-14,
                                          int newton_max_iter = 50);

std::vector<ExactPatch> exact_patches(const ReferenceMesh& mesh,
                                      const ExactSurface& surface);

/// Broken polynomial space of degree l over the mesh triangles; one modal
/// block per element, no inter-element continuity.
class DGSpace {
  public:
    DGSpace(const ReferenceMesh& mesh, int degree);

    const ReferenceMesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    int local_size() const { return nd_; }
    int n_dofs() const { return nd_ * mesh_->n_triangles(); }
    int dof(int t, int i) const { return t * nd_ + i; }
    const ModalBasis& basis() const { return basis_; }
    const ElementDomain& domain(int t) const { return domains_[t]; }

    /// Reference coordinates of a parametric point of element t.
    Vec2 ref_coords(int t, const Vec2& uv) const;
    /// d x_ref / d uv, constant per element.
    const Mat2& ref_jacobian_inv(int t) const { return binv_[t]; }

    /// Point value / parametric gradient of a coefficient vector on element t.
    double value(const VecX& coeffs, int t, const Vec2& uv) const;
    Vec2 gradient(const VecX& coeffs, int t, const Vec2& uv) const;

  private:
    const ReferenceMesh* mesh_;
    int degree_, nd_;
    ModalBasis basis_;
    std::vector<ElementDomain> domains_;
    std::vector<Mat2> binv_; // inverse of [t1-t0 | t2-t0]
};

inline double default_penalty(int degree) { return 10.0 * (degree + 1) * (degree + 1); }

struct AssemblyOptions {
    double beta = -1.0;   // penalty; < 0 selects default_penalty(l)
    bool per_edge_h = false; // beta / |E| instead of beta / h_mesh in the penalty
    int quad_boost = 0;   // extra quadrature degree for volume and edge rules
    bool expanded_edge_jump = false; // {l_g}[v] in place of [v l_g] in consistency terms
};

enum class RhsMode {
    AtPatchPoint,        // evaluate data at the patch-map image point
    AtExactClosestPoint, // evaluate at the exact surface's closest point instead
};

struct AssembledSystem {
    SpMat A;  // Eq.-(19)-type form of -Laplace + id (diffusion, mass, edge terms)
    SpMat M;  // mass matrix
    VecX b;   // source functional (zero when no data supplied)
    double beta = 0.0;
    double h = 0.0;
};

template <class Patch>
AssembledSystem assemble_system(const DGSpace& space, const std::vector<Patch>& patches,
                                const std::function<double(const Vec3&)>& f = nullptr,
                                RhsMode mode = RhsMode::AtPatchPoint,
                                const ExactSurface* surface = nullptr,
                                const AssemblyOptions& opt = {});

/// Interior-penalty form of the shifted operator -Laplace + id pulled back to
/// the parametric domain: volume diffusion+mass, edge penalty, and two
/// symmetric consistency terms with the conormal-weighted product jump.
template <class Patch>
SpMat assemble_bilinear(const DGSpace& space, const std::vector<Patch>& patches,
                        const AssemblyOptions& opt = {});

template <class Patch>
SpMat assemble_mass(const DGSpace& space, const std::vector<Patch>& patches,
                    const AssemblyOptions& opt = {});

template <class Patch>
VecX assemble_rhs(const DGSpace& space, const std::vector<Patch>& patches,
                  const std::function<double(const Vec3&)>& f,
                  RhsMode mode = RhsMode::AtPatchPoint,
                  const ExactSurface* surface = nullptr,
                  const AssemblyOptions& opt = {});

/// Elementwise Lagrange interpolation at the degree-l principal-lattice
/// nodes mapped through the patch, expressed in modal coefficients.
template <class Patch>
VecX interpolate(const DGSpace& space, const std::vector<Patch>& patches,
                 const std::function<double(const Vec3&)>& u,
                 RhsMode mode = RhsMode::AtPatchPoint,
                 const ExactSurface* surface = nullptr,
                 const AssemblyOptions& opt = {});

} // namespace pcdg
