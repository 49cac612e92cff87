#pragma once

#include <array>
#include <vector>

#include "pcdg/basis.hpp"
#include "pcdg/types.hpp"

namespace pcdg {

class PointCloud; // meshgen

/// Orthonormal frame attached to a mesh triangle: origin at the barycenter,
/// tangent1/tangent2 spanning the triangle's plane, normal = t1 x t2.
/// All three triangle vertices have zero normal coordinate by construction.
struct LocalFrame {
    Vec3 origin;
    Vec3 tangent1, tangent2, normal;
    double scale = 1.0; // triangle diameter, used to precondition fits

    Vec2 to_plane(const Vec3& p) const {
        Vec3 d = p - origin;
        return {d.dot(tangent1), d.dot(tangent2)};
    }
    double normal_coord(const Vec3& p) const { return (p - origin).dot(normal); }
    Vec3 from_local(double s1, double s2, double v) const {
        return origin + s1 * tangent1 + s2 * tangent2 + v * normal;
    }
};

LocalFrame build_local_frame(const std::array<Vec3, 3>& triangle);

/// Least-squares polynomial graph v = p(s1,s2) over a local frame, in
/// graded-lexicographic monomial order.
struct FittedPolynomial {
    int degree = 0;
    VecX coefficients;
    double condition_estimate = 1.0;

    double eval(const Vec2& s) const;
    Vec2 grad(const Vec2& s) const;
    Mat2 hess(const Vec2& s) const;
};

FittedPolynomial fit_patch_polynomial(const PointCloud& cloud, const LocalFrame& frame,
                                      int k, int m, double cond_bound = 1e10);

/// Fit from explicitly given local samples (s_i, v_i); the cloud-based
/// overload selects points and delegates here.
FittedPolynomial fit_polynomial_samples(const std::vector<Vec2>& s, const VecX& v,
                                        int k, double scale, double cond_bound = 1e10);

struct NewtonResult {
    Vec3 psi; // frame coordinates (psi1, psi2, p(psi1,psi2))
    double residual = 0.0;
    int iters = 0;
};

/// Closest-point projection of the flat point (x,0) onto the polynomial
/// graph, by Newton iteration on the two-variable stationarity system.
NewtonResult newton_project(const FittedPolynomial& poly, const Vec2& x,
                            double tol = 1e-14, int max_iter = 50);

struct MetricData {
    Mat32 jacobian;
    Mat2 metric;
    double sqrt_det = 0.0;
};

struct EdgeGeometry {
    double l_g = 0.0;       // |J * unit parametric tangent|
    Vec2 conormal_pullback; // e_n with e_n' g e_n = 1, outward
};

/// Degree-k geometric map of one triangle: Lagrange interpolation of the
/// Newton-projected nodes over the parametric triangle in frame coordinates.
class PatchMap {
  public:
    PatchMap(int degree, std::vector<Vec3> nodes, LocalFrame frame,
             std::array<Vec2, 3> parametric_triangle);

    int degree() const { return degree_; }
    const std::vector<Vec3>& nodes() const { return nodes_; }
    const LocalFrame& frame() const { return frame_; }
    const std::array<Vec2, 3>& parametric_triangle() const { return tri_; }

    Vec3 barycentric(const Vec2& uv) const;
    Vec3 evaluate(const Vec2& uv) const;
    MetricData metric_at(const Vec2& uv) const;
    EdgeGeometry edge_geometry(int edge_index, double t) const;
    Vec2 edge_point(int edge_index, double t) const;
    double parametric_edge_length(int edge_index) const;

  private:
    int degree_;
    std::vector<Vec3> nodes_;
    LocalFrame frame_;
    std::array<Vec2, 3> tri_;
    Mat2 to_bary_;   // gradient of (lambda1, lambda2) wrt uv
    Vec2 bary_off_;
};

PatchMap build_patch_map(const FittedPolynomial& poly, const LocalFrame& frame,
                         const std::array<Vec2, 3>& parametric_triangle, int k,
                         double newton_tol = 1e-14, int newton_max_iter = 50);

/// Analytic test surfaces with closed-form closest-point maps.
class ExactSurface {
  public:
    enum class Kind { UnitSphere, Torus, PlaneZ0 };

    static ExactSurface unit_sphere() { return ExactSurface(Kind::UnitSphere, 0, 0); }
    static ExactSurface torus(double R_major, double r_minor) {
        return ExactSurface(Kind::Torus, R_major, r_minor);
    }
    static ExactSurface plane_z0() { return ExactSurface(Kind::PlaneZ0, 0, 0); }

    Kind kind() const { return kind_; }
    double major_radius() const { return R_; }
    double minor_radius() const { return r_; }

    Vec3 closest_point(const Vec3& p) const;
    Mat3 closest_point_jacobian(const Vec3& p) const;
    Vec3 normal(const Vec3& p) const; // outward unit normal at a surface point

  private:
    ExactSurface(Kind kind, double R, double r) : kind_(kind), R_(R), r_(r) {}
    Kind kind_;
    double R_, r_;
};

/// Exact-geometry counterpart of PatchMap: the analytic closest-point map
/// restricted to one parametric triangle, with analytic Jacobian. Shares
/// the triangle's frame and parametric domain so quantities are directly
/// comparable with the reconstructed map.
class ExactPatch {
  public:
    ExactPatch(const ExactSurface& surface, LocalFrame frame,
               std::array<Vec2, 3> parametric_triangle)
        : surface_(surface), frame_(std::move(frame)), tri_(parametric_triangle) {}

    const LocalFrame& frame() const { return frame_; }
    const std::array<Vec2, 3>& parametric_triangle() const { return tri_; }

    Vec3 evaluate(const Vec2& uv) const;
    MetricData metric_at(const Vec2& uv) const;
    EdgeGeometry edge_geometry(int edge_index, double t) const;
    Vec2 edge_point(int edge_index, double t) const;

  private:
    ExactSurface surface_;
    LocalFrame frame_;
    std::array<Vec2, 3> tri_;
};

namespace detail {
EdgeGeometry edge_geometry_from_metric(const MetricData& md, const Vec2& tangent,
                                       const Vec2& outward);
} // namespace detail

} // namespace pcdg
