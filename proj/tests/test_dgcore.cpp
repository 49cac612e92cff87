#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "pcdg/analyze.hpp"
#include "pcdg/dgcore.hpp"
#include "pcdg/errors.hpp"
#include "pcdg/meshgen.hpp"
#include "pcdg/quadrature.hpp"

using namespace pcdg;

namespace {

ReferenceMesh two_triangle_square() {
    ReferenceMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    mesh.finalize(false);
    return mesh;
}

ReferenceMesh one_triangle() {
    ReferenceMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    mesh.triangles = {{0, 1, 2}};
    mesh.finalize(false);
    return mesh;
}

// Independent planar SIPG assembler for the shifted operator -Laplace + id on
// a flat z=0 mesh: physical-space quadrature, plain 2D edge normals, no patch
// or metric machinery. Matches Eq.-(19)-type assembly when the geometry is
// exactly flat (g = I, l_g = 1).
MatX flat_sipg_oracle(const DGSpace& space, double beta) {
    const ReferenceMesh& mesh = space.mesh();
    int nd = space.local_size();
    int n = space.n_dofs();
    MatX A = MatX::Zero(n, n);

    // A basis function of element t evaluated at a physical plane point.
    auto phys_to_uv = [&](int t, const Vec3& p) {
        return space.domain(t).frame.to_plane(p);
    };
    auto basis_at = [&](int t, const Vec3& p) {
        return space.basis().eval(space.ref_coords(t, phys_to_uv(t, p)));
    };
    auto phys_grad_at = [&](int t, const Vec3& p) {
        MatX gref = space.basis().grad(space.ref_coords(t, phys_to_uv(t, p)));
        MatX guv = gref * space.ref_jacobian_inv(t); // nd x 2, d/d(frame coords)
        const LocalFrame& f = space.domain(t).frame;
        MatX g(nd, 3);
        for (int i = 0; i < nd; ++i) {
            Vec3 v = guv(i, 0) * f.tangent1 + guv(i, 1) * f.tangent2;
            g.row(i) = v.transpose();
        }
        return g;
    };

    TriangleRule rule = triangle_rule(2 * space.degree() + 2);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        auto pts = mesh.triangle_points(t);
        double area = 0.5 * (pts[1] - pts[0]).cross(pts[2] - pts[0]).norm();
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            Vec2 r = rule.points[q];
            Vec3 p = pts[0] + r.x() * (pts[1] - pts[0]) + r.y() * (pts[2] - pts[0]);
            double w = rule.weights[q] * 2.0 * area;
            VecX phi = basis_at(t, p);
            MatX gp = phys_grad_at(t, p);
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j)
                    A(space.dof(t, i), space.dof(t, j)) +=
                        w * (gp.row(i).dot(gp.row(j)) + phi[i] * phi[j]);
        }
    }

    GaussRule edge_rule = gauss_legendre_01(space.degree() + 2);
    for (const auto& rec : mesh.edges) {
        if (rec.tri[1] < 0) continue;
        Vec3 a = mesh.vertices[rec.v0], b = mesh.vertices[rec.v1];
        double elen = (b - a).norm();
        int ts[2] = {rec.tri[0], rec.tri[1]}; // '+' side = smaller index
        // Outward normal of the '+' side in the z=0 plane.
        Vec3 tau = (b - a) / elen;
        Vec3 n = tau.cross(Vec3(0, 0, 1));
        Vec3 cent = (mesh.triangle_points(ts[0])[0] + mesh.triangle_points(ts[0])[1] +
                     mesh.triangle_points(ts[0])[2]) /
                    3.0;
        if (n.dot(0.5 * (a + b) - cent) < 0) n = -n;
        for (std::size_t q = 0; q < edge_rule.points.size(); ++q) {
            Vec3 p = a + edge_rule.points[q] * (b - a);
            double w = edge_rule.weights[q] * elen;
            VecX phi[2];
            VecX dn[2];
            for (int s = 0; s < 2; ++s) {
                phi[s] = basis_at(ts[s], p);
                dn[s] = phys_grad_at(ts[s], p) * n;
            }
            double sgn[2] = {1.0, -1.0};
            for (int si = 0; si < 2; ++si)
                for (int sj = 0; sj < 2; ++sj)
                    for (int i = 0; i < nd; ++i)
                        for (int j = 0; j < nd; ++j) {
                            double pen = (beta / mesh.h) * sgn[si] * phi[si][i] *
                                         sgn[sj] * phi[sj][j];
                            double cons = 0.5 * dn[si][i] * sgn[sj] * phi[sj][j] +
                                          0.5 * dn[sj][j] * sgn[si] * phi[si][i];
                            A(space.dof(ts[si], i), space.dof(ts[sj], j)) +=
                                w * (pen - cons);
                        }
        }
    }
    return A;
}

} // namespace

TEST_CASE("one flat triangle: P1 element matrices match closed forms") {
    ReferenceMesh mesh = one_triangle();
    ExactSurface plane = ExactSurface::plane_z0();
    auto patches = exact_patches(mesh, plane);
    DGSpace space(mesh, 1);
    SpMat M = assemble_mass(space, patches);
    SpMat A = assemble_bilinear(space, patches);

    // Transform the modal matrices to the nodal (hat-function) basis: columns
    // of V^-1 are modal coefficients of the hats (V = modal values at nodes).
    Mat3 V;
    std::array<Vec2, 3> ref = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    for (int c = 0; c < 3; ++c) V.col(c) = space.basis().eval(ref[c]);
    Mat3 C = V.transpose().inverse(); // C.col(i): modal coefficients of hat_i
    Mat3 Mn = C.transpose() * Mat3(MatX(M)) * C;
    double area = 0.5;
    Mat3 Mexact;
    Mexact << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    Mexact *= area / 12.0;
    CHECK((Mn - Mexact).norm() <= 1e-13);

    // Hand-integrated P1 stiffness of the unit right triangle + the mass.
    Mat3 Sexact;
    Sexact << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
    Mat3 An = C.transpose() * Mat3(MatX(A)) * C;
    CHECK((An - (Sexact + Mexact)).norm() <= 1e-13);
}

TEST_CASE("flat assembly equals the from-scratch planar SIPG oracle") {
    PointCloud cloud = sample_plane_cloud(48, 1.3);
    ReferenceMesh mesh = build_plane_mesh(4, 1.0);
    ExactSurface plane = ExactSurface::plane_z0();
    for (int l = 1; l <= 2; ++l) {
        DGSpace space(mesh, l);
        double beta = default_penalty(l);

        // Reconstructed flat patches and exact plane patches both must agree
        // with the oracle: flat fits are exact for every k.
        auto fitted = reconstruct_patches(mesh, cloud, 2, 24);
        auto exact = exact_patches(mesh, plane);
        MatX oracle = flat_sipg_oracle(space, beta);
        double scale = oracle.cwiseAbs().maxCoeff();
        AssemblyOptions opt;
        opt.beta = beta;
        CHECK((MatX(assemble_bilinear(space, exact, opt)) - oracle)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10 * scale);
        CHECK((MatX(assemble_bilinear(space, fitted, opt)) - oracle)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10 * scale);
        // The literal product-jump and expanded consistency variants coincide
        // exactly on flat geometry (l_g is identically 1).
        opt.expanded_edge_jump = true;
        CHECK((MatX(assemble_bilinear(space, exact, opt)) - oracle)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10 * scale);
    }
}

TEST_CASE("rhs of f=1 on a flat mesh matches closed forms") {
    ReferenceMesh mesh = one_triangle();
    ExactSurface plane = ExactSurface::plane_z0();
    auto patches = exact_patches(mesh, plane);
    DGSpace space(mesh, 1);
    VecX b = assemble_rhs(space, patches, [](const Vec3&) { return 1.0; });
    // b_i = integral of phi_i; in nodal basis each entry is area/3.
    Mat3 V;
    std::array<Vec2, 3> ref = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    for (int c = 0; c < 3; ++c) V.col(c) = space.basis().eval(ref[c]);
    Vec3 bn = V.inverse() * Vec3(b);
    CHECK((bn - Vec3::Constant(0.5 / 3.0)).norm() <= 1e-13);
}

TEST_CASE("assembled matrices on the sphere") {
    PointCloud cloud = sample_sphere_cloud(80, 160);
    ReferenceMesh mesh = build_initial_sphere_mesh();
    auto patches = reconstruct_patches(mesh, cloud, 2, 24);
    DGSpace space(mesh, 2);
    AssemblyOptions opt;
    AssembledSystem sys = assemble_system(space, patches, nullptr,
                                          RhsMode::AtPatchPoint, nullptr, opt);

    SUBCASE("symmetry of A and M") {
        double anorm = MatX(sys.A).cwiseAbs().maxCoeff();
        CHECK((MatX(sys.A) - MatX(sys.A).transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * anorm);
        double mnorm = MatX(sys.M).cwiseAbs().maxCoeff();
        CHECK((MatX(sys.M) - MatX(sys.M).transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * mnorm);
    }

    SUBCASE("surface area from the mass matrix") {
        // 1' M 1 integrates sqrt|g| = area of the reconstructed surface; the
        // error against 4*pi is geometric, O(h^{k+1}) -> order >= k+0.7.
        VecX ones = interpolate(space, patches, [](const Vec3&) { return 1.0; });
        double area = ones.dot(sys.M * ones);
        double err0 = std::abs(area - 4.0 * std::numbers::pi);
        CHECK(err0 <= 1e-2);
        // f = 1 rhs sums to the same area.
        VecX b = assemble_rhs(space, patches, [](const Vec3&) { return 1.0; });
        CHECK(std::abs(ones.dot(b) - area) <= 1e-12 * area);

        PointCloud cloud2 = sample_sphere_cloud(160, 320);
        ReferenceMesh fine = refine_and_project(mesh, cloud2, 12);
        auto fpatches = reconstruct_patches(fine, cloud2, 2, 24);
        DGSpace fspace(fine, 2);
        SpMat Mf = assemble_mass(fspace, fpatches);
        VecX onesf = interpolate(fspace, fpatches, [](const Vec3&) { return 1.0; });
        double err1 = std::abs(onesf.dot(Mf * onesf) - 4.0 * std::numbers::pi);
        double order = std::log(err0 / err1) / std::log(mesh.h / fine.h);
        CHECK(order >= 2.7); // k + 0.7 with k = 2
    }

    SUBCASE("constants: vAv = vMv and zero jumps") {
        VecX c = interpolate(space, patches, [](const Vec3&) { return 3.25; });
        double quad = c.dot(sys.A * c);
        double mass = c.dot(sys.M * c);
        CHECK(std::abs(quad - mass) <= 1e-10 * mass);
    }

    SUBCASE("quadrature doubling stability") {
        AssemblyOptions boosted = opt;
        boosted.quad_boost = 2 * (space.degree() + patches[0].degree());
        SpMat A2 = assemble_bilinear(space, patches, boosted);
        double scale = MatX(sys.A).cwiseAbs().maxCoeff();
        CHECK((MatX(A2) - MatX(sys.A)).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    }
}

TEST_CASE("positive definiteness at the default penalty, indefinite at beta=0") {
    ExactSurface plane = ExactSurface::plane_z0();
    ReferenceMesh mesh = two_triangle_square();
    auto patches = exact_patches(mesh, plane);
    for (int l = 1; l <= 2; ++l) {
        DGSpace space(mesh, l);
        AssemblyOptions def;
        Eigen::SelfAdjointEigenSolver<MatX> es_def{
            MatX(assemble_bilinear(space, patches, def))};
        CHECK(es_def.eigenvalues().minCoeff() > 0.0);
        AssemblyOptions zero;
        zero.beta = 0.0;
        Eigen::SelfAdjointEigenSolver<MatX> es_zero{
            MatX(assemble_bilinear(space, patches, zero))};
        CHECK(es_zero.eigenvalues().minCoeff() < 0.0); // coercivity lost
    }

    // Dense PD check on a curved instance below 2000 dofs (sphere l=1).
    PointCloud cloud = sample_sphere_cloud(80, 160);
    ReferenceMesh smesh = build_initial_sphere_mesh();
    auto spatches = reconstruct_patches(smesh, cloud, 2, 24);
    DGSpace sspace(smesh, 1);
    REQUIRE(sspace.n_dofs() <= 2000);
    Eigen::SelfAdjointEigenSolver<MatX> es{MatX(assemble_bilinear(sspace, spatches))};
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    // M is SPD as well.
    Eigen::SelfAdjointEigenSolver<MatX> em{MatX(assemble_mass(sspace, spatches))};
    CHECK(em.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("interpolation contracts") {
    ExactSurface plane = ExactSurface::plane_z0();
    ReferenceMesh mesh = build_plane_mesh(4, 1.0);
    auto patches = exact_patches(mesh, plane);
    DGSpace space(mesh, 2);

    SUBCASE("flat polynomial reproduction") {
        auto u = [](const Vec3& p) {
            return 1.0 + 2.0 * p.x() - p.y() + 0.5 * p.x() * p.y() + p.x() * p.x();
        };
        VecX c = interpolate(space, patches, u);
        TriangleRule rule = triangle_rule(6);
        for (int t = 0; t < mesh.n_triangles(); ++t) {
            const auto& tri = space.domain(t).tri;
            for (const Vec2& q : rule.points) {
                Vec2 uv = tri[0] + q.x() * (tri[1] - tri[0]) + q.y() * (tri[2] - tri[0]);
                Vec3 p = patches[t].evaluate(uv);
                CHECK(std::abs(space.value(c, t, uv) - u(p)) <= 1e-12);
            }
        }
    }

    SUBCASE("constants have no jumps") {
        VecX c = interpolate(space, patches, [](const Vec3&) { return 2.0; });
        GaussRule rule = gauss_legendre_01(4);
        for (const auto& rec : mesh.edges) {
            if (rec.tri[1] < 0) continue;
            for (double t : rule.points) {
                Vec3 p = mesh.vertices[rec.v0] +
                         t * (mesh.vertices[rec.v1] - mesh.vertices[rec.v0]);
                double va = space.value(c, rec.tri[0],
                                        space.domain(rec.tri[0]).frame.to_plane(p));
                double vb = space.value(c, rec.tri[1],
                                        space.domain(rec.tri[1]).frame.to_plane(p));
                CHECK(std::abs(va - vb) <= 1e-12);
            }
        }
    }
}

TEST_CASE("interpolation error on the sphere converges at order >= l+0.7") {
    ExactSurface sphere = ExactSurface::unit_sphere();
    auto u = [](const Vec3& p) { return p.x() * p.y(); };
    auto grad = [](const Vec3& p) {
        Vec3 g(p.y(), p.x(), 0.0);
        return Vec3(g - p * p.dot(g));
    };
    ReferenceMesh mesh = build_initial_sphere_mesh();
    PointCloud cloud1 = sample_sphere_cloud(80, 160);
    ReferenceMesh fine = refine_and_project(mesh, cloud1, 12);
    double err[2], h[2] = {mesh.h, fine.h};
    const ReferenceMesh* meshes[2] = {&mesh, &fine};
    for (int j = 0; j < 2; ++j) {
        auto patches = exact_patches(*meshes[j], sphere);
        DGSpace space(*meshes[j], 2);
        VecX c = interpolate(space, patches, u);
        err[j] = solution_errors(space, patches, sphere, c, u, grad).l2;
    }
    double order = std::log(err[0] / err[1]) / std::log(h[0] / h[1]);
    CHECK(order >= 2.7);
}

TEST_CASE("quadrature rules are exact for their stated degree") {
    for (int deg = 1; deg <= 8; ++deg) {
        TriangleRule rule = triangle_rule(deg);
        double wsum = 0.0;
        for (double w : rule.weights) {
            CHECK(w > 0.0);
            wsum += w;
        }
        CHECK(std::abs(wsum - 0.5) <= 1e-13);
        for (int a = 0; a + 0 <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b) {
                double got = 0.0;
                for (std::size_t q = 0; q < rule.points.size(); ++q)
                    got += rule.weights[q] * std::pow(rule.points[q].x(), a) *
                           std::pow(rule.points[q].y(), b);
                // Exact integral of x^a y^b over the reference triangle.
                double exact = std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                               std::tgamma(a + b + 3.0);
                CHECK(std::abs(got - exact) <= 1e-13);
            }
    }
}
