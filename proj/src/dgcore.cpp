#include "pcdg/dgcore.hpp"

#include <cmath>

#include "pcdg/errors.hpp"
#include "pcdg/quadrature.hpp"

namespace pcdg {

ElementDomain element_domain(const ReferenceMesh& mesh, int t) {
    auto pts = mesh.triangle_points(t);
    ElementDomain d;
    d.frame = build_local_frame(pts);
    for (int c = 0; c < 3; ++c) d.tri[c] = d.frame.to_plane(pts[c]);
    return d;
}

std::vector<PatchMap> reconstruct_patches(const ReferenceMesh& mesh,
                                          const PointCloud& cloud, int k, int m,
                                          double cond_bound, double newton_tol,
                                          int newton_max_iter) {
    if (m < 0) m = (k + 1) * (k + 2);
    int nt = mesh.n_triangles();
    std::vector<PatchMap> patches;
    patches.reserve(nt);
    for (int t = 0; t < nt; ++t) patches.emplace_back(0, std::vector<Vec3>{}, LocalFrame{}, std::array<Vec2, 3>{Vec2::Zero(), Vec2(1, 0), Vec2(0, 1)});
    std::exception_ptr err;
    int err_tri = -1;
#pragma omp parallel for schedule(dynamic, 32)
    for (int t = 0; t < nt; ++t) {
        try {
            ElementDomain dom = element_domain(mesh, t);
            FittedPolynomial poly = fit_patch_polynomial(cloud, dom.frame, k, m, cond_bound);
            patches[t] = build_patch_map(poly, dom.frame, dom.tri, k, newton_tol,
                                         newton_max_iter);
        } catch (...) {
#pragma omp critical
            if (!err) {
                err = std::current_exception();
                err_tri = t;
            }
        }
    }
    if (err) {
        // Re-raise with the failing triangle identified for diagnostics.
        std::string where = "triangle " + std::to_string(err_tri) + ": ";
        try {
            std::rethrow_exception(err);
        } catch (const DegenerateTriangle& e) {
            throw DegenerateTriangle(where + e.what());
        } catch (const InsufficientPoints& e) {
            throw InsufficientPoints(where + e.what());
        } catch (const RankDeficientFit& e) {
            throw RankDeficientFit(where + e.what());
        } catch (const NewtonDiverged& e) {
            throw NewtonDiverged(where + e.what());
        } catch (const SingularMetric& e) {
            throw SingularMetric(where + e.what());
        } catch (const Error& e) {
            throw Error(where + e.what());
        }
    }
    return patches;
}

std::vector<ExactPatch> exact_patches(const ReferenceMesh& mesh,
                                      const ExactSurface& surface) {
    std::vector<ExactPatch> patches;
    patches.reserve(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        ElementDomain dom = element_domain(mesh, t);
        patches.emplace_back(surface, dom.frame, dom.tri);
    }
    return patches;
}

DGSpace::DGSpace(const ReferenceMesh& mesh, int degree)
    : mesh_(&mesh), degree_(degree), nd_(poly_space_dim(degree)), basis_(degree) {
    int nt = mesh.n_triangles();
    domains_.reserve(nt);
    binv_.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        domains_.push_back(element_domain(mesh, t));
        const auto& tri = domains_.back().tri;
        Mat2 B;
        B.col(0) = tri[1] - tri[0];
        B.col(1) = tri[2] - tri[0];
        binv_.push_back(B.inverse());
    }
}

Vec2 DGSpace::ref_coords(int t, const Vec2& uv) const {
    return binv_[t] * (uv - domains_[t].tri[0]);
}

double DGSpace::value(const VecX& coeffs, int t, const Vec2& uv) const {
    return basis_.eval(ref_coords(t, uv)).dot(coeffs.segment(t * nd_, nd_));
}

Vec2 DGSpace::gradient(const VecX& coeffs, int t, const Vec2& uv) const {
    MatX g = basis_.grad(ref_coords(t, uv)); // nd x 2, wrt reference coords
    return (g * binv_[t]).transpose() * coeffs.segment(t * nd_, nd_);
}

namespace {

// Reference coordinates of the three triangle corners.
const Vec2 kRef[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};

int volume_quad_degree(const DGSpace& space, int patch_degree, int boost) {
    // +4 rather than the nominal +2: the sqrt|g| factor is not polynomial,
    // and two extra degrees are what makes doubling the rule change entries
    // by less than 1e-10 (the quadrature-sufficiency gate).
    return 2 * space.degree() + 2 * std::max(patch_degree - 1, 0) + 4 + boost;
}

struct VolumeTables {
    TriangleRule rule;
    MatX vals;                 // nq x nd
    std::vector<MatX> grads;   // per q: nd x 2, wrt reference coords
};

VolumeTables volume_tables(const DGSpace& space, int patch_degree, int boost) {
    VolumeTables vt;
    vt.rule = triangle_rule(volume_quad_degree(space, patch_degree, boost));
    int nq = int(vt.rule.points.size());
    vt.vals.resize(nq, space.local_size());
    vt.grads.reserve(nq);
    for (int q = 0; q < nq; ++q) {
        vt.vals.row(q) = space.basis().eval(vt.rule.points[q]).transpose();
        vt.grads.push_back(space.basis().grad(vt.rule.points[q]));
    }
    return vt;
}

struct EdgeTables {
    GaussRule rule;
    // Indexed [local_edge][flip]; row q of vals holds basis values at the
    // reference point of edge parameter t_q (flip: 1 - t_q).
    MatX vals[3][2];
    std::vector<MatX> grads[3][2];
};

EdgeTables edge_tables(const DGSpace& space, int patch_degree, int boost) {
    EdgeTables et;
    int deg = 2 * space.degree() + 2 * patch_degree + 3 + boost;
    et.rule = gauss_legendre_01((deg + 1) / 2 + ((deg + 1) % 2));
    int nq = int(et.rule.points.size());
    for (int le = 0; le < 3; ++le) {
        for (int flip = 0; flip < 2; ++flip) {
            et.vals[le][flip].resize(nq, space.local_size());
            et.grads[le][flip].reserve(nq);
            for (int q = 0; q < nq; ++q) {
                double s = flip ? 1.0 - et.rule.points[q] : et.rule.points[q];
                Vec2 x = (1.0 - s) * kRef[le] + s * kRef[(le + 1) % 3];
                et.vals[le][flip].row(q) = space.basis().eval(x).transpose();
                et.grads[le][flip].push_back(space.basis().grad(x));
            }
        }
    }
    return et;
}

template <class Patch>
int patch_degree_of(const std::vector<Patch>& patches) {
    if constexpr (std::is_same_v<Patch, PatchMap>) {
        return patches.empty() ? 1 : patches.front().degree();
    } else {
        (void)patches;
        return 4; // analytic geometry: just pick a generous quadrature degree
    }
}

template <class Patch>
void check_sizes(const DGSpace& space, const std::vector<Patch>& patches) {
    if (int(patches.size()) != space.mesh().n_triangles())
        throw ConfigError("assembly: one patch per mesh triangle required");
}

// Shared volume assembly: diffusion+mass (stiff=true) or mass only.
template <class Patch>
std::vector<Eigen::Triplet<double>> volume_triplets(const DGSpace& space,
                                                    const std::vector<Patch>& patches,
                                                    const AssemblyOptions& opt,
                                                    bool stiff) {
    int nt = space.mesh().n_triangles();
    int nd = space.local_size();
    VolumeTables vt = volume_tables(space, patch_degree_of(patches), opt.quad_boost);
    int nq = int(vt.rule.points.size());
    std::vector<Eigen::Triplet<double>> trips(std::size_t(nt) * nd * nd);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16)
    for (int t = 0; t < nt; ++t) {
        try {
            const auto& tri = space.domain(t).tri;
            Mat2 B;
            B.col(0) = tri[1] - tri[0];
            B.col(1) = tri[2] - tri[0];
            double jac = std::abs(B.determinant());
            Mat2 binv = space.ref_jacobian_inv(t);
            MatX K = MatX::Zero(nd, nd);
            for (int q = 0; q < nq; ++q) {
                Vec2 uv = tri[0] + B * vt.rule.points[q];
                MetricData md = patches[t].metric_at(uv);
                double w = vt.rule.weights[q] * jac * md.sqrt_det;
                VecX phi = vt.vals.row(q).transpose();
                K += w * phi * phi.transpose();
                if (stiff) {
                    MatX G = vt.grads[q] * binv; // nd x 2, wrt uv
                    Mat2 ginv = md.metric.inverse();
                    K += w * G * ginv * G.transpose();
                }
            }
            std::size_t base = std::size_t(t) * nd * nd;
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j)
                    trips[base + std::size_t(i) * nd + j] =
                        {space.dof(t, i), space.dof(t, j), K(i, j)};
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return trips;
}

template <class Patch>
std::vector<Eigen::Triplet<double>> edge_triplets(const DGSpace& space,
                                                  const std::vector<Patch>& patches,
                                                  const AssemblyOptions& opt) {
    const ReferenceMesh& mesh = space.mesh();
    int nd = space.local_size();
    double beta = opt.beta >= 0 ? opt.beta : default_penalty(space.degree());
    EdgeTables et = edge_tables(space, patch_degree_of(patches), opt.quad_boost);
    int nq = int(et.rule.points.size());
    int ne = mesh.n_edges();
    std::vector<Eigen::Triplet<double>> trips(std::size_t(ne) * 4 * nd * nd);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16)
    for (int e = 0; e < ne; ++e) {
        try {
            const auto& rec = mesh.edges[e];
            if (rec.tri[1] < 0) continue; // boundary edge: natural condition
            double elen = (mesh.vertices[rec.v1] - mesh.vertices[rec.v0]).norm();
            double he = opt.per_edge_h ? elen : mesh.h;
            int ts[2] = {rec.tri[0], rec.tri[1]};
            int le[2] = {rec.local_edge[0], rec.local_edge[1]};
            // flip: local edge runs v(le) -> v(le+1); the shared parameter t
            // runs from the smaller to the larger global index.
            int flip[2], sign[2] = {1, -1};
            double plen[2];
            for (int s = 0; s < 2; ++s)
                flip[s] = (mesh.triangles[ts[s]][le[s]] == rec.v0) ? 0 : 1;
            const auto& d0 = space.domain(ts[0]).tri;
            const auto& d1 = space.domain(ts[1]).tri;
            plen[0] = (d0[(le[0] + 1) % 3] - d0[le[0]]).norm();
            plen[1] = (d1[(le[1] + 1) % 3] - d1[le[1]]).norm();
            if (std::abs(plen[0] - plen[1]) > 1e-9 * elen ||
                std::abs(plen[0] - elen) > 1e-9 * elen)
                throw NonConformingEdge("edge " + std::to_string(e) +
                                        ": parametric edge lengths disagree");
            MatX K[2][2];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) K[a][b] = MatX::Zero(nd, nd);
            for (int q = 0; q < nq; ++q) {
                double w = et.rule.weights[q] * elen;
                VecX phi[2], flux[2];
                double lg[2];
                for (int s = 0; s < 2; ++s) {
                    double st = flip[s] ? 1.0 - et.rule.points[q] : et.rule.points[q];
                    EdgeGeometry eg = patches[ts[s]].edge_geometry(le[s], st);
                    lg[s] = eg.l_g;
                    phi[s] = et.vals[le[s]][flip[s]].row(q).transpose();
                    MatX G = et.grads[le[s]][flip[s]][q] * space.ref_jacobian_inv(ts[s]);
                    flux[s] = sign[s] * (G * eg.conormal_pullback);
                }
                double avg_l = 0.5 * (lg[0] + lg[1]);
                double jw[2];
                for (int s = 0; s < 2; ++s)
                    jw[s] = sign[s] * (opt.expanded_edge_jump ? avg_l : lg[s]);
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        // penalty (beta/h) [u][v]{l_g}
                        K[a][b] += (beta / he) * w * avg_l * sign[a] * sign[b] *
                                   phi[a] * phi[b].transpose();
                        // -{flux(u)}[v l] - {flux(v)}[u l]
                        K[a][b] -= 0.5 * w * jw[a] * phi[a] * flux[b].transpose();
                        K[a][b] -= 0.5 * w * jw[b] * flux[a] * phi[b].transpose();
                    }
                }
            }
            std::size_t base = std::size_t(e) * 4 * nd * nd;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int i = 0; i < nd; ++i)
                        for (int j = 0; j < nd; ++j)
                            trips[base + ((std::size_t(a) * 2 + b) * nd + i) * nd + j] =
                                {space.dof(ts[a], i), space.dof(ts[b], j), K[a][b](i, j)};
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return trips;
}

} // namespace

template <class Patch>
SpMat assemble_bilinear(const DGSpace& space, const std::vector<Patch>& patches,
                        const AssemblyOptions& opt) {
    check_sizes(space, patches);
    auto trips = volume_triplets(space, patches, opt, true);
    auto edge = edge_triplets(space, patches, opt);
    trips.insert(trips.end(), edge.begin(), edge.end());
    SpMat A(space.n_dofs(), space.n_dofs());
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

template <class Patch>
SpMat assemble_mass(const DGSpace& space, const std::vector<Patch>& patches,
                    const AssemblyOptions& opt) {
    check_sizes(space, patches);
    auto trips = volume_triplets(space, patches, opt, false);
    SpMat M(space.n_dofs(), space.n_dofs());
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

namespace {

void require_mode(RhsMode mode, const ExactSurface* surface) {
    if (mode == RhsMode::AtExactClosestPoint && surface == nullptr)
        throw ConfigError("rhs: exact-closest-point mode needs a surface");
}

} // namespace

template <class Patch>
VecX assemble_rhs(const DGSpace& space, const std::vector<Patch>& patches,
                  const std::function<double(const Vec3&)>& f, RhsMode mode,
                  const ExactSurface* surface, const AssemblyOptions& opt) {
    check_sizes(space, patches);
    require_mode(mode, surface);
    int nt = space.mesh().n_triangles();
    int nd = space.local_size();
    VolumeTables vt = volume_tables(space, patch_degree_of(patches), opt.quad_boost);
    int nq = int(vt.rule.points.size());
    VecX b = VecX::Zero(space.n_dofs());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16)
    for (int t = 0; t < nt; ++t) {
        try {
            const auto& tri = space.domain(t).tri;
            Mat2 B;
            B.col(0) = tri[1] - tri[0];
            B.col(1) = tri[2] - tri[0];
            double jac = std::abs(B.determinant());
            VecX bl = VecX::Zero(nd);
            for (int q = 0; q < nq; ++q) {
                Vec2 uv = tri[0] + B * vt.rule.points[q];
                MetricData md = patches[t].metric_at(uv);
                Vec3 x = patches[t].evaluate(uv);
                if (mode == RhsMode::AtExactClosestPoint) x = surface->closest_point(x);
                bl += vt.rule.weights[q] * jac * md.sqrt_det * f(x) *
                      vt.vals.row(q).transpose();
            }
            b.segment(t * nd, nd) = bl;
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return b;
}

template <class Patch>
VecX interpolate(const DGSpace& space, const std::vector<Patch>& patches,
                 const std::function<double(const Vec3&)>& u, RhsMode mode,
                 const ExactSurface* surface, const AssemblyOptions& opt) {
    (void)opt;
    check_sizes(space, patches);
    require_mode(mode, surface);
    int nt = space.mesh().n_triangles();
    int nd = space.local_size();
    auto nodes = principal_lattice(kRef[0], kRef[1], kRef[2], space.degree());
    MatX V(nd, nd); // nodal values of the modal basis
    for (int i = 0; i < nd; ++i) V.row(i) = space.basis().eval(nodes[i]).transpose();
    Eigen::PartialPivLU<MatX> Vlu(V);
    VecX c = VecX::Zero(space.n_dofs());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16)
    for (int t = 0; t < nt; ++t) {
        try {
            const auto& tri = space.domain(t).tri;
            Mat2 B;
            B.col(0) = tri[1] - tri[0];
            B.col(1) = tri[2] - tri[0];
            VecX vals(nd);
            for (int i = 0; i < nd; ++i) {
                Vec2 uv = tri[0] + B * nodes[i];
                Vec3 x = patches[t].evaluate(uv);
                if (mode == RhsMode::AtExactClosestPoint) x = surface->closest_point(x);
                vals(i) = u(x);
            }
            c.segment(t * nd, nd) = Vlu.solve(vals);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return c;
}

template <class Patch>
AssembledSystem assemble_system(const DGSpace& space, const std::vector<Patch>& patches,
                                const std::function<double(const Vec3&)>& f, RhsMode mode,
                                const ExactSurface* surface, const AssemblyOptions& opt) {
    AssembledSystem sys;
    sys.A = assemble_bilinear(space, patches, opt);
    sys.M = assemble_mass(space, patches, opt);
    sys.b = f ? assemble_rhs(space, patches, f, mode, surface, opt)
              : VecX::Zero(space.n_dofs());
    sys.beta = opt.beta >= 0 ? opt.beta : default_penalty(space.degree());
    sys.h = space.mesh().h;
    return sys;
}

template SpMat assemble_bilinear<PatchMap>(const DGSpace&, const std::vector<PatchMap>&,
                                           const AssemblyOptions&);
template SpMat assemble_bilinear<ExactPatch>(const DGSpace&,
                                             const std::vector<ExactPatch>&,
                                             const AssemblyOptions&);
template SpMat assemble_mass<PatchMap>(const DGSpace&, const std::vector<PatchMap>&,
                                       const AssemblyOptions&);
template SpMat assemble_mass<ExactPatch>(const DGSpace&, const std::vector<ExactPatch>&,
                                         const AssemblyOptions&);
template VecX assemble_rhs<PatchMap>(const DGSpace&, const std::vector<PatchMap>&,
                                     const std::function<double(const Vec3&)>&, RhsMode,
                                     const ExactSurface*, const AssemblyOptions&);
template VecX assemble_rhs<ExactPatch>(const DGSpace&, const std::vector<ExactPatch>&,
                                       const std::function<double(const Vec3&)>&, RhsMode,
                                       const ExactSurface*, const AssemblyOptions&);
template VecX interpolate<PatchMap>(const DGSpace&, const std::vector<PatchMap>&,
                                    const std::function<double(const Vec3&)>&, RhsMode,
                                    const ExactSurface*, const AssemblyOptions&);
template VecX interpolate<ExactPatch>(const DGSpace&, const std::vector<ExactPatch>&,
                                      const std::function<double(const Vec3&)>&, RhsMode,
                                      const ExactSurface*, const AssemblyOptions&);
template AssembledSystem assemble_system<PatchMap>(const DGSpace&,
                                                   const std::vector<PatchMap>&,
                                                   const std::function<double(const Vec3&)>&,
                                                   RhsMode, const ExactSurface*,
                                                   const AssemblyOptions&);
template AssembledSystem assemble_system<ExactPatch>(const DGSpace&,
                                                     const std::vector<ExactPatch>&,
                                                     const std::function<double(const Vec3&)>&,
                                                     RhsMode, const ExactSurface*,
                                                     const AssemblyOptions&);

} // namespace pcdg
