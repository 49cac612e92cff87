#include "pcdg/meshgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "pcdg/errors.hpp"

namespace pcdg {

PointCloud::PointCloud(std::vector<Vec3> points) : index_(std::move(points)) {
    const auto& pts = index_.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto nn = index_.knn(pts[i], std::min<std::size_t>(2, pts.size()));
        if (nn.size() == 2 && (pts[nn[0]] - pts[nn[1]]).squaredNorm() == 0.0)
            throw Error("PointCloud: duplicate points");
    }
}

std::vector<int> PointCloud::select_fitting_points(const Vec3& query, int m, bool thin,
                                                   double spread_radius) const {
    if (std::size_t(m) > size())
        throw InsufficientPoints("select_fitting_points: cloud smaller than m");
    if (!thin) return index_.knn(query, m);
    // Candidate pool: everything within the spread radius (so the selection
    // covers the whole patch even on locally dense clouds), or the 3m
    // nearest when that is larger.
    int pool_size = std::min<int>(2 * m, int(size()));
    std::vector<int> pool;
    double R = spread_radius;
    if (R > 0) pool = index_.radius_indices(query, R);
    if (int(pool.size()) < pool_size) {
        pool = index_.knn(query, pool_size);
        R = (points()[pool.back()] - query).norm();
    }
    if (int(pool.size()) <= m) return pool;
    // Uniform-density thinning: walk candidates from the center outward and
    // keep those at least delta away from everything kept so far, where
    // delta is the hex-packing spacing of m points in a disc of radius R.
    // Relax delta until m points survive.
    const auto& pts = points();
    double delta = R * std::sqrt(2.0 * M_PI / (std::sqrt(3.0) * m));
    std::vector<int> chosen;
    std::vector<char> used(pool.size(), 0);
    while (int(chosen.size()) < m) {
        double d2 = delta * delta;
        for (std::size_t i = 0; i < pool.size() && int(chosen.size()) < m; ++i) {
            if (used[i]) continue;
            bool ok = true;
            for (int c : chosen)
                if ((pts[pool[i]] - pts[c]).squaredNorm() < d2) {
                    ok = false;
                    break;
                }
            if (ok) {
                chosen.push_back(pool[i]);
                used[i] = 1;
            }
        }
        delta *= 0.7;
        if (delta < 1e-12) break;
    }
    for (std::size_t i = 0; i < pool.size() && int(chosen.size()) < m; ++i)
        if (!used[i]) chosen.push_back(pool[i]);
    return chosen;
}

namespace {

std::vector<Vec3> sphere_lattice(int n_theta, int n_phi) {
    std::vector<Vec3> pts;
    pts.reserve(std::size_t(n_theta) * n_phi);
    pts.emplace_back(0, 0, 1);
    for (int i = 1; i + 1 < n_theta; ++i) {
        double theta = M_PI * i / (n_theta - 1);
        for (int j = 0; j < n_phi; ++j) {
            double phi = 2 * M_PI * j / n_phi;
            pts.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                             std::cos(theta));
        }
    }
    pts.emplace_back(0, 0, -1);
    return pts;
}

Vec3 torus_point(double theta, double phi, double R, double r) {
    double w = R + r * std::cos(theta);
    return {w * std::cos(phi), w * std::sin(phi), r * std::sin(theta)};
}

std::vector<Vec3> torus_lattice(int n_theta, int n_phi, double R, double r) {
    std::vector<Vec3> pts;
    pts.reserve(std::size_t(n_theta) * n_phi);
    for (int i = 0; i < n_theta; ++i)
        for (int j = 0; j < n_phi; ++j)
            pts.push_back(torus_point(2 * M_PI * i / n_theta, 2 * M_PI * j / n_phi, R, r));
    return pts;
}

} // namespace

PointCloud sample_sphere_cloud(int n_theta, int n_phi) {
    if (n_theta < 4 || n_phi < 4)
        throw ConfigError("sample_sphere_cloud: n_theta, n_phi >= 4 required");
    PointCloud cloud(sphere_lattice(n_theta, n_phi));
    // Probe on an offset, denser lattice to estimate the filling distance.
    std::vector<Vec3> probes;
    int pt = 2 * n_theta + 1, pp = 2 * n_phi;
    for (int i = 0; i < pt; ++i) {
        double theta = M_PI * (i + 0.5) / pt;
        for (int j = 0; j < pp; ++j) {
            double phi = 2 * M_PI * (j + 0.5) / pp;
            probes.emplace_back(std::sin(theta) * std::cos(phi),
                                std::sin(theta) * std::sin(phi), std::cos(theta));
        }
    }
    cloud.set_filling_distance_estimate(estimate_filling_distance(cloud, probes));
    return cloud;
}

PointCloud sample_torus_cloud(int n_theta, int n_phi, double R, double r) {
    if (n_theta < 4 || n_phi < 4)
        throw ConfigError("sample_torus_cloud: n_theta, n_phi >= 4 required");
    PointCloud cloud(torus_lattice(n_theta, n_phi, R, r));
    std::vector<Vec3> probes;
    for (int i = 0; i < 2 * n_theta; ++i)
        for (int j = 0; j < 2 * n_phi; ++j)
            probes.push_back(torus_point(2 * M_PI * (i + 0.5) / (2 * n_theta),
                                         2 * M_PI * (j + 0.5) / (2 * n_phi), R, r));
    cloud.set_filling_distance_estimate(estimate_filling_distance(cloud, probes));
    return cloud;
}

PointCloud sample_plane_cloud(int n, double extent) {
    std::vector<Vec3> pts;
    pts.reserve(std::size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            pts.emplace_back(extent * (2.0 * i / (n - 1) - 1.0),
                             extent * (2.0 * j / (n - 1) - 1.0), 0.0);
    PointCloud cloud(std::move(pts));
    cloud.set_filling_distance_estimate(2.0 * extent / (n - 1) / std::sqrt(2.0));
    return cloud;
}

double estimate_filling_distance(const PointCloud& cloud, const std::vector<Vec3>& probes) {
    if (probes.empty()) throw ConfigError("estimate_filling_distance: probes empty");
    double h_s = 0.0;
    for (const auto& p : probes) h_s = std::max(h_s, cloud.index().nearest_distance(p));
    return h_s;
}

void ReferenceMesh::finalize(bool require_closed, std::optional<int> expected_euler,
                             double shape_regularity_bound) {
    closed = require_closed;
    edges.clear();
    std::map<std::pair<int, int>, int> edge_of;
    // Directed-edge bookkeeping detects orientation conflicts: in a
    // consistently oriented manifold each directed edge appears once.
    std::map<std::pair<int, int>, int> directed_count;
    for (int t = 0; t < n_triangles(); ++t) {
        for (int e = 0; e < 3; ++e) {
            int a = triangles[t][e], b = triangles[t][(e + 1) % 3];
            if (a == b) throw NonManifoldMesh("degenerate triangle (repeated vertex)");
            auto key = std::minmax(a, b);
            auto it = edge_of.find(key);
            if (it == edge_of.end()) {
                EdgeRecord rec;
                rec.v0 = key.first;
                rec.v1 = key.second;
                rec.tri[0] = t;
                rec.tri[1] = -1;
                rec.local_edge[0] = e;
                rec.local_edge[1] = -1;
                edge_of.emplace(key, int(edges.size()));
                edges.push_back(rec);
            } else {
                EdgeRecord& rec = edges[it->second];
                if (rec.tri[1] != -1)
                    throw NonManifoldMesh("edge with more than two incident triangles");
                rec.tri[1] = t;
                rec.local_edge[1] = e;
            }
            if (++directed_count[{a, b}] > 1)
                throw InvertedOrientation("directed edge repeated: inconsistent orientation");
        }
    }
    int boundary = 0;
    for (const auto& rec : edges)
        if (rec.tri[1] == -1) ++boundary;
    if (require_closed && boundary > 0)
        throw OpenSurface("mesh has " + std::to_string(boundary) + " boundary edges");
    if (expected_euler && euler_characteristic() != *expected_euler)
        throw NonManifoldMesh("Euler characteristic " +
                              std::to_string(euler_characteristic()) + " != expected " +
                              std::to_string(*expected_euler));
    h = 0.0;
    for (int t = 0; t < n_triangles(); ++t) {
        auto p = triangle_points(t);
        double a = (p[1] - p[0]).norm(), b = (p[2] - p[1]).norm(), c = (p[0] - p[2]).norm();
        double diam = std::max({a, b, c});
        double s = 0.5 * (a + b + c);
        double area = std::sqrt(std::max(0.0, s * (s - a) * (s - b) * (s - c)));
        double inradius = area / s;
        if (inradius / diam < shape_regularity_bound)
            throw NonManifoldMesh("triangle " + std::to_string(t) +
                                  " violates shape regularity: " +
                                  std::to_string(inradius / diam));
        h = std::max(h, diam);
    }
}

namespace {

double min_tri_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
    auto ang = [](const Vec3& u, const Vec3& v) {
        return std::atan2(u.cross(v).norm(), u.dot(v));
    };
    return std::min({ang(b - a, c - a), ang(a - b, c - b), ang(a - c, b - c)});
}

// Isotropic relaxation of a closed mesh whose vertices lie on a surface:
// alternate edge flips (targeting regular valence and good angles) with
// damped diameter-weighted centroid smoothing, re-projecting vertices onto
// the surface each round. The heavy diameter weight drives the mesh toward
// uniform triangle diameters, which a structured seed lattice cannot provide.
void relax_mesh(std::vector<Vec3>& verts, std::vector<std::array<int, 3>>& tris, int rounds,
                const std::function<Vec3(const Vec3&)>& project) {
    for (int round = 0; round < rounds; ++round) {
        // --- flip pass ---
        std::vector<int> valence(verts.size(), 0);
        for (auto& tri : tris)
            for (int x : tri) ++valence[x];
        std::map<std::pair<int, int>, std::vector<int>> edge_tris;
        for (int t = 0; t < int(tris.size()); ++t)
            for (int e = 0; e < 3; ++e) {
                int u = tris[t][e], v = tris[t][(e + 1) % 3];
                edge_tris[{std::min(u, v), std::max(u, v)}].push_back(t);
            }
        std::set<std::pair<int, int>> edges;
        for (auto& [e, ts] : edge_tris) edges.insert(e);
        for (auto& [u, v] : edges) {
            auto it = edge_tris.find({u, v});
            if (it == edge_tris.end() || it->second.size() != 2) continue;
            int t0 = it->second[0], t1 = it->second[1];
            auto opp = [&](int t) {
                for (int x : tris[t])
                    if (x != u && x != v) return x;
                return -1;
            };
            int c = opp(t0), d = opp(t1);
            if (c < 0 || d < 0 || c == d) continue;
            if (edge_tris.count({std::min(c, d), std::max(c, d)})) continue;
            double before = std::min(
                min_tri_angle(verts[tris[t0][0]], verts[tris[t0][1]], verts[tris[t0][2]]),
                min_tri_angle(verts[tris[t1][0]], verts[tris[t1][1]], verts[tris[t1][2]]));
            // Rebuild t0/t1 with edge (u,v) replaced by (c,d), keeping the
            // cyclic order of t0 so orientation is preserved.
            int a = -1, b = -1;
            for (int e = 0; e < 3; ++e) {
                int p = tris[t0][e], q = tris[t0][(e + 1) % 3];
                if ((p == u && q == v) || (p == v && q == u)) { a = p; b = q; }
            }
            std::array<int, 3> n0 = {a, d, c}, n1 = {b, c, d};
            double after = std::min(min_tri_angle(verts[n0[0]], verts[n0[1]], verts[n0[2]]),
                                    min_tri_angle(verts[n1[0]], verts[n1[1]], verts[n1[2]]));
            auto outward = [&](const std::array<int, 3>& tri) {
                Vec3 p0 = verts[tri[0]], p1 = verts[tri[1]], p2 = verts[tri[2]];
                return (p1 - p0).cross(p2 - p0).dot(p0 + p1 + p2) > 0;
            };
            // Prefer flips that move vertex valences toward 6 (the regular
            // value), as long as the triangles stay reasonably shaped;
            // otherwise flip only on strict min-angle improvement.
            auto dev = [](int val) { return (val - 6) * (val - 6); };
            int before_dev = dev(valence[u]) + dev(valence[v]) + dev(valence[c]) + dev(valence[d]);
            int after_dev = dev(valence[u] - 1) + dev(valence[v] - 1) + dev(valence[c] + 1) +
                            dev(valence[d] + 1);
            bool do_flip = (after_dev < before_dev && after >= std::min(before, 0.45)) ||
                           (after_dev <= before_dev && after > before + 1e-12);
            if (do_flip && outward(n0) && outward(n1)) {
                --valence[u];
                --valence[v];
                ++valence[c];
                ++valence[d];
                // Update the edge map incrementally so later flips this pass
                // see current adjacency.
                for (int t : {t0, t1})
                    for (int e = 0; e < 3; ++e) {
                        int p = tris[t][e], q = tris[t][(e + 1) % 3];
                        auto& vec = edge_tris[{std::min(p, q), std::max(p, q)}];
                        vec.erase(std::remove(vec.begin(), vec.end(), t), vec.end());
                    }
                tris[t0] = n0;
                tris[t1] = n1;
                for (int t : {t0, t1})
                    for (int e = 0; e < 3; ++e) {
                        int p = tris[t][e], q = tris[t][(e + 1) % 3];
                        edge_tris[{std::min(p, q), std::max(p, q)}].push_back(t);
                    }
            }
        }
        // --- smoothing pass: umbrella average of 1-ring neighbors ---
        std::vector<Vec3> accum(verts.size(), Vec3::Zero());
        std::vector<double> wsum(verts.size(), 0.0);
        for (auto& tri : tris) {
            Vec3 p0 = verts[tri[0]], p1 = verts[tri[1]], p2 = verts[tri[2]];
            double diam = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
            double w = std::pow(diam, 48);
            Vec3 centroid = (p0 + p1 + p2) / 3.0;
            for (int x : tri) {
                accum[x] += w * centroid;
                wsum[x] += w;
            }
        }
        for (std::size_t v = 0; v < verts.size(); ++v)
            if (wsum[v] > 0)
                verts[v] = project(verts[v] + 0.05 * (accum[v] / wsum[v] - verts[v]));
    }
}

} // namespace

namespace {

// Ring counts for an equal-area latitude lattice: rings at hex-row spacing,
// points per ring proportional to the ring circumference, totalling exactly
// target_vertices (2 poles + ring points). delta is tuned by bisection and
// any residual is absorbed by the largest rings.
std::vector<int> sphere_ring_sizes(int target_vertices, int& n_rings) {
    auto counts = [&](double delta, int& rings_out) {
        rings_out = std::max(3, int(std::lround(M_PI / (0.866 * delta))) - 1);
        std::vector<int> n(rings_out);
        for (int i = 1; i <= rings_out; ++i) {
            double theta = M_PI * i / (rings_out + 1);
            n[i - 1] = std::max(3, int(std::lround(2 * M_PI * std::sin(theta) / delta)));
        }
        return n;
    };
    double lo = 0.5 * std::sqrt(4 * M_PI / target_vertices);
    double hi = 4.0 * lo;
    std::vector<int> best;
    int best_rings = 0;
    long best_diff = std::numeric_limits<long>::max();
    for (int it = 0; it < 200; ++it) {
        double delta = lo + (hi - lo) * it / 199.0;
        int rings;
        auto n = counts(delta, rings);
        long total = 2 + std::accumulate(n.begin(), n.end(), 0L);
        if (std::abs(total - target_vertices) < best_diff) {
            best_diff = std::abs(total - target_vertices);
            best = n;
            best_rings = rings;
        }
        if (total == target_vertices) break;
    }
    long residual = target_vertices - 2 - std::accumulate(best.begin(), best.end(), 0L);
    while (residual != 0)
        for (std::size_t i = 0; i < best.size() && residual != 0; ++i) {
            int mid = int(best.size()) / 2;
            int idx = (int(i) % 2 ? mid - (int(i) + 1) / 2 : mid + int(i) / 2);
            if (idx < 0 || idx >= int(best.size())) continue;
            best[idx] += (residual > 0 ? 1 : -1);
            residual += (residual > 0 ? -1 : 1);
        }
    n_rings = best_rings;
    return best;
}

// Factor target_vertices into an n_theta x n_phi torus grid whose cells are
// as close to square as possible (tube edge vs mid-circumference edge).
// n_theta must be even so the half-step ring offsets alternate consistently
// across the tube wrap.
void torus_grid_dims(int target_vertices, double R, double r, int& n_theta, int& n_phi) {
    double best_score = std::numeric_limits<double>::max();
    n_theta = 0;
    for (int nt = 4; nt * 3 <= target_vertices; nt += 2) {
        if (target_vertices % nt != 0) continue;
        int np = target_vertices / nt;
        if (np < 3) break;
        double score = std::abs(std::log((2 * M_PI * r / nt) / (2 * M_PI * R / np)));
        if (score < best_score) {
            best_score = score;
            n_theta = nt;
            n_phi = np;
        }
    }
    if (n_theta == 0)
        throw ConfigError("torus seed: target vertex count has no even-by-n factorization");
}

} // namespace

ReferenceMesh build_initial_sphere_mesh(int target_vertices) {
    ReferenceMesh mesh;
    int n_rings = 0;
    auto ring_size = sphere_ring_sizes(target_vertices, n_rings);
    std::vector<int> ring_start(n_rings);
    std::vector<double> ring_off(n_rings);
    mesh.vertices.emplace_back(0, 0, 1); // north pole
    for (int i = 1; i <= n_rings; ++i) {
        double theta = M_PI * i / (n_rings + 1);
        ring_start[i - 1] = int(mesh.vertices.size());
        ring_off[i - 1] = 0.5 * (i % 2);
        for (int j = 0; j < ring_size[i - 1]; ++j) {
            double phi = 2 * M_PI * (j + ring_off[i - 1]) / ring_size[i - 1];
            mesh.vertices.emplace_back(std::sin(theta) * std::cos(phi),
                                       std::sin(theta) * std::sin(phi), std::cos(theta));
        }
    }
    mesh.vertices.emplace_back(0, 0, -1); // south pole
    int south = int(mesh.vertices.size()) - 1;
    auto rv = [&](int i, int j) { return ring_start[i] + (j % ring_size[i]); };
    for (int j = 0; j < ring_size[0]; ++j)
        mesh.triangles.push_back({0, rv(0, j), rv(0, j + 1)});
    // Merge-walk strip triangulation between consecutive rings of differing
    // sizes: always advance the ring whose next vertex comes first in angle.
    for (int i = 0; i + 1 < n_rings; ++i) {
        int na = ring_size[i], nb = ring_size[i + 1];
        auto ang_a = [&](int j) { return 2 * M_PI * (j + ring_off[i]) / na; };
        auto ang_b = [&](int j) { return 2 * M_PI * (j + ring_off[i + 1]) / nb; };
        int ja = 0, jb = 0;
        while (ja < na || jb < nb) {
            bool advance_a = jb >= nb || (ja < na && ang_a(ja + 1) <= ang_b(jb + 1));
            if (advance_a) {
                mesh.triangles.push_back({rv(i, ja), rv(i + 1, jb), rv(i, ja + 1)});
                ++ja;
            } else {
                mesh.triangles.push_back({rv(i, ja), rv(i + 1, jb), rv(i + 1, jb + 1)});
                ++jb;
            }
        }
    }
    for (int j = 0; j < ring_size[n_rings - 1]; ++j)
        mesh.triangles.push_back({south, rv(n_rings - 1, j + 1), rv(n_rings - 1, j)});
    relax_mesh(mesh.vertices, mesh.triangles, 1000,
               [](const Vec3& p) { return p.normalized(); });
    mesh.finalize(true, 2);
    return mesh;
}

ReferenceMesh build_initial_torus_mesh(int target_vertices, double R, double r) {
    ReferenceMesh mesh;
    int n_theta = 0, n_phi = 0;
    torus_grid_dims(target_vertices, R, r, n_theta, n_phi);
    // Structured staggered grid: alternate tube rings are offset by half a
    // step around the center line so strip triangles come out near-isosceles.
    // Ring sizes are uniform in phi, so triangles shrink toward the inner
    // equator, which is where the reconstruction error constant is largest;
    // this natural grading beats an isotropic equal-area mesh in max-norm.
    for (int i = 0; i < n_theta; ++i)
        for (int j = 0; j < n_phi; ++j)
            mesh.vertices.push_back(torus_point(2 * M_PI * i / n_theta,
                                                2 * M_PI * (j + 0.5 * (i % 2)) / n_phi, R, r));
    auto vid = [&](int i, int j) { return ((i + n_theta) % n_theta) * n_phi + (j + n_phi) % n_phi; };
    for (int i = 0; i < n_theta; ++i)
        for (int j = 0; j < n_phi; ++j) {
            int a0 = vid(i, j), a1 = vid(i, j + 1);
            int b0 = vid(i + 1, j), b1 = vid(i + 1, j + 1);
            if (i % 2 == 0) { // lower ring offset right of upper
                mesh.triangles.push_back({a0, b0, a1});
                mesh.triangles.push_back({a1, b0, b1});
            } else {
                mesh.triangles.push_back({a0, b1, a1});
                mesh.triangles.push_back({a0, b0, b1});
            }
        }
    mesh.finalize(true, 0);
    return mesh;
}

ReferenceMesh build_plane_mesh(int n, double extent) {
    ReferenceMesh mesh;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            mesh.vertices.emplace_back(extent * (2.0 * i / n - 1.0),
                                       extent * (2.0 * j / n - 1.0), 0.0);
    auto vid = [&](int i, int j) { return i * (n + 1) + j; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            mesh.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    mesh.finalize(false);
    return mesh;
}

namespace {

Vec3 project_to_tls_plane(const Vec3& v, const std::vector<Vec3>& pts,
                          const std::vector<int>& nbrs) {
    Vec3 centroid = Vec3::Zero();
    for (int i : nbrs) centroid += pts[i];
    centroid /= double(nbrs.size());
    MatX centered(nbrs.size(), 3);
    for (std::size_t i = 0; i < nbrs.size(); ++i)
        centered.row(i) = (pts[nbrs[i]] - centroid).transpose();
    Eigen::JacobiSVD<MatX> svd(centered, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s(1) <= 1e-12 * s(0))
        throw RankDeficientFit("refine_and_project: collinear neighbor set");
    Vec3 n = svd.matrixV().col(2);
    return v - n.dot(v - centroid) * n;
}

} // namespace

ReferenceMesh refine_and_project(const ReferenceMesh& mesh, const PointCloud& cloud, int knn) {
    if (knn < 3) throw ConfigError("refine_and_project: knn >= 3 required");
    ReferenceMesh out;
    out.vertices = mesh.vertices;
    std::map<std::pair<int, int>, int> midpoint;
    for (const auto& rec : mesh.edges) {
        midpoint[{rec.v0, rec.v1}] = int(out.vertices.size());
        out.vertices.push_back(0.5 * (mesh.vertices[rec.v0] + mesh.vertices[rec.v1]));
    }
    for (const auto& tri : mesh.triangles) {
        int m01 = midpoint.at(std::minmax(tri[0], tri[1]));
        int m12 = midpoint.at(std::minmax(tri[1], tri[2]));
        int m20 = midpoint.at(std::minmax(tri[2], tri[0]));
        out.triangles.push_back({tri[0], m01, m20});
        out.triangles.push_back({tri[1], m12, m01});
        out.triangles.push_back({tri[2], m20, m12});
        out.triangles.push_back({m01, m12, m20});
    }
    const auto& pts = cloud.points();
    for (auto& v : out.vertices)
        v = project_to_tls_plane(v, pts, cloud.index().knn(v, knn));
    out.level = mesh.level + 1;
    out.finalize(mesh.closed, mesh.closed ? std::optional<int>(mesh.euler_characteristic())
                                          : std::nullopt);
    return out;
}

ReferenceMesh load_off(const std::string& path, std::optional<int> expected_euler) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file: " + path);
    std::string token;
    in >> token;
    if (token != "OFF") throw IoError("not an OFF file: " + path);
    int nv = 0, nf = 0, ne = 0;
    in >> nv >> nf >> ne;
    if (!in) throw IoError("bad OFF header: " + path);
    ReferenceMesh mesh;
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices) in >> v.x() >> v.y() >> v.z();
    mesh.triangles.resize(nf);
    for (auto& t : mesh.triangles) {
        int n = 0;
        in >> n >> t[0] >> t[1] >> t[2];
        if (n != 3) throw IoError("OFF face is not a triangle: " + path);
    }
    if (!in) throw IoError("truncated OFF file: " + path);
    mesh.finalize(true, expected_euler);
    return mesh;
}

void save_off(const ReferenceMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write mesh file: " + path);
    out.precision(17);
    out << "OFF\n" << mesh.n_vertices() << ' ' << mesh.n_triangles() << " 0\n";
    for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

PointCloud load_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cloud file: " + path);
    std::vector<Vec3> pts;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        Vec3 p;
        if (ls >> p.x() >> p.y() >> p.z()) pts.push_back(p);
    }
    if (pts.empty()) throw IoError("empty cloud file: " + path);
    return PointCloud(std::move(pts));
}

void save_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write cloud file: " + path);
    out.precision(17);
    for (const auto& p : cloud.points()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

} // namespace pcdg
