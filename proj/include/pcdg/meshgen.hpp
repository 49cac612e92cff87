#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pcdg/geometry.hpp"
#include "pcdg/kdtree.hpp"
#include "pcdg/types.hpp"

namespace pcdg {

/// Unstructured surface samples with an exact k-NN index.
class PointCloud {
  public:
    explicit PointCloud(std::vector<Vec3> points);

    const std::vector<Vec3>& points() const { return index_.points(); }
    std::size_t size() const { return index_.size(); }
    const KdTree& index() const { return index_; }

    double filling_distance_estimate() const { return h_s_; }
    void set_filling_distance_estimate(double h) { h_s_ = h; }

    /// m fitting points near `query`, optionally thinned to a well-spread
    /// subset (greedy farthest-point selection from a candidate pool: all
    /// points within spread_radius, or the 3m nearest if that is larger).
    std::vector<int> select_fitting_points(const Vec3& query, int m, bool thin = true,
                                           double spread_radius = -1.0) const;

  private:
    KdTree index_;
    double h_s_ = 0.0;
};

PointCloud sample_sphere_cloud(int n_theta, int n_phi);
PointCloud sample_torus_cloud(int n_theta, int n_phi, double R_major = 4.0,
                              double r_minor = 1.0);
PointCloud sample_plane_cloud(int n, double extent = 1.0);

double estimate_filling_distance(const PointCloud& cloud, const std::vector<Vec3>& probes);

/// Flat triangulated polyhedron serving as the common parametric domain.
struct ReferenceMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    double h = 0.0; // max triangle diameter
    int level = 0;
    bool closed = true;

    struct EdgeRecord {
        int v0, v1;          // global vertex indices, v0 < v1
        int tri[2];          // incident triangles (tri[1] = -1 on boundary)
        int local_edge[2];   // local edge index within each triangle
    };
    std::vector<EdgeRecord> edges; // rebuilt by finalize()

    int n_vertices() const { return int(vertices.size()); }
    int n_triangles() const { return int(triangles.size()); }
    int n_edges() const { return int(edges.size()); }
    int euler_characteristic() const { return n_vertices() - n_edges() + n_triangles(); }

    std::array<Vec3, 3> triangle_points(int t) const {
        return {vertices[triangles[t][0]], vertices[triangles[t][1]],
                vertices[triangles[t][2]]};
    }

    /// Rebuild edge topology and h; validate manifoldness, orientation,
    /// optional Euler characteristic, and shape regularity.
    void finalize(bool require_closed = true,
                  std::optional<int> expected_euler = std::nullopt,
                  double shape_regularity_bound = 0.1);
};

ReferenceMesh build_initial_sphere_mesh(int target_vertices = 222);
ReferenceMesh build_initial_torus_mesh(int target_vertices = 200,
                                       double R_major = 4.0, double r_minor = 1.0);
ReferenceMesh build_plane_mesh(int n, double extent = 1.0);

/// Uniform 1->4 refinement followed by the k-NN hyperplane projection of
/// every vertex onto the total-least-squares plane of its neighbors.
ReferenceMesh refine_and_project(const ReferenceMesh& mesh, const PointCloud& cloud,
                                 int knn);

// --- file formats ---
ReferenceMesh load_off(const std::string& path,
                       std::optional<int> expected_euler = std::nullopt);
void save_off(const ReferenceMesh& mesh, const std::string& path);
PointCloud load_xyz(const std::string& path);
void save_xyz(const PointCloud& cloud, const std::string& path);

} // namespace pcdg
