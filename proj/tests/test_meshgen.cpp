#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pcdg/errors.hpp"
#include "pcdg/meshgen.hpp"

using namespace pcdg;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("sphere cloud lies on the unit sphere") {
    PointCloud cloud = sample_sphere_cloud(4, 4);
    CHECK(cloud.size() >= 8); // lattice minus pole duplicates
    for (const Vec3& p : cloud.points()) CHECK(std::abs(p.norm() - 1.0) <= 1e-14);
    // No duplicate points.
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK(cloud.index().knn(cloud.points()[i], 2).size() == 2);
}

TEST_CASE("sphere cloud filling distance matches a brute-force probe oracle") {
    PointCloud cloud = sample_sphere_cloud(200, 400);
    double h_s = cloud.filling_distance_estimate();
    double expect = std::numbers::pi / 200.0;
    CHECK(h_s >= expect / 2.0);
    CHECK(h_s <= expect * 2.0);
    // Brute-force max-min distance over a 10^4 probe set.
    std::vector<Vec3> probes;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
            double th = std::numbers::pi * (i + 0.5) / 100.0;
            double ph = 2.0 * std::numbers::pi * j / 100.0;
            probes.emplace_back(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                std::cos(th));
        }
    double brute = 0.0;
    for (const Vec3& q : probes) {
        double best = 1e300;
        for (const Vec3& p : cloud.points()) best = std::min(best, (p - q).norm());
        brute = std::max(brute, best);
    }
    double indexed = estimate_filling_distance(cloud, probes);
    CHECK(indexed == doctest::Approx(brute).epsilon(1e-14));
    CHECK(h_s >= brute / 2.0);
    CHECK(h_s <= brute * 4.0);
}

TEST_CASE("torus cloud parametrization and implicit residual") {
    PointCloud cloud = sample_torus_cloud(16, 32, 4.0, 1.0);
    for (const Vec3& p : cloud.points()) {
        double res = std::pow(std::hypot(p.x(), p.y()) - 4.0, 2) + p.z() * p.z();
        CHECK(std::abs(res - 1.0) <= 1e-12);
    }
    // (theta, phi) = (0, 0) and (pi/2, 0) land at the analytic positions of
    // the R=4, r=1 parametrization: (R + r cos th) cos ph, ..., r sin th.
    bool outer = false, top = false;
    for (const Vec3& p : cloud.points()) {
        if ((p - Vec3(5, 0, 0)).norm() <= 1e-12) outer = true;
        if ((p - Vec3(4, 0, 1)).norm() <= 1e-12) top = true;
    }
    CHECK(outer);
    CHECK(top);
}

TEST_CASE("filling distance trivial cases") {
    PointCloud two(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0)});
    CHECK(estimate_filling_distance(two, {Vec3(0.5, 0, 0)}) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK(estimate_filling_distance(two, two.points()) == doctest::Approx(0.0));
}

TEST_CASE("initial sphere mesh is a closed shape-regular sphere") {
    ReferenceMesh mesh = build_initial_sphere_mesh();
    CHECK(mesh.n_vertices() == 222);
    CHECK(mesh.euler_characteristic() == 2);
    CHECK(mesh.closed);
    for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
    // finalize re-validates manifoldness, orientation, shape regularity.
    ReferenceMesh copy = mesh;
    CHECK_NOTHROW(copy.finalize(true, 2));
}

TEST_CASE("initial torus mesh has torus topology and lies on the torus") {
    ReferenceMesh mesh = build_initial_torus_mesh(200, 4.0, 1.0);
    CHECK(mesh.n_vertices() == 200);
    CHECK(mesh.euler_characteristic() == 0);
    for (const Vec3& v : mesh.vertices) {
        double res = std::pow(std::hypot(v.x(), v.y()) - 4.0, 2) + v.z() * v.z();
        CHECK(std::abs(res - 1.0) <= 1e-12);
    }
}

TEST_CASE("refinement follows the paper level sequence and halves h") {
    PointCloud cloud1 = sample_sphere_cloud(80, 160);
    PointCloud cloud2 = sample_sphere_cloud(160, 320);
    ReferenceMesh m0 = build_initial_sphere_mesh();
    ReferenceMesh m1 = refine_and_project(m0, cloud1, 12);
    CHECK(m1.n_vertices() == 882);
    CHECK(m1.n_vertices() == m0.n_vertices() + m0.n_edges()); // V' = V + E
    CHECK(m1.euler_characteristic() == 2);
    CHECK(m1.h / m0.h >= 0.45);
    CHECK(m1.h / m0.h <= 0.55);
    ReferenceMesh m2 = refine_and_project(m1, cloud2, 12);
    CHECK(m2.n_vertices() == 3522);
    CHECK(m2.h / m1.h >= 0.45);
    CHECK(m2.h / m1.h <= 0.55);

    // Projected vertices stay within O(h_s^2) of the sphere, with a constant
    // that is stable across the two levels.
    auto max_dist = [](const ReferenceMesh& m) {
        double d = 0.0;
        for (const Vec3& v : m.vertices) d = std::max(d, std::abs(v.norm() - 1.0));
        return d;
    };
    double c1 = max_dist(m1) / std::pow(cloud1.filling_distance_estimate(), 2);
    double c2 = max_dist(m2) / std::pow(cloud2.filling_distance_estimate(), 2);
    CHECK(c1 <= 10.0);
    CHECK(c2 <= 10.0);
    CHECK(c2 / c1 <= 4.0);
    CHECK(c1 / c2 <= 4.0);
}

TEST_CASE("projection is a fixed point on flat data") {
    PointCloud cloud = sample_plane_cloud(64, 1.3);
    ReferenceMesh mesh = build_plane_mesh(8, 1.0);
    ReferenceMesh refined = refine_and_project(mesh, cloud, 12);
    // Old vertices unchanged, new vertices exactly at edge midpoints: all in
    // the plane z = 0 and at their unprojected positions.
    for (int i = 0; i < mesh.n_vertices(); ++i)
        CHECK((refined.vertices[i] - mesh.vertices[i]).norm() <= 1e-12);
    for (const Vec3& v : refined.vertices) CHECK(std::abs(v.z()) <= 1e-12);
}

TEST_CASE("OFF round trip preserves the mesh") {
    ReferenceMesh mesh = build_initial_torus_mesh(200, 4.0, 1.0);
    auto path = temp_file("pcdg_roundtrip.off");
    save_off(mesh, path.string());
    ReferenceMesh back = load_off(path.string(), 0);
    REQUIRE(back.n_vertices() == mesh.n_vertices());
    REQUIRE(back.n_triangles() == mesh.n_triangles());
    for (int i = 0; i < mesh.n_vertices(); ++i)
        CHECK((back.vertices[i] - mesh.vertices[i]).norm() <= 1e-12);
    for (int t = 0; t < mesh.n_triangles(); ++t)
        CHECK(back.triangles[t] == mesh.triangles[t]);
    std::filesystem::remove(path);
}

TEST_CASE("XYZ round trip preserves the cloud") {
    PointCloud cloud = sample_sphere_cloud(8, 16);
    auto path = temp_file("pcdg_roundtrip.xyz");
    save_xyz(cloud, path.string());
    PointCloud back = load_xyz(path.string());
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK((back.points()[i] - cloud.points()[i]).norm() <= 1e-12);
    std::filesystem::remove(path);
}

TEST_CASE("XYZ parses scientific notation") {
    auto path = temp_file("pcdg_sci.xyz");
    {
        std::ofstream out(path);
        out << "1.0e-1 -2.5E+0 0.125\n0 1 2\n";
    }
    PointCloud cloud = load_xyz(path.string());
    REQUIRE(cloud.size() == 2);
    CHECK((cloud.points()[0] - Vec3(0.1, -2.5, 0.125)).norm() <= 1e-15);
    std::filesystem::remove(path);
}

TEST_CASE("error paths: open, non-manifold, and missing inputs") {
    SUBCASE("single triangle is an open surface") {
        auto path = temp_file("pcdg_open.off");
        {
            std::ofstream out(path);
            out << "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        }
        CHECK_THROWS_AS(load_off(path.string()), OpenSurface);
        std::filesystem::remove(path);
    }
    SUBCASE("three triangles sharing an edge are non-manifold") {
        ReferenceMesh mesh;
        mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
                         Vec3(0, -1, 0)};
        mesh.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 1, 4}};
        CHECK_THROWS_AS(mesh.finalize(false), NonManifoldMesh);
    }
    SUBCASE("missing files") {
        CHECK_THROWS_AS(load_off("/nonexistent/mesh.off"), IoError);
        CHECK_THROWS_AS(load_xyz("/nonexistent/cloud.xyz"), IoError);
    }
    SUBCASE("euler characteristic mismatch") {
        ReferenceMesh mesh = build_initial_sphere_mesh();
        auto path = temp_file("pcdg_sphere.off");
        save_off(mesh, path.string());
        CHECK_THROWS(load_off(path.string(), 0)); // sphere has chi = 2, not 0
        std::filesystem::remove(path);
    }
}

TEST_CASE("plane seed mesh is shape regular and open") {
    ReferenceMesh mesh = build_plane_mesh(8, 1.0);
    CHECK(mesh.n_vertices() == 81);
    CHECK_FALSE(mesh.closed);
    // Disk topology: V - E + F = 1.
    CHECK(mesh.euler_characteristic() == 1);
}
