#include "pcdg/study.hpp"

#include <cmath>

#include "pcdg/errors.hpp"

namespace pcdg {

namespace {
constexpr double kTorusR = 4.0;
constexpr double kTorusr = 1.0;

// Fitting-point budget used by the convergence studies. Doubling the minimal
// (k+1)(k+2) count widens the fit ball enough to stay stable on the coarse
// levels of anisotropic sample lattices without hurting the fine-level error.
int study_fit_points(const StudyConfig& cfg) {
    return cfg.m > 0 ? cfg.m : 2 * (cfg.k + 1) * (cfg.k + 2);
}
} // namespace

ExactSurface make_surface(const std::string& name) {
    if (name == "sphere") return ExactSurface::unit_sphere();
    if (name == "torus") return ExactSurface::torus(kTorusR, kTorusr);
    if (name == "plane-test") return ExactSurface::plane_z0();
    throw ConfigError("unknown surface '" + name + "'");
}

PointCloud make_cloud(const std::string& surface, int level) {
    int s = 1 << (level - 1);
    if (surface == "sphere") return sample_sphere_cloud(80 * s, 160 * s);
    if (surface == "torus") return sample_torus_cloud(48 * s, 192 * s, kTorusR, kTorusr);
    if (surface == "plane-test") return sample_plane_cloud(32 * s, 1.3);
    throw ConfigError("no synthetic cloud for surface '" + surface + "'");
}

ReferenceMesh make_seed_mesh(const std::string& surface) {
    if (surface == "sphere") return build_initial_sphere_mesh();
    if (surface == "torus") return build_initial_torus_mesh(200, kTorusR, kTorusr);
    if (surface == "plane-test") return build_plane_mesh(8, 1.0);
    throw ConfigError("no seed mesh for surface '" + surface + "'");
}

LevelChain build_levels(const StudyConfig& cfg) {
    if (cfg.levels < 1) throw ConfigError("levels must be >= 1");
    if (cfg.k < 1 || cfg.l < 1) throw ConfigError("k and l must be >= 1");
    LevelChain chain;
    bool custom = cfg.surface == "custom";
    if (custom) {
        if (cfg.cloud_file.empty() || cfg.mesh_file.empty())
            throw ConfigError("custom surface needs --cloud and --mesh files");
        chain.clouds.push_back(load_xyz(cfg.cloud_file));
        chain.meshes.push_back(load_off(cfg.mesh_file));
    } else {
        chain.clouds.push_back(make_cloud(cfg.surface, 1));
        chain.meshes.push_back(make_seed_mesh(cfg.surface));
    }
    chain.meshes.front().level = 1;
    for (int j = 1; j < cfg.levels; ++j) {
        if (!custom) chain.clouds.push_back(make_cloud(cfg.surface, j + 1));
        const PointCloud& cloud = custom ? chain.clouds.front() : chain.clouds.back();
        chain.meshes.push_back(refine_and_project(chain.meshes[j - 1], cloud, cfg.knn));
        chain.meshes.back().level = j + 1;
    }
    return chain;
}

Manufactured manufactured_solution(const std::string& surface) {
    Manufactured mf;
    if (surface == "sphere") {
        mf.u = [](const Vec3& p) { return p.x() * p.y(); };
        mf.f = [](const Vec3& p) { return 7.0 * p.x() * p.y(); };
        mf.grad = [](const Vec3& p) {
            Vec3 g(p.y(), p.x(), 0.0);
            return Vec3(g - p * p.dot(g)); // p is the unit normal
        };
        return mf;
    }
    if (surface == "torus") {
        const double R = kTorusR, r = kTorusr;
        ExactSurface torus = ExactSurface::torus(R, r);
        mf.u = [](const Vec3& p) { return p.x() - p.y(); };
        mf.f = [R, r](const Vec3& p) {
            double w = std::hypot(p.x(), p.y()); // = R + r cos(theta) on the surface
            double ct = (w - R) / r;
            double A = (p.x() - p.y()) / w;
            return A * ((R * ct + 2.0 * r * ct * ct) / (r * w) + w);
        };
        mf.grad = [torus](const Vec3& p) {
            Vec3 n = torus.normal(p);
            Vec3 g(1.0, -1.0, 0.0);
            return Vec3(g - n * n.dot(g));
        };
        return mf;
    }
    throw ConfigError("no manufactured solution for surface '" + surface + "'");
}

ConvergenceTable run_reconstruct(const StudyConfig& cfg) {
    LevelChain chain = build_levels(cfg);
    ConvergenceTable table;
    bool custom = cfg.surface == "custom";
    for (std::size_t j = 0; j < chain.meshes.size(); ++j) {
        const ReferenceMesh& mesh = chain.meshes[j];
        const PointCloud& cloud = custom ? chain.clouds.front() : chain.clouds[j];
        auto patches = reconstruct_patches(mesh, cloud, cfg.k, study_fit_points(cfg), 1e10,
                                           cfg.newton_tol);
        long dofs = long(mesh.n_triangles()) * poly_space_dim(cfg.k);
        int level = int(j) + 1;
        if (custom) {
            table.add(level, mesh.n_vertices(), dofs, "h", mesh.h, mesh.h);
            continue;
        }
        ExactSurface surface = make_surface(cfg.surface);
        GeoErrorReport geo = geometric_errors(patches, surface);
        JacobianMetricErrors jm = jacobian_metric_errors(patches, surface);
        table.add(level, mesh.n_vertices(), dofs, "e_n", geo.e_n, mesh.h);
        table.add(level, mesh.n_vertices(), dofs, "e_t", geo.e_t, mesh.h);
        table.add(level, mesh.n_vertices(), dofs, "jacobian", jm.jacobian, mesh.h);
        table.add(level, mesh.n_vertices(), dofs, "metric", jm.metric, mesh.h);
    }
    return table;
}

namespace {

AssemblyOptions assembly_options(const StudyConfig& cfg, int l) {
    AssemblyOptions opt;
    opt.beta = cfg.beta >= 0 ? cfg.beta : default_penalty(l);
    opt.quad_boost = cfg.quad_boost;
    opt.expanded_edge_jump = cfg.expanded_edge_jump;
    return opt;
}

} // namespace

ConvergenceTable run_solve(const StudyConfig& cfg) {
    if (cfg.surface != "sphere" && cfg.surface != "torus")
        throw ConfigError("solve study needs a closed analytic surface");
    ExactSurface surface = make_surface(cfg.surface);
    Manufactured mf = manufactured_solution(cfg.surface);
    LevelChain chain = build_levels(cfg);
    ConvergenceTable table;
    AssemblyOptions opt = assembly_options(cfg, cfg.l);
    for (std::size_t j = 0; j < chain.meshes.size(); ++j) {
        const ReferenceMesh& mesh = chain.meshes[j];
        if (!mesh.closed) throw ConfigError("solve study needs a closed mesh");
        auto patches = reconstruct_patches(mesh, chain.clouds[j], cfg.k, study_fit_points(cfg), 1e10,
                                           cfg.newton_tol);
        DGSpace space(mesh, cfg.l);
        AssembledSystem sys = assemble_system(space, patches, mf.f,
                                              RhsMode::AtExactClosestPoint, &surface,
                                              opt);
        VecX u = solve_source(sys);
        SolutionErrors err = solution_errors(space, patches, surface, u, mf.u, mf.grad,
                                             opt.beta, cfg.quad_boost);
        int level = int(j) + 1;
        table.add(level, mesh.n_vertices(), space.n_dofs(), "L2", err.l2, mesh.h);
        table.add(level, mesh.n_vertices(), space.n_dofs(), "H1", err.h1, mesh.h);
        table.add(level, mesh.n_vertices(), space.n_dofs(), "jump", err.jump, mesh.h);
    }
    return table;
}

EigenStudy run_eigen(const StudyConfig& cfg) {
    if (cfg.surface != "sphere" && cfg.surface != "torus")
        throw ConfigError("eigen study needs a closed analytic surface");
    ExactSurface surface = make_surface(cfg.surface);
    bool sphere = cfg.surface == "sphere";
    int count = cfg.eigen_count > 0 ? cfg.eigen_count : (sphere ? 8 : 12);
    LevelChain chain = build_levels(cfg);
    EigenStudy study;
    AssemblyOptions opt = assembly_options(cfg, cfg.l);

    const double c1 = 1.0 / std::sqrt(4.0 * M_PI / 3.0); // L2-normalizer of x_i
    std::vector<std::function<double(const Vec3&)>> uex;
    std::vector<std::function<Vec3(const Vec3&)>> gex;
    for (int d = 0; d < 3; ++d) {
        uex.push_back([d, c1](const Vec3& p) { return c1 * p(d); });
        gex.push_back([d, c1](const Vec3& p) {
            Vec3 e = Vec3::Unit(d);
            return Vec3(c1 * (e - p * p(d)));
        });
    }

    for (std::size_t j = 0; j < chain.meshes.size(); ++j) {
        const ReferenceMesh& mesh = chain.meshes[j];
        auto patches = reconstruct_patches(mesh, chain.clouds[j], cfg.k, study_fit_points(cfg), 1e10,
                                           cfg.newton_tol);
        DGSpace space(mesh, cfg.l);
        AssembledSystem sys = assemble_system<PatchMap>(space, patches, nullptr,
                                                        RhsMode::AtPatchPoint, nullptr,
                                                        opt);
        EigenResult res = solve_eigen(sys, count);
        study.values.push_back(res.values);
        int level = int(j) + 1;
        long dofs = space.n_dofs();
        if (sphere) {
            for (int i = 1; i <= 3; ++i)
                study.table.add(level, mesh.n_vertices(), dofs,
                           "lambda_" + std::to_string(i + 1),
                           std::abs(res.values(i) - 2.0), mesh.h);
            auto ferr = eigenfunction_errors(space, patches, surface,
                                             MatX(res.vectors.middleCols(1, 3)), uex,
                                             gex, cfg.quad_boost);
            for (int i = 0; i < 3; ++i) {
                study.table.add(level, mesh.n_vertices(), dofs,
                           "u_" + std::to_string(i + 2) + "_L2", ferr[i].l2, mesh.h);
                study.table.add(level, mesh.n_vertices(), dofs,
                           "u_" + std::to_string(i + 2) + "_H1", ferr[i].h1, mesh.h);
            }
        } else if (j > 0) {
            auto err = eigenvalue_errors_relative(study.values[j - 1], study.values[j]);
            for (int i = 1; i <= 5; ++i)
                study.table.add(level, mesh.n_vertices(), dofs,
                           "Err_" + std::to_string(i + 1), err[std::size_t(i)], mesh.h);
        }
    }
    return study;
}

} // namespace pcdg
