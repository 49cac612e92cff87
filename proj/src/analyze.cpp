#include "pcdg/analyze.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pcdg/errors.hpp"
#include "pcdg/quadrature.hpp"

namespace pcdg {

GeoErrorReport geometric_errors(const std::vector<PatchMap>& patches,
                                const ExactSurface& surface) {
    GeoErrorReport rep;
    for (const auto& pm : patches) {
        for (const Vec3& psi : pm.nodes()) {
            Vec3 xi = surface.closest_point(psi);
            Vec3 d = psi - xi;
            rep.e_n = std::max(rep.e_n, d.norm());
            Vec2 dt(d.dot(pm.frame().tangent1), d.dot(pm.frame().tangent2));
            rep.e_t = std::max(rep.e_t, dt.norm());
        }
    }
    return rep;
}

JacobianMetricErrors jacobian_metric_errors(const std::vector<PatchMap>& patches,
                                            const ExactSurface& surface,
                                            int sample_degree) {
    TriangleRule rule = triangle_rule(sample_degree);
    JacobianMetricErrors err;
    for (const auto& pm : patches) {
        const auto& tri = pm.parametric_triangle();
        Mat2 B;
        B.col(0) = tri[1] - tri[0];
        B.col(1) = tri[2] - tri[0];
        for (const Vec2& x : rule.points) {
            Vec2 uv = tri[0] + B * x;
            MetricData mh = pm.metric_at(uv);
            // The exact comparison map is the closest-point projection of the
            // reconstructed patch, so its Jacobian is the chain rule through
            // the projection.
            Mat3 D = surface.closest_point_jacobian(pm.evaluate(uv));
            Eigen::Matrix<double, 3, 2> je = D * mh.jacobian;
            Mat2 ge = je.transpose() * je;
            err.jacobian = std::max(err.jacobian, (mh.jacobian - je).norm());
            err.metric = std::max(err.metric, (mh.metric - ge).norm());
        }
    }
    return err;
}

template <class Patch>
SolutionErrors solution_errors(const DGSpace& space, const std::vector<Patch>& patches,
                               const ExactSurface& surface, const VecX& u_h,
                               const std::function<double(const Vec3&)>& u_exact,
                               const std::function<Vec3(const Vec3&)>& grad_exact,
                               double beta, int quad_boost) {
    const ReferenceMesh& mesh = space.mesh();
    int l = space.degree();
    if (beta < 0) beta = default_penalty(l);
    TriangleRule rule = triangle_rule(2 * l + 6 + quad_boost);
    double l2 = 0.0, h1 = 0.0, jump = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementDomain& dom = space.domain(t);
        ExactPatch ep(surface, dom.frame, dom.tri);
        Mat2 B;
        B.col(0) = dom.tri[1] - dom.tri[0];
        B.col(1) = dom.tri[2] - dom.tri[0];
        double jac = std::abs(B.determinant());
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            Vec2 uv = dom.tri[0] + B * rule.points[q];
            MetricData me = ep.metric_at(uv);
            Vec3 x = ep.evaluate(uv);
            double w = rule.weights[q] * jac * me.sqrt_det;
            double du = space.value(u_h, t, uv) - u_exact(x);
            l2 += w * du * du;
            MetricData mh = patches[t].metric_at(uv);
            Vec3 gh = mh.jacobian * (mh.metric.inverse() * space.gradient(u_h, t, uv));
            h1 += w * (gh - grad_exact(x)).squaredNorm();
        }
    }
    GaussRule erule = gauss_legendre_01(l + 2 + (quad_boost + 1) / 2);
    for (const auto& rec : mesh.edges) {
        if (rec.tri[1] < 0) continue;
        double elen = (mesh.vertices[rec.v1] - mesh.vertices[rec.v0]).norm();
        double side_val[2], side_lg[2];
        for (std::size_t q = 0; q < erule.points.size(); ++q) {
            for (int s = 0; s < 2; ++s) {
                int t = rec.tri[s], le = rec.local_edge[s];
                bool flip = mesh.triangles[t][le] != rec.v0;
                double st = flip ? 1.0 - erule.points[q] : erule.points[q];
                const ElementDomain& dom = space.domain(t);
                Vec2 uv = (1.0 - st) * dom.tri[le] + st * dom.tri[(le + 1) % 3];
                side_val[s] = space.value(u_h, t, uv);
                side_lg[s] = patches[t].edge_geometry(le, st).l_g;
            }
            double j = side_val[0] - side_val[1];
            jump += (beta / mesh.h) * erule.weights[q] * elen *
                    0.5 * (side_lg[0] + side_lg[1]) * j * j;
        }
    }
    return {std::sqrt(l2), std::sqrt(h1), std::sqrt(jump)};
}

std::vector<std::pair<int, int>> group_eigenvalues(const VecX& values, double rel_tol) {
    std::vector<std::pair<int, int>> groups;
    int n = int(values.size());
    int begin = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || std::abs(values(i) - values(i - 1)) >
                          rel_tol * std::max(1.0, std::abs(values(i)))) {
            groups.emplace_back(begin, i);
            begin = i;
        }
    }
    return groups;
}

std::vector<double> eigenvalue_errors_exact(const VecX& values,
                                            const std::vector<double>& exact) {
    if (std::size_t(values.size()) < exact.size())
        throw ConfigError("eigenvalue_errors_exact: too few computed values");
    std::vector<double> err(exact.size());
    for (std::size_t i = 0; i < exact.size(); ++i)
        err[i] = std::abs(values(int(i)) - exact[i]);
    return err;
}

std::vector<double> eigenvalue_errors_relative(const VecX& coarse, const VecX& fine,
                                               double group_rel_tol) {
    int n = int(std::min(coarse.size(), fine.size()));
    if (group_rel_tol > 0) {
        auto gc = group_eigenvalues(coarse.head(n), group_rel_tol);
        auto gf = group_eigenvalues(fine.head(n), group_rel_tol);
        if (gc.size() != gf.size())
            throw MultiplicityMismatch("eigenvalue groups differ between levels");
        for (std::size_t g = 0; g < gc.size(); ++g)
            if (gc[g].second - gc[g].first != gf[g].second - gf[g].first)
                throw MultiplicityMismatch("eigenvalue group sizes differ between levels");
    }
    std::vector<double> err(n);
    for (int i = 0; i < n; ++i)
        err[i] = std::abs(fine(i) - coarse(i)) / std::abs(fine(i));
    return err;
}

template <class Patch>
std::vector<EigenfunctionError> eigenfunction_errors(
    const DGSpace& space, const std::vector<Patch>& patches, const ExactSurface& surface,
    const MatX& vectors, const std::vector<std::function<double(const Vec3&)>>& u_exact,
    const std::vector<std::function<Vec3(const Vec3&)>>& grad_exact, int quad_boost) {
    int m = int(vectors.cols());
    if (int(u_exact.size()) != m || int(grad_exact.size()) != m)
        throw ConfigError("eigenfunction_errors: group sizes disagree");
    const ReferenceMesh& mesh = space.mesh();
    TriangleRule rule = triangle_rule(2 * space.degree() + 6 + quad_boost);

    // Cross-Gram C_ij = <u_h,i, u_ex,j> over the exact surface measure.
    MatX C = MatX::Zero(m, m);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementDomain& dom = space.domain(t);
        ExactPatch ep(surface, dom.frame, dom.tri);
        Mat2 B;
        B.col(0) = dom.tri[1] - dom.tri[0];
        B.col(1) = dom.tri[2] - dom.tri[0];
        double jac = std::abs(B.determinant());
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            Vec2 uv = dom.tri[0] + B * rule.points[q];
            MetricData me = ep.metric_at(uv);
            Vec3 x = ep.evaluate(uv);
            double w = rule.weights[q] * jac * me.sqrt_det;
            for (int i = 0; i < m; ++i) {
                double vh = space.value(vectors.col(i), t, uv);
                for (int j = 0; j < m; ++j) C(i, j) += w * vh * u_exact[j](x);
            }
        }
    }
    // Orthogonal polar factor: the exact basis rotated by Q best matches u_h.
    Eigen::JacobiSVD<MatX> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
    MatX Q = svd.matrixU() * svd.matrixV().transpose();

    std::vector<EigenfunctionError> errs(m);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const ElementDomain& dom = space.domain(t);
        ExactPatch ep(surface, dom.frame, dom.tri);
        Mat2 B;
        B.col(0) = dom.tri[1] - dom.tri[0];
        B.col(1) = dom.tri[2] - dom.tri[0];
        double jac = std::abs(B.determinant());
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            Vec2 uv = dom.tri[0] + B * rule.points[q];
            MetricData me = ep.metric_at(uv);
            Vec3 x = ep.evaluate(uv);
            double w = rule.weights[q] * jac * me.sqrt_det;
            MetricData mh = patches[t].metric_at(uv);
            for (int i = 0; i < m; ++i) {
                double ve = 0.0;
                Vec3 ge = Vec3::Zero();
                for (int j = 0; j < m; ++j) {
                    ve += Q(i, j) * u_exact[j](x);
                    ge += Q(i, j) * grad_exact[j](x);
                }
                double du = space.value(vectors.col(i), t, uv) - ve;
                errs[i].l2 += w * du * du;
                Vec3 gh = mh.jacobian *
                          (mh.metric.inverse() * space.gradient(vectors.col(i), t, uv));
                errs[i].h1 += w * (gh - ge).squaredNorm();
            }
        }
    }
    for (auto& e : errs) {
        e.l2 = std::sqrt(e.l2);
        e.h1 = std::sqrt(e.h1);
    }
    return errs;
}

void ConvergenceTable::add(int level, long n_v, long dofs, const std::string& metric,
                           double error, double h) {
    std::optional<double> order;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (it->metric == metric) {
            if (error > 0 && it->error > 0 && h < it->h)
                order = std::log(it->error / error) / std::log(it->h / h);
            break;
        }
    }
    rows.push_back({level, n_v, dofs, metric, error, h, order});
}

std::optional<double> ConvergenceTable::final_order(const std::string& metric) const {
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
        if (it->metric == metric) return it->order;
    return std::nullopt;
}

double ConvergenceTable::final_error(const std::string& metric) const {
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
        if (it->metric == metric) return it->error;
    throw ConfigError("ConvergenceTable: no rows for metric " + metric);
}

namespace {
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}
} // namespace

std::string ConvergenceTable::csv() const {
    std::ostringstream os;
    os << "level,N_v,dofs,metric,error,order\r\n";
    for (const auto& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.8e", r.error);
        os << r.level << ',' << r.n_v << ',' << r.dofs << ',' << csv_field(r.metric)
           << ',' << buf << ',';
        if (r.order) {
            std::snprintf(buf, sizeof buf, "%.3f", *r.order);
            os << buf;
        }
        os << "\r\n";
    }
    return os.str();
}

void ConvergenceTable::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << csv();
}

template SolutionErrors solution_errors<PatchMap>(
    const DGSpace&, const std::vector<PatchMap>&, const ExactSurface&, const VecX&,
    const std::function<double(const Vec3&)>&, const std::function<Vec3(const Vec3&)>&,
    double, int);
template SolutionErrors solution_errors<ExactPatch>(
    const DGSpace&, const std::vector<ExactPatch>&, const ExactSurface&, const VecX&,
    const std::function<double(const Vec3&)>&, const std::function<Vec3(const Vec3&)>&,
    double, int);
template std::vector<EigenfunctionError> eigenfunction_errors<PatchMap>(
    const DGSpace&, const std::vector<PatchMap>&, const ExactSurface&, const MatX&,
    const std::vector<std::function<double(const Vec3&)>>&,
    const std::vector<std::function<Vec3(const Vec3&)>>&, int);
template std::vector<EigenfunctionError> eigenfunction_errors<ExactPatch>(
    const DGSpace&, const std::vector<ExactPatch>&, const ExactSurface&, const MatX&,
    const std::vector<std::function<double(const Vec3&)>>&,
    const std::vector<std::function<Vec3(const Vec3&)>>&, int);

} // namespace pcdg
