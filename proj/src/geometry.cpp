#include "pcdg/geometry.hpp"

#include <cmath>
#include <limits>

#include "pcdg/errors.hpp"
#include "pcdg/meshgen.hpp"

namespace pcdg {

LocalFrame build_local_frame(const std::array<Vec3, 3>& tri) {
    Vec3 e1 = tri[1] - tri[0];
    Vec3 e2 = tri[2] - tri[0];
    Vec3 cross = e1.cross(e2);
    double diam = std::max({e1.norm(), e2.norm(), (tri[2] - tri[1]).norm()});
    double area = 0.5 * cross.norm();
    if (area <= 1e-14 * diam * diam)
        throw DegenerateTriangle("build_local_frame: area below threshold");
    LocalFrame f;
    f.origin = (tri[0] + tri[1] + tri[2]) / 3.0;
    f.tangent1 = e1.normalized();
    f.normal = cross.normalized();
    f.tangent2 = f.normal.cross(f.tangent1);
    f.scale = diam;
    return f;
}

double FittedPolynomial::eval(const Vec2& s) const {
    auto exps = monomial_exponents(degree);
    double v = 0.0;
    for (std::size_t j = 0; j < exps.size(); ++j)
        v += coefficients(j) * std::pow(s.x(), exps[j].first) * std::pow(s.y(), exps[j].second);
    return v;
}

Vec2 FittedPolynomial::grad(const Vec2& s) const {
    auto exps = monomial_exponents(degree);
    Vec2 g = Vec2::Zero();
    for (std::size_t j = 0; j < exps.size(); ++j) {
        int p = exps[j].first, q = exps[j].second;
        if (p > 0) g.x() += coefficients(j) * p * std::pow(s.x(), p - 1) * std::pow(s.y(), q);
        if (q > 0) g.y() += coefficients(j) * q * std::pow(s.x(), p) * std::pow(s.y(), q - 1);
    }
    return g;
}

Mat2 FittedPolynomial::hess(const Vec2& s) const {
    auto exps = monomial_exponents(degree);
    Mat2 h = Mat2::Zero();
    for (std::size_t j = 0; j < exps.size(); ++j) {
        int p = exps[j].first, q = exps[j].second;
        double c = coefficients(j);
        if (p > 1) h(0, 0) += c * p * (p - 1) * std::pow(s.x(), p - 2) * std::pow(s.y(), q);
        if (p > 0 && q > 0)
            h(0, 1) += c * p * q * std::pow(s.x(), p - 1) * std::pow(s.y(), q - 1);
        if (q > 1) h(1, 1) += c * q * (q - 1) * std::pow(s.x(), p) * std::pow(s.y(), q - 2);
    }
    h(1, 0) = h(0, 1);
    return h;
}

FittedPolynomial fit_polynomial_samples(const std::vector<Vec2>& s, const VecX& v, int k,
                                        double scale, double cond_bound) {
    int dim = poly_space_dim(k);
    int m = int(s.size());
    if (m < dim) throw InsufficientPoints("fit_polynomial_samples: m < dim P^k");
    auto exps = monomial_exponents(k);
    // Columns built from coordinates scaled by the triangle diameter keep
    // the Vandermonde entries O(1).
    MatX V(m, dim);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < dim; ++j)
            V(i, j) = std::pow(s[i].x() / scale, exps[j].first) *
                      std::pow(s[i].y() / scale, exps[j].second);
    Eigen::ColPivHouseholderQR<MatX> qr(V);
    const auto& R = qr.matrixR();
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < dim; ++j) {
        double d = std::abs(R(j, j));
        rmax = std::max(rmax, d);
        rmin = std::min(rmin, d);
    }
    double cond = rmin > 0 ? rmax / rmin : std::numeric_limits<double>::infinity();
    if (!(cond < cond_bound))
        throw RankDeficientFit("fit_polynomial_samples: conditioning " + std::to_string(cond));
    VecX beta = qr.solve(v);
    FittedPolynomial poly;
    poly.degree = k;
    poly.coefficients.resize(dim);
    for (int j = 0; j < dim; ++j)
        poly.coefficients(j) = beta(j) / std::pow(scale, exps[j].first + exps[j].second);
    if (!poly.coefficients.allFinite())
        throw RankDeficientFit("fit_polynomial_samples: non-finite coefficients");
    poly.condition_estimate = cond;
    return poly;
}

FittedPolynomial fit_patch_polynomial(const PointCloud& cloud, const LocalFrame& frame,
                                      int k, int m, double cond_bound) {
    if (m < poly_space_dim(k))
        throw InsufficientPoints("fit_patch_polynomial: m < dim P^k");
    // Fit-ball radius relative to the frame scale (~ triangle diameter). The
    // quartic extrapolation bias of the fit grows past the sample ball, so
    // the ball must cover the triangle corners; much larger balls trade
    // approximation error for smoothing. 0.75 sits near the optimum.
    constexpr double kFitBallFactor = 0.75;
    auto nbrs = cloud.select_fitting_points(frame.origin, m, true,
                                            kFitBallFactor * frame.scale);
    std::vector<Vec2> s(nbrs.size());
    VecX v(nbrs.size());
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const Vec3& p = cloud.points()[nbrs[i]];
        s[i] = frame.to_plane(p);
        v(i) = frame.normal_coord(p);
    }
    return fit_polynomial_samples(s, v, k, frame.scale, cond_bound);
}

NewtonResult newton_project(const FittedPolynomial& poly, const Vec2& x, double tol,
                            int max_iter) {
    Vec2 psi = x;
    auto residual = [&](const Vec2& u) -> Vec2 {
        double p = poly.eval(u);
        Vec2 dp = poly.grad(u);
        return Vec2(p * dp.x() + u.x() - x.x(), p * dp.y() + u.y() - x.y());
    };
    Vec2 M = residual(psi);
    int it = 0;
    while (M.norm() > tol && it < max_iter) {
        double p = poly.eval(psi);
        Vec2 dp = poly.grad(psi);
        Mat2 d2p = poly.hess(psi);
        Mat2 grad_M = dp * dp.transpose() + p * d2p + Mat2::Identity();
        double det = grad_M.determinant();
        if (std::abs(det) < 1e-14)
            throw NewtonDiverged("newton_project: singular Newton matrix");
        psi -= grad_M.inverse() * M;
        M = residual(psi);
        ++it;
    }
    if (M.norm() > tol)
        throw NewtonDiverged("newton_project: residual " + std::to_string(M.norm()) +
                             " after " + std::to_string(it) + " iterations");
    return {Vec3(psi.x(), psi.y(), poly.eval(psi)), M.norm(), it};
}

PatchMap::PatchMap(int degree, std::vector<Vec3> nodes, LocalFrame frame,
                   std::array<Vec2, 3> tri)
    : degree_(degree), nodes_(std::move(nodes)), frame_(std::move(frame)), tri_(tri) {
    Mat2 B;
    B.col(0) = tri_[1] - tri_[0];
    B.col(1) = tri_[2] - tri_[0];
    to_bary_ = B.inverse();
    bary_off_ = -to_bary_ * tri_[0];
}

Vec3 PatchMap::barycentric(const Vec2& uv) const {
    Vec2 l12 = to_bary_ * uv + bary_off_;
    return {1.0 - l12.x() - l12.y(), l12.x(), l12.y()};
}

Vec3 PatchMap::evaluate(const Vec2& uv) const {
    auto le = lagrange_lattice_eval(degree_, barycentric(uv), false);
    Vec3 p = Vec3::Zero();
    for (std::size_t i = 0; i < nodes_.size(); ++i) p += le.values(i) * nodes_[i];
    return p;
}

MetricData PatchMap::metric_at(const Vec2& uv) const {
    Vec3 lambda = barycentric(uv);
    const double eps = 1e-12;
    for (int c = 0; c < 3; ++c)
        if (lambda(c) < -eps || lambda(c) > 1.0 + eps)
            throw Error("PatchMap::metric_at: point outside parametric triangle");
    auto le = lagrange_lattice_eval(degree_, lambda, true);
    // d lambda / d uv rows: lambda0 = 1 - l1 - l2
    Eigen::Matrix<double, 3, 2> dl;
    dl.row(1) = to_bary_.row(0);
    dl.row(2) = to_bary_.row(1);
    dl.row(0) = -dl.row(1) - dl.row(2);
    MetricData md;
    md.jacobian.setZero();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Eigen::RowVector2d dphi = le.dlambda.row(i) * dl;
        md.jacobian += nodes_[i] * dphi;
    }
    md.metric = md.jacobian.transpose() * md.jacobian;
    double det = md.metric.determinant();
    if (det <= 0.0) throw SingularMetric("PatchMap::metric_at: det g <= 0");
    md.sqrt_det = std::sqrt(det);
    return md;
}

namespace detail {
EdgeGeometry edge_geometry_from_metric(const MetricData& md, const Vec2& tangent,
                                       const Vec2& outward) {
    EdgeGeometry eg;
    eg.l_g = (md.jacobian * tangent).norm();
    Mat2 ginv = md.metric.inverse();
    Vec2 e = ginv * outward;
    double norm2 = outward.dot(e); // = e' g e
    if (!(norm2 > 0)) throw SingularMetric("edge_geometry: non-positive conormal norm");
    eg.conormal_pullback = e / std::sqrt(norm2);
    return eg;
}
} // namespace detail

Vec2 PatchMap::edge_point(int e, double t) const {
    return (1.0 - t) * tri_[e] + t * tri_[(e + 1) % 3];
}

double PatchMap::parametric_edge_length(int e) const {
    return (tri_[(e + 1) % 3] - tri_[e]).norm();
}

EdgeGeometry PatchMap::edge_geometry(int e, double t) const {
    MetricData md = metric_at(edge_point(e, t));
    Vec2 tau = (tri_[(e + 1) % 3] - tri_[e]).normalized();
    Vec2 n(tau.y(), -tau.x());
    Vec2 centroid = (tri_[0] + tri_[1] + tri_[2]) / 3.0;
    if (n.dot(tri_[e] - centroid) < 0) n = -n;
    return detail::edge_geometry_from_metric(md, tau, n);
}

PatchMap build_patch_map(const FittedPolynomial& poly, const LocalFrame& frame,
                         const std::array<Vec2, 3>& tri, int k, double newton_tol,
                         int newton_max_iter) {
    auto lattice = principal_lattice(tri[0], tri[1], tri[2], k);
    std::vector<Vec3> nodes;
    nodes.reserve(lattice.size());
    for (const auto& x : lattice) {
        NewtonResult nr = newton_project(poly, x, newton_tol, newton_max_iter);
        nodes.push_back(frame.from_local(nr.psi.x(), nr.psi.y(), nr.psi.z()));
    }
    return PatchMap(k, std::move(nodes), frame, tri);
}

Vec3 ExactSurface::closest_point(const Vec3& p) const {
    switch (kind_) {
        case Kind::UnitSphere:
            return p / p.norm();
        case Kind::PlaneZ0:
            return {p.x(), p.y(), 0.0};
        case Kind::Torus: {
            double rho = std::hypot(p.x(), p.y());
            Vec3 c = (R_ / rho) * Vec3(p.x(), p.y(), 0.0);
            Vec3 q = p - c;
            return c + (r_ / q.norm()) * q;
        }
    }
    return p;
}

Mat3 ExactSurface::closest_point_jacobian(const Vec3& p) const {
    switch (kind_) {
        case Kind::UnitSphere: {
            Vec3 u = p / p.norm();
            return (Mat3::Identity() - u * u.transpose()) / p.norm();
        }
        case Kind::PlaneZ0: {
            Mat3 J = Mat3::Identity();
            J(2, 2) = 0.0;
            return J;
        }
        case Kind::Torus: {
            double rho = std::hypot(p.x(), p.y());
            Vec3 mhat(p.x() / rho, p.y() / rho, 0.0);
            Mat3 Pxy = Mat3::Zero();
            Pxy(0, 0) = Pxy(1, 1) = 1.0;
            Mat3 Dc = (R_ / rho) * (Pxy - mhat * mhat.transpose());
            Vec3 q = p - (R_ * mhat);
            Vec3 qhat = q / q.norm();
            Mat3 Dq = Mat3::Identity() - Dc;
            return Dc + (r_ / q.norm()) * (Mat3::Identity() - qhat * qhat.transpose()) * Dq;
        }
    }
    return Mat3::Identity();
}

Vec3 ExactSurface::normal(const Vec3& p) const {
    switch (kind_) {
        case Kind::UnitSphere:
            return p.normalized();
        case Kind::PlaneZ0:
            return {0, 0, 1};
        case Kind::Torus: {
            double rho = std::hypot(p.x(), p.y());
            Vec3 c = (R_ / rho) * Vec3(p.x(), p.y(), 0.0);
            return (p - c).normalized();
        }
    }
    return {0, 0, 1};
}

Vec3 ExactPatch::evaluate(const Vec2& uv) const {
    return surface_.closest_point(frame_.from_local(uv.x(), uv.y(), 0.0));
}

MetricData ExactPatch::metric_at(const Vec2& uv) const {
    Vec3 p = frame_.from_local(uv.x(), uv.y(), 0.0);
    Mat3 D = surface_.closest_point_jacobian(p);
    MetricData md;
    md.jacobian.col(0) = D * frame_.tangent1;
    md.jacobian.col(1) = D * frame_.tangent2;
    md.metric = md.jacobian.transpose() * md.jacobian;
    double det = md.metric.determinant();
    if (det <= 0.0) throw SingularMetric("ExactPatch::metric_at: det g <= 0");
    md.sqrt_det = std::sqrt(det);
    return md;
}

Vec2 ExactPatch::edge_point(int e, double t) const {
    return (1.0 - t) * tri_[e] + t * tri_[(e + 1) % 3];
}

EdgeGeometry ExactPatch::edge_geometry(int e, double t) const {
    MetricData md = metric_at(edge_point(e, t));
    Vec2 tau = (tri_[(e + 1) % 3] - tri_[e]).normalized();
    Vec2 n(tau.y(), -tau.x());
    Vec2 centroid = (tri_[0] + tri_[1] + tri_[2]) / 3.0;
    if (n.dot(tri_[e] - centroid) < 0) n = -n;
    return detail::edge_geometry_from_metric(md, tau, n);
}

} // namespace pcdg
