#include "pcdg/basis.hpp"

#include <array>
#include <cmath>

namespace pcdg {

std::vector<std::pair<int, int>> monomial_exponents(int k) {
    std::vector<std::pair<int, int>> exps;
    exps.reserve(poly_space_dim(k));
    for (int d = 0; d <= k; ++d)
        for (int j = 0; j <= d; ++j) // s1^(d-j) s2^j
            exps.emplace_back(d - j, j);
    return exps;
}

namespace {

// Exact monomial moments over the reference triangle:
// int x^p y^q dx dy = p! q! / (p+q+2)!
double ref_moment(int p, int q) {
    double v = 1.0;
    // p! q! / (p+q+2)! computed incrementally to avoid overflow
    for (int i = 1; i <= p + q + 2; ++i) v /= i;
    for (int i = 1; i <= p; ++i) v *= i;
    for (int i = 1; i <= q; ++i) v *= i;
    return v;
}

} // namespace

ModalBasis::ModalBasis(int degree)
    : degree_(degree), dim_(poly_space_dim(degree)), exps_(monomial_exponents(degree)) {
    MatX mass(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            mass(i, j) = ref_moment(exps_[i].first + exps_[j].first,
                                    exps_[i].second + exps_[j].second);
    Eigen::LLT<MatX> llt(mass);
    // basis = L^{-1} * monomials  =>  int basis basis^T = I
    coef_ = llt.matrixL().solve(MatX::Identity(dim_, dim_));
}

VecX ModalBasis::eval(const Vec2& x) const {
    VecX mono(dim_);
    for (int j = 0; j < dim_; ++j)
        mono(j) = std::pow(x.x(), exps_[j].first) * std::pow(x.y(), exps_[j].second);
    return coef_ * mono;
}

MatX ModalBasis::grad(const Vec2& x) const {
    MatX dmono(dim_, 2);
    for (int j = 0; j < dim_; ++j) {
        int p = exps_[j].first, q = exps_[j].second;
        dmono(j, 0) = p == 0 ? 0.0 : p * std::pow(x.x(), p - 1) * std::pow(x.y(), q);
        dmono(j, 1) = q == 0 ? 0.0 : q * std::pow(x.x(), p) * std::pow(x.y(), q - 1);
    }
    return coef_ * dmono;
}

std::vector<std::array<int, 3>> principal_lattice_indices(int k) {
    std::vector<std::array<int, 3>> idx;
    idx.reserve(poly_space_dim(k));
    for (int j = 0; j <= k; ++j)
        for (int i = 0; i <= k - j; ++i)
            idx.push_back({k - i - j, i, j});
    return idx;
}

std::vector<Vec2> principal_lattice(const Vec2& a, const Vec2& b, const Vec2& c, int k) {
    std::vector<Vec2> pts;
    pts.reserve(poly_space_dim(k));
    for (auto& m : principal_lattice_indices(k))
        pts.push_back((m[0] * a + m[1] * b + m[2] * c) / double(k));
    return pts;
}

LagrangeEval lagrange_lattice_eval(int k, const Vec3& lambda, bool with_grad) {
    auto idx = principal_lattice_indices(k);
    int n = int(idx.size());
    LagrangeEval out;
    out.values.resize(n);
    if (with_grad) out.dlambda = MatX::Zero(n, 3);
    for (int node = 0; node < n; ++node) {
        // phi = prod over coords c, a=0..m_c-1 of (k*lambda_c - a)/(m_c - a)
        double val = 1.0;
        std::array<double, 3> dlog{0.0, 0.0, 0.0};
        bool singular = false;
        for (int c = 0; c < 3; ++c) {
            for (int a = 0; a < idx[node][c]; ++a) {
                double factor = (k * lambda(c) - a) / double(idx[node][c] - a);
                val *= factor;
                if (with_grad) {
                    if (std::abs(k * lambda(c) - a) < 1e-300)
                        singular = true;
                    else
                        dlog[c] += k / (k * lambda(c) - a);
                }
            }
        }
        out.values(node) = val;
        if (with_grad) {
            if (!singular) {
                for (int c = 0; c < 3; ++c) out.dlambda(node, c) = val * dlog[c];
            } else {
                // A factor vanishes exactly at this point: fall back to the
                // product-rule expansion for each coordinate separately.
                for (int c = 0; c < 3; ++c) {
                    double sum = 0.0;
                    for (int a0 = 0; a0 < idx[node][c]; ++a0) {
                        double term = k / double(idx[node][c] - a0);
                        for (int c2 = 0; c2 < 3; ++c2)
                            for (int a = 0; a < idx[node][c2]; ++a) {
                                if (c2 == c && a == a0) continue;
                                term *= (k * lambda(c2) - a) / double(idx[node][c2] - a);
                            }
                        sum += term;
                    }
                    out.dlambda(node, c) = sum;
                }
            }
        }
    }
    return out;
}

} // namespace pcdg
