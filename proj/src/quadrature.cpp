#include "pcdg/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace pcdg {

GaussRule gauss_legendre_01(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_01: n >= 1 required");
    GaussRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    // Nodes on [-1,1] by Newton iteration on P_n, then mapped to [0,1].
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.points[i] = 0.5 * (x + 1.0);
        rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

TriangleRule triangle_rule(int degree) {
    if (degree < 0) throw std::invalid_argument("triangle_rule: degree >= 0 required");
    // Collapsed product rule: (a,b) in [0,1]^2 -> (a, b(1-a)), Jacobian (1-a).
    // The a-integrand has degree <= degree+1, the b-integrand degree <= degree.
    int n = (degree + 3) / 2; // 2n-1 >= degree+1 covers the extra (1-a) factor
    GaussRule g = gauss_legendre_01(n);
    TriangleRule rule;
    rule.degree = degree;
    rule.points.reserve(n * n);
    rule.weights.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double a = g.points[i], b = g.points[j];
            rule.points.emplace_back(a, b * (1.0 - a));
            rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - a));
        }
    }
    return rule;
}

} // namespace pcdg
