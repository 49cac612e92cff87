#pragma once

#include <vector>

#include "pcdg/types.hpp"

namespace pcdg {

/// Gauss-Legendre rule on [0,1]; exact for polynomials of degree 2n-1.
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;
};

GaussRule gauss_legendre_01(int n);

/// Quadrature on the reference triangle (0,0),(1,0),(0,1), built as a
/// collapsed Gauss-Legendre product rule. Weights are positive and sum to
/// the reference measure 1/2; monomials up to `degree` integrate exactly.
struct TriangleRule {
    int degree = 0;
    std::vector<Vec2> points;
    std::vector<double> weights;
};

TriangleRule triangle_rule(int degree);

} // namespace pcdg
