#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcdg/dgcore.hpp"
#include "pcdg/solve.hpp"

namespace pcdg {

/// Nodal reconstruction errors against the analytic surface: e_n is the max
/// full nodal distance |psi - xi| with xi the exact closest point, e_t its
/// in-plane (local frame) component.
struct GeoErrorReport {
    double e_n = 0.0;
    double e_t = 0.0;
};

GeoErrorReport geometric_errors(const std::vector<PatchMap>& patches,
                                const ExactSurface& surface);

/// Max-norm discrepancies of the patch Jacobian and metric tensor against
/// the analytic closest-point map, sampled at interior quadrature points.
struct JacobianMetricErrors {
    double jacobian = 0.0; // max ||dpi - dpi_h||_F
    double metric = 0.0;   // max ||g - g_h||_F
};

JacobianMetricErrors jacobian_metric_errors(const std::vector<PatchMap>& patches,
                                            const ExactSurface& surface,
                                            int sample_degree = 4);

struct SolutionErrors {
    double l2 = 0.0;
    double h1 = 0.0;   // broken H1 seminorm of the surface-gradient mismatch
    double jump = 0.0; // sqrt of (beta/h) sum of weighted squared edge jumps
};

/// Pointwise comparison of the discrete solution against exact fields, both
/// transported from the same parametric points: values via the analytic
/// closest-point map, discrete surface gradients via the patch pushforward.
template <class Patch>
SolutionErrors solution_errors(const DGSpace& space, const std::vector<Patch>& patches,
                               const ExactSurface& surface, const VecX& u_h,
                               const std::function<double(const Vec3&)>& u_exact,
                               const std::function<Vec3(const Vec3&)>& grad_exact,
                               double beta = -1.0, int quad_boost = 2);

/// Eigenvalue groups by relative gap: consecutive values within rel_tol of
/// each other share a group; returns [begin, end) index pairs.
std::vector<std::pair<int, int>> group_eigenvalues(const VecX& values, double rel_tol);

/// Per-index errors against a known exact spectrum.
std::vector<double> eigenvalue_errors_exact(const VecX& values,
                                            const std::vector<double>& exact);

/// Two-level relative errors Err_i = |fine_i - coarse_i| / |fine_i|. When
/// group_rel_tol > 0 the multiplicity structures of both levels must agree.
std::vector<double> eigenvalue_errors_relative(const VecX& coarse, const VecX& fine,
                                               double group_rel_tol = -1.0);

struct EigenfunctionError {
    double l2 = 0.0;
    double h1 = 0.0;
};

/// L2/H1 errors of a group of discrete eigenfunctions against the exact
/// eigenspace, after orthogonal (Procrustes) alignment of the exact basis
/// within the group. Exact fields must be L2(Gamma)-orthonormal.
template <class Patch>
std::vector<EigenfunctionError> eigenfunction_errors(
    const DGSpace& space, const std::vector<Patch>& patches, const ExactSurface& surface,
    const MatX& vectors, const std::vector<std::function<double(const Vec3&)>>& u_exact,
    const std::vector<std::function<Vec3(const Vec3&)>>& grad_exact, int quad_boost = 2);

/// Level-by-level error rows with observed orders
/// log(e_prev/e) / log(h_prev/h) between consecutive rows of one metric.
struct ConvergenceTable {
    struct Row {
        int level;
        long n_v;
        long dofs;
        std::string metric;
        double error;
        double h;
        std::optional<double> order;
    };
    std::vector<Row> rows;

    void add(int level, long n_v, long dofs, const std::string& metric, double error,
             double h);
    std::optional<double> final_order(const std::string& metric) const;
    double final_error(const std::string& metric) const;
    std::string csv() const;
    void write_csv(const std::string& path) const;
};

} // namespace pcdg
