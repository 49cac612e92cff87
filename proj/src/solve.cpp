#include "pcdg/solve.hpp"

#include <random>

#include "pcdg/errors.hpp"

namespace pcdg {

VecX solve_source(const SpMat& A, const VecX& b) {
    Eigen::SimplicialLDLT<SpMat> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw NotPositiveDefinite("solve_source: factorization failed");
    if (ldlt.vectorD().minCoeff() <= 0.0)
        throw NotPositiveDefinite("solve_source: A is not positive definite");
    VecX u = ldlt.solve(b);
    double bn = b.norm();
    // A few steps of iterative refinement recover the digits a single
    // factorized solve loses on badly conditioned fine-level systems.
    for (int it = 0; it < 3 && bn > 0; ++it) {
        VecX r = b - A * u;
        if (r.norm() <= 1e-12 * bn) break;
        u += ldlt.solve(r);
    }
    if (bn > 0 && (A * u - b).norm() > 1e-10 * bn)
        throw SolverStagnation("solve_source: direct solve residual too large");
    return u;
}

VecX solve_source(const AssembledSystem& system) {
    return solve_source(system.A, system.b);
}

namespace {

VecX pair_residuals(const SpMat& A, const SpMat& M, const VecX& mu, const MatX& X) {
    VecX r(mu.size());
    for (int i = 0; i < mu.size(); ++i)
        r(i) = (A * X.col(i) - mu(i) * (M * X.col(i))).norm();
    return r;
}

EigenResult dense_eigen(const SpMat& A, const SpMat& M, int count) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatX> es{MatX(A), MatX(M)};
    if (es.info() != Eigen::Success)
        throw SolverStagnation("solve_eigen: dense generalized solve failed");
    EigenResult res;
    VecX mu = es.eigenvalues().head(count);
    res.vectors = es.eigenvectors().leftCols(count);
    res.residual_norms = pair_residuals(A, M, mu, res.vectors);
    res.values = mu.array() - 1.0;
    return res;
}

EigenResult shift_invert_eigen(const SpMat& A, const SpMat& M, int count,
                               const EigenOptions& opt) {
    int n = int(A.rows());
    int p = std::min(n, count + std::max(8, count / 2));
    SpMat K = A - opt.shift * M;
    Eigen::SimplicialLDLT<SpMat> ldlt(K);
    if (ldlt.info() != Eigen::Success)
        throw SolverStagnation("solve_eigen: shifted factorization failed");
    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatX X(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = gauss(rng);
    VecX mu = VecX::Zero(p);
    for (int it = 0; it < opt.max_iter; ++it) {
        MatX Y = ldlt.solve(M * X);
        MatX G = Y.transpose() * (M * Y);
        Eigen::LLT<MatX> chol(G);
        if (chol.info() != Eigen::Success)
            throw SolverStagnation("solve_eigen: subspace became rank deficient");
        chol.matrixU().solveInPlace<Eigen::OnTheRight>(Y);
        MatX Ar = Y.transpose() * (A * Y);
        Eigen::SelfAdjointEigenSolver<MatX> es((Ar + Ar.transpose()) / 2.0);
        X = Y * es.eigenvectors();
        mu = es.eigenvalues();
        VecX r = pair_residuals(A, M, mu.head(count), X.leftCols(count));
        // Per-pair scale ||A x_i||: keeps the criterion meaningful whatever
        // the global norm of A is on fine levels.
        double scale = 0.0;
        for (int i = 0; i < count; ++i)
            scale = std::max(scale, (A * X.col(i)).norm());
        if (r.maxCoeff() <= opt.tol * scale) {
            EigenResult res;
            res.values = mu.head(count).array() - 1.0;
            res.vectors = X.leftCols(count);
            res.residual_norms = r;
            return res;
        }
    }
    throw SolverStagnation("solve_eigen: no convergence after " +
                           std::to_string(opt.max_iter) + " iterations");
}

} // namespace

EigenResult solve_eigen(const SpMat& A, const SpMat& M, int count,
                        const EigenOptions& opt) {
    if (count < 1 || count > A.rows())
        throw ConfigError("solve_eigen: count out of range");
    if (A.rows() <= opt.dense_threshold) return dense_eigen(A, M, count);
    return shift_invert_eigen(A, M, count, opt);
}

EigenResult solve_eigen(const AssembledSystem& system, int count,
                        const EigenOptions& opt) {
    return solve_eigen(system.A, system.M, count, opt);
}

} // namespace pcdg
