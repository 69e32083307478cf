#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <functional>
#include <vector>

namespace phasesep {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Sparse LU factorization that reports failure through phasesep::Error.
class SparseFactor {
public:
    SparseFactor() = default;
    explicit SparseFactor(const SpMat& matrix) { factor(matrix); }

    /// Factor the matrix; throws SingularOperator when the factorization fails.
    void factor(const SpMat& matrix);
    Vec solve(const Vec& rhs) const;
    Vec solve_transpose(const Vec& rhs) const;
    Eigen::Index size() const { return n_; }
    bool ready() const { return n_ > 0; }

private:
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    Eigen::Index n_ = 0;
};

/// Hager/Higham estimate of the 1-norm condition number of a factored matrix.
double condition_estimate_1norm(const SpMat& matrix, const SparseFactor& factor);

struct GmresResult {
    Vec x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

/// Restarted GMRES for a matrix-free linear operator.
GmresResult gmres(const std::function<Vec(const Vec&)>& apply, const Vec& rhs, double rel_tol,
                  int restart, int max_iterations, const Vec* x0 = nullptr);

double sup_norm(const Vec& v);

}  // namespace phasesep
