#include "phasesep/linalg.hpp"

#include "phasesep/error.hpp"

#include <cmath>

namespace phasesep {

void SparseFactor::factor(const SpMat& matrix) {
    require(matrix.rows() == matrix.cols() && matrix.rows() > 0, ErrorKind::InvalidInput,
            "sparse factor needs a nonempty square matrix");
    SpMat compressed = matrix;
    compressed.makeCompressed();
    lu_.analyzePattern(compressed);
    lu_.factorize(compressed);
    if (lu_.info() != Eigen::Success) {
        n_ = 0;
        fail(ErrorKind::SingularOperator, "sparse LU factorization failed: " + lu_.lastErrorMessage());
    }
    n_ = matrix.rows();
}

Vec SparseFactor::solve(const Vec& rhs) const {
    require(rhs.size() == n_, ErrorKind::InvalidInput, "right-hand side size mismatch");
    Vec x = lu_.solve(rhs);
    return x;
}

Vec SparseFactor::solve_transpose(const Vec& rhs) const {
    require(rhs.size() == n_, ErrorKind::InvalidInput, "right-hand side size mismatch");
    auto& lu = const_cast<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>&>(lu_);
    Vec x = lu.transpose().solve(rhs);
    return x;
}

double condition_estimate_1norm(const SpMat& matrix, const SparseFactor& factor) {
    const Eigen::Index n = matrix.rows();
    double norm_a = 0.0;
    for (Eigen::Index k = 0; k < matrix.outerSize(); ++k) {
        double col = 0.0;
        for (SpMat::InnerIterator it(matrix, k); it; ++it) col += std::abs(it.value());
        norm_a = std::max(norm_a, col);
    }
    Vec x = Vec::Constant(n, 1.0 / static_cast<double>(n));
    double estimate = 0.0;
    Eigen::Index last_index = -1;
    for (int iter = 0; iter < 5; ++iter) {
        Vec y = factor.solve(x);
        estimate = y.lpNorm<1>();
        Vec xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        Vec z = factor.solve_transpose(xi);
        Eigen::Index j = 0;
        double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= z.dot(x) || j == last_index) break;
        last_index = j;
        x.setZero();
        x(j) = 1.0;
    }
    return estimate * norm_a;
}

GmresResult gmres(const std::function<Vec(const Vec&)>& apply, const Vec& rhs, double rel_tol,
                  int restart, int max_iterations, const Vec* x0) {
    const Eigen::Index n = rhs.size();
    GmresResult result;
    result.x = x0 ? *x0 : Vec::Zero(n);
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        result.x.setZero();
        result.converged = true;
        return result;
    }
    restart = std::max(1, std::min<int>(restart, static_cast<int>(n)));
    int total = 0;
    while (total < max_iterations) {
        Vec r = rhs - apply(result.x);
        double beta = r.norm();
        result.relative_residual = beta / rhs_norm;
        if (result.relative_residual <= rel_tol) {
            result.converged = true;
            break;
        }
        Eigen::MatrixXd V(n, restart + 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(restart + 1, restart);
        Vec cs = Vec::Zero(restart), sn = Vec::Zero(restart);
        Vec g = Vec::Zero(restart + 1);
        g(0) = beta;
        V.col(0) = r / beta;
        int k = 0;
        for (; k < restart && total < max_iterations; ++k, ++total) {
            Vec w = apply(V.col(k));
            for (int pass = 0; pass < 2; ++pass) {
                for (int i = 0; i <= k; ++i) {
                    double hik = V.col(i).dot(w);
                    H(i, k) += hik;
                    w -= hik * V.col(i);
                }
            }
            H(k + 1, k) = w.norm();
            if (H(k + 1, k) > 0.0) V.col(k + 1) = w / H(k + 1, k);
            for (int i = 0; i < k; ++i) {
                double tmp = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
                H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
                H(i, k) = tmp;
            }
            double denom = std::hypot(H(k, k), H(k + 1, k));
            cs(k) = denom > 0.0 ? H(k, k) / denom : 1.0;
            sn(k) = denom > 0.0 ? H(k + 1, k) / denom : 0.0;
            H(k, k) = denom;
            H(k + 1, k) = 0.0;
            g(k + 1) = -sn(k) * g(k);
            g(k) = cs(k) * g(k);
            result.relative_residual = std::abs(g(k + 1)) / rhs_norm;
            if (result.relative_residual <= rel_tol || denom == 0.0) {
                ++k;
                ++total;
                break;
            }
        }
        Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        result.x += V.leftCols(k) * y;
        result.iterations = total;
    }
    Vec r = rhs - apply(result.x);
    result.relative_residual = r.norm() / rhs_norm;
    result.converged = result.relative_residual <= rel_tol * 10.0;
    result.iterations = total;
    return result;
}

double sup_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace phasesep
