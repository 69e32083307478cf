#include "phasesep/spectral.hpp"

#include "phasesep/curve.hpp"
#include "phasesep/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace phasesep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<std::complex<double>> forward(const Vec& f) {
    Eigen::FFT<double> fft;
    std::vector<double> in(f.data(), f.data() + f.size());
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    return out;
}

Vec inverse(std::vector<std::complex<double>> spectrum) {
    Eigen::FFT<double> fft;
    std::vector<double> out;
    fft.inv(out, spectrum);
    return Eigen::Map<Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

int wavenumber(int j, int n) { return j <= n / 2 ? j : j - n; }

}  // namespace

Vec periodic_derivative(const Vec& f, double L, int order) {
    const int n = static_cast<int>(f.size());
    auto spec = forward(f);
    for (int j = 0; j < n; ++j) {
        const int m = wavenumber(j, n);
        if (2 * j == n && order % 2 == 1) {
            spec[j] = 0.0;
            continue;
        }
        const std::complex<double> ik(0.0, kTwoPi * m / L);
        spec[j] *= std::pow(ik, order);
    }
    return inverse(std::move(spec));
}

Vec periodic_integral(const Vec& f, double L) {
    const int n = static_cast<int>(f.size());
    auto spec = forward(f);
    const double mean = spec[0].real() / n;
    spec[0] = 0.0;
    if (n % 2 == 0) spec[n / 2] = 0.0;
    for (int j = 1; j < n; ++j) {
        if (2 * j == n) continue;
        const std::complex<double> ik(0.0, kTwoPi * wavenumber(j, n) / L);
        spec[j] /= ik;
    }
    Vec g = inverse(std::move(spec));
    g.array() -= g(0);
    for (int j = 0; j < n; ++j) g(j) += mean * L * j / n;
    return g;
}

LiouvilleForm liouville_transform(const Vec& b, double L) {
    const int n = static_cast<int>(b.size());
    require(n >= 8 && L > 0.0, ErrorKind::InvalidInput, "Liouville transform needs at least 8 samples");
    require(b.minCoeff() > 0.0, ErrorKind::NonPositiveWeight, "weight b must be positive");
    const Vec g = b.array().sqrt();
    const Vec gy = periodic_derivative(g, L).cwiseQuotient(b);
    const Vec gyy = periodic_derivative(gy, L).cwiseQuotient(b);
    const Vec q_s = gyy.cwiseQuotient(g);
    const Vec y_s = periodic_integral(b, L);

    LiouvilleForm out;
    out.length = b.mean() * L;
    std::vector<double> knots(y_s.data(), y_s.data() + n);
    std::vector<double> values(q_s.data(), q_s.data() + n);
    const PeriodicSpline spline(std::move(knots), out.length, std::move(values));
    out.y.resize(n);
    out.q.resize(n);
    for (int j = 0; j < n; ++j) {
        out.y(j) = out.length * j / n;
        out.q(j) = spline.value(out.y(j));
    }
    out.q_mean = out.q.mean();
    return out;
}

double ModeBasis::omega(int k) const {
    require(std::abs(k) <= K, ErrorKind::InvalidInput, "mode index outside the basis");
    return std::sqrt(std::max(0.0, omega2(k + K)));
}

double ModeBasis::weyl_ratio(int k) const {
    require(k != 0, ErrorKind::InvalidInput, "Weyl ratio undefined for k = 0");
    return omega(k) * ell0 / (kTwoPi * std::abs(k));
}

Vec ModeBasis::project(const Vec& u) const {
    require(u.size() == b.size(), ErrorKind::InvalidInput, "trace does not match the basis samples");
    const double w = L / samples();
    const Vec weighted = (u.array() * b.array().square()).matrix() * w;
    return psi.transpose() * weighted;
}

Eigen::MatrixXd ModeBasis::gram() const {
    const double w = L / samples();
    const Eigen::MatrixXd scaled = b.array().square().matrix().asDiagonal() * psi;
    return w * psi.transpose() * scaled;
}

double ModeBasis::sup_bound() const { return psi.cwiseAbs().maxCoeff(); }

ModeBasis eigenbasis(const Vec& b, double L, int K) {
    const int n = static_cast<int>(b.size());
    require(K >= 1, ErrorKind::InvalidInput, "mode cutoff K must be at least 1");
    require(n >= 8 * K, ErrorKind::InvalidInput, "eigenbasis needs at least 8K samples");
    require(L > 0.0, ErrorKind::InvalidInput, "curve length must be positive");
    require(b.minCoeff() > 0.0, ErrorKind::NonPositiveWeight, "weight b must be positive");

    const int M = std::min(n / 2 - 1, 2 * K + 32);
    const int dim = 2 * M + 1;
    Eigen::MatrixXd phi(n, dim);
    Vec stiffness(dim);
    const double c0 = 1.0 / std::sqrt(L), c1 = std::sqrt(2.0 / L);
    for (int j = 0; j < n; ++j) {
        const double s = L * j / n;
        phi(j, 0) = c0;
        for (int m = 1; m <= M; ++m) {
            const double a = kTwoPi * m * s / L;
            phi(j, 2 * m - 1) = c1 * std::cos(a);
            phi(j, 2 * m) = c1 * std::sin(a);
        }
    }
    stiffness(0) = 0.0;
    for (int m = 1; m <= M; ++m) stiffness(2 * m - 1) = stiffness(2 * m) = std::pow(kTwoPi * m / L, 2);
    const Vec w = b.array().square().matrix() * (L / n);
    const Eigen::MatrixXd mass = phi.transpose() * (w.asDiagonal() * phi);
    const Eigen::MatrixXd S = stiffness.asDiagonal();

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(S, mass,
                                                                     Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) fail(ErrorKind::EigSolverFailure, "generalized eigensolver failed");

    ModeBasis out;
    out.b = b;
    out.L = L;
    out.K = K;
    out.ell0 = b.cwiseAbs().mean() * L;
    out.galerkin_size = dim;
    out.omega2.resize(2 * K + 1);
    out.psi.resize(n, 2 * K + 1);
    for (int idx = 0; idx <= 2 * K; ++idx) {
        const int k = idx == 0 ? 0 : (idx % 2 == 1 ? -(idx + 1) / 2 : idx / 2);
        Vec v = solver.eigenvectors().col(idx);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        out.omega2(k + K) = idx == 0 ? 0.0 : solver.eigenvalues()(idx);
        out.psi.col(k + K) = phi * v;
    }
    if (std::abs(solver.eigenvalues()(0)) > 1e-8 * std::max(1.0, solver.eigenvalues()(1)))
        fail(ErrorKind::EigSolverFailure, "constant mode not found in the kernel");
    return out;
}

Vec normal_form_eigenvalues(const LiouvilleForm& form, int count) {
    const int n = static_cast<int>(form.q.size());
    require(count >= 1 && 2 * count < n, ErrorKind::InvalidInput, "too many normal-form eigenvalues requested");
    const double L = form.length;
    const int M = std::min(n / 2 - 1, count + 32);
    const int dim = 2 * M + 1;
    Eigen::MatrixXd phi(n, dim);
    const double c0 = 1.0 / std::sqrt(L), c1 = std::sqrt(2.0 / L);
    Vec stiffness(dim);
    stiffness(0) = 0.0;
    for (int j = 0; j < n; ++j) {
        const double y = L * j / n;
        phi(j, 0) = c0;
        for (int m = 1; m <= M; ++m) {
            const double a = kTwoPi * m * y / L;
            phi(j, 2 * m - 1) = c1 * std::cos(a);
            phi(j, 2 * m) = c1 * std::sin(a);
        }
    }
    for (int m = 1; m <= M; ++m) stiffness(2 * m - 1) = stiffness(2 * m) = std::pow(kTwoPi * m / L, 2);
    Eigen::MatrixXd H = phi.transpose() * ((form.q * (L / n)).asDiagonal() * phi);
    H.diagonal() += stiffness;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) fail(ErrorKind::EigSolverFailure, "normal-form eigensolver failed");
    return solver.eigenvalues().head(count);
}

DecayFit mode_decay_exponent(const Vec& u, const ModeBasis& basis, int k_lo, int k_hi, double relative_floor) {
    require(1 <= k_lo && k_lo < k_hi && k_hi <= basis.K, ErrorKind::InvalidInput, "k range outside the basis");
    const Vec c = basis.project(u);
    std::vector<double> amp(basis.K + 1, 0.0);
    double peak = 0.0;
    for (int k = 1; k <= basis.K; ++k) {
        amp[k] = std::hypot(c(k + basis.K), c(-k + basis.K));
        peak = std::max(peak, amp[k]);
    }
    peak = std::max(peak, std::abs(c(basis.K)));
    DecayFit fit;
    int lo = k_lo;
    while (lo <= k_hi) {
        const int block_end = std::min(k_hi, 2 * (1 << static_cast<int>(std::floor(std::log2(lo)))) - 1);
        int best = lo;
        for (int k = lo; k <= block_end; ++k)
            if (amp[k] > amp[best]) best = k;
        if (amp[best] > relative_floor * peak && amp[best] > 0.0) {
            fit.ks.push_back(best);
            fit.amplitudes.push_back(amp[best]);
        }
        lo = block_end + 1;
    }
    if (fit.ks.size() < 2) fail(ErrorKind::AllModesBelowFloor, "fewer than two mode amplitudes above the floor");
    const int m = static_cast<int>(fit.ks.size());
    Eigen::MatrixXd X(m, 2);
    Vec y(m);
    for (int i = 0; i < m; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = std::log(static_cast<double>(fit.ks[i]));
        y(i) = std::log(fit.amplitudes[i]);
    }
    const Vec coef = X.colPivHouseholderQr().solve(y);
    fit.log_constant = coef(0);
    fit.exponent = -coef(1);
    return fit;
}

}  // namespace phasesep
