#pragma once

#include "phasesep/linalg.hpp"

#include <vector>

namespace phasesep {

/// Liouville normal form of -psi'' = omega^2 b^2 psi: y = int_0^s b, phi = sqrt(b) psi,
/// -phi_yy + q phi = omega^2 phi with q = (sqrt b)_yy / sqrt b.
struct LiouvilleForm {
    /// Transformed period int_0^L b ds.
    double length = 0.0;
    /// Uniform grid on [0, length) and the potential sampled on it.
    Vec y;
    Vec q;
    /// Mean of q over one period; the Weyl shift of omega_k^2.
    double q_mean = 0.0;
};

LiouvilleForm liouville_transform(const Vec& b, double L);

/// Eigenpairs of -psi'' = omega^2 b^2 psi on a closed curve of length L, relabelled so that
/// index k in [-K, K] carries the pair (omega_k, psi_k), omega_0 = 0 and omega_{-k} <= omega_k.
struct ModeBasis {
    Vec b;
    double L = 0.0;
    int K = 0;
    /// int_0^L |b| ds.
    double ell0 = 0.0;
    /// Size of the real Fourier space used for the Galerkin solve.
    int galerkin_size = 0;
    /// omega_k^2 stored at index k + K.
    Vec omega2;
    /// psi_k sampled at s_j = j L / N, stored in column k + K.
    Eigen::MatrixXd psi;

    int samples() const { return static_cast<int>(b.size()); }
    double omega(int k) const;
    Vec mode(int k) const { return psi.col(k + K); }
    /// omega_k ell0 / (2 pi |k|).
    double weyl_ratio(int k) const;
    /// Coefficients u_k = int u psi_k b^2 ds, stored at index k + K.
    Vec project(const Vec& u) const;
    /// Gram matrix int psi_j psi_k b^2 ds.
    Eigen::MatrixXd gram() const;
    /// max_k sup |psi_k|.
    double sup_bound() const;
};

/// Fourier-Galerkin solve of the generalized eigenproblem. Requires K >= 1 and N >= 8K samples.
ModeBasis eigenbasis(const Vec& b, double L, int K);

/// The lowest `count` eigenvalues of -phi'' + q phi on the transformed period.
Vec normal_form_eigenvalues(const LiouvilleForm& form, int count);

struct DecayFit {
    /// alpha in |u_k| ~ k^{-alpha}.
    double exponent = 0.0;
    double log_constant = 0.0;
    /// Dyadic-block envelope points used in the fit.
    std::vector<int> ks;
    std::vector<double> amplitudes;
};

/// Least-squares decay exponent of the mode amplitudes sqrt(u_k^2 + u_{-k}^2) over
/// k_lo..k_hi. Each dyadic block [2^j, 2^{j+1}) contributes its largest amplitude; amplitudes
/// below relative_floor * max are discarded.
DecayFit mode_decay_exponent(const Vec& u, const ModeBasis& basis, int k_lo, int k_hi,
                             double relative_floor = 1e-12);

/// Spectral derivative of periodic samples on [0, L).
Vec periodic_derivative(const Vec& f, double L, int order = 1);

/// Spectral antiderivative int_0^s f of periodic samples; the mean of f times s is included.
Vec periodic_integral(const Vec& f, double L);

}  // namespace phasesep
