#pragma once

#include "phasesep/dtn.hpp"
#include "phasesep/profile1d.hpp"
#include "phasesep/scalar_limit.hpp"

#include <array>
#include <memory>

namespace phasesep {

/// Cutoffs chi (inner), chi1, chi2 (outer) with eta = K eps |ln eps|.
///
/// chi(t) = 1 - S(|t|/eta - 1) with the quintic smoothstep S, so chi = 1 on |t| <= eta and
/// chi = 0 on |t| >= 2 eta; chi1 and chi2 split 1 - chi by the sign of t.
struct CutoffFamily {
    double K = 4.0;
    double eps = 0.0;
    double eta = 0.0;

    static CutoffFamily make(double K, double eps);
    double chi(double t) const;
    double chi1(double t) const { return t > 0.0 ? 1.0 - chi(t) : 0.0; }
    double chi2(double t) const { return t < 0.0 ? 1.0 - chi(t) : 0.0; }
};

/// Assembled approximate solution on a target polar mesh.
struct ApproxPair {
    std::shared_ptr<const PolarMesh> mesh;
    double beta = 0.0;
    double eps = 0.0;
    CutoffFamily cutoff;
    Vec U1, U2;
    /// Signed distance t to the interface (positive in Omega_1) at every node.
    Vec t;
    /// Inner parts eps b V_i + eps^2 kappa W_i (zero where chi = 0) and outer parts
    /// w0_i + eps w1_i + eps^2 w2_i (zero where chi_i = 0).
    Vec inner1, inner2, outer1, outer2;
};

/// Evaluates the expansions of a fitted limit solution at arbitrary points.
class ExpansionEvaluator {
public:
    ExpansionEvaluator(const LimitSolution& ls, const MatchingCoefficients& mc, const ProfileSampler& profile);

    /// Signed distance to the interface circle, positive in Omega_1.
    double t_of(double r) const { return side_ * (r - r_gamma_); }
    double r_gamma() const { return r_gamma_; }
    double kappa() const { return kappa_; }
    /// (b, shift) at angle theta, shift = eps zeta1 + eps^2 zeta2.
    std::pair<double, double> stretch(double eps, double theta) const;
    /// Inner component i (0 or 1) at (t, theta).
    double inner(int i, double eps, double t, double theta) const;
    /// Outer component i at (r, theta); only meaningful on the closure of Omega_i.
    double outer(int i, double eps, double r, double theta) const;
    /// The three outer orders (w0_i, w1_i, w2_i) at (r, theta).
    std::array<double, 3> outer_terms(int i, double r, double theta) const;

private:
    double ring_coefficient(const Vec& trace, double theta) const;
    double side_value(const Vec& field, int sub, double r, double theta) const;

    const LimitSolution* ls_;
    const MatchingCoefficients* mc_;
    const ProfileSampler* profile_;
    double r_gamma_;
    double kappa_;
    int side_;
    Vec w0_[2];
};

/// U_i = chi (eps b V_i(tau) + eps^2 kappa W_i(tau)) + chi_i (w0_i + eps w1_i + eps^2 w2_i),
/// tau = b (t - eps zeta1 - eps^2 zeta2) / eps, eps = beta^{-1/4}.
/// Errors: TubeOverflow when 2 eta >= tube half-width; ProfileRangeExceeded when tau leaves
/// the profile grid inside supp chi.
ApproxPair assemble(const LimitSolution& ls, const MatchingCoefficients& mc, const ProfileSampler& profile, double beta,
                    double K, std::shared_ptr<const PolarMesh> target);

struct ResidualReport {
    Vec E1, E2;
    /// sup |E_i| over {|t| <= eta}, {eta < |t| <= 2 eta}, {|t| > 2 eta}; index [region][i].
    double sup[3][2] = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    double sup_all = 0.0;
};

/// E_i = Delta U_i + f(U_i) - beta U_i U_j^2 at the interior nodes of the target mesh.
ResidualReport residual(const ApproxPair& ap, const Nonlinearity& f);

/// Overlap-region mismatch sup |inner_i - outer_i| over eta <= |t| <= 2 eta on the side of
/// Omega_i, sampled at `samples` points per side and 16 angles.
double overlap_mismatch(const ExpansionEvaluator& ev, double eps, double K, int samples = 64);

}  // namespace phasesep
