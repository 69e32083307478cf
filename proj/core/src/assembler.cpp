#include "phasesep/assembler.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace phasesep {

namespace {

std::array<double, 4> lagrange4(const std::array<double, 4>& nodes, double x) {
    std::array<double, 4> w{};
    for (int a = 0; a < 4; ++a) {
        double v = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) v *= (x - nodes[b]) / (nodes[a] - nodes[b]);
        w[a] = v;
    }
    return w;
}

/// Periodic 4-point Lagrange weights for angle theta on a uniform grid of n points.
std::pair<int, std::array<double, 4>> angular_weights(int n, double theta) {
    const double dth = 2.0 * std::numbers::pi / n;
    const double x = theta / dth;
    const int j = static_cast<int>(std::floor(x));
    const double f = x - j;
    return {j - 1, lagrange4({-1.0, 0.0, 1.0, 2.0}, f)};
}

int wrap(int j, int n) { return ((j % n) + n) % n; }

}  // namespace

CutoffFamily CutoffFamily::make(double K, double eps) {
    require(K > 0.0, ErrorKind::InvalidInput, "cutoff constant K must be positive");
    require(eps > 0.0 && eps < 1.0, ErrorKind::InvalidInput, "eps must lie in (0, 1)");
    CutoffFamily c;
    c.K = K;
    c.eps = eps;
    c.eta = K * eps * std::abs(std::log(eps));
    return c;
}

double CutoffFamily::chi(double t) const {
    const double x = std::abs(t) / eta - 1.0;
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

ExpansionEvaluator::ExpansionEvaluator(const LimitSolution& ls, const MatchingCoefficients& mc,
                                       const ProfileSampler& profile)
    : ls_(&ls), mc_(&mc), profile_(&profile) {
    require(ls.gamma_ring > 0 && mc.gamma_ring == ls.gamma_ring, ErrorKind::InvalidInput,
            "expansions need matching data from the same interface-fitted solution");
    r_gamma_ = ls.mesh->r(ls.gamma_ring);
    kappa_ = mc.kappa;
    side_ = ls.positive_side;
    w0_[0] = ls.w;
    w0_[1] = -ls.w;
}

double ExpansionEvaluator::ring_coefficient(const Vec& trace, double theta) const {
    const int n = static_cast<int>(trace.size());
    if (n == 1) return trace(0);
    const auto [j0, w] = angular_weights(n, theta);
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += w[a] * trace(wrap(j0 + a, n));
    return v;
}

std::pair<double, double> ExpansionEvaluator::stretch(double eps, double theta) const {
    const MatchingCoefficients& mc = *mc_;
    const double b = ring_coefficient(mc.b0, theta) + eps * ring_coefficient(mc.b1, theta) +
                     eps * eps * ring_coefficient(mc.b2, theta);
    const double shift = eps * ring_coefficient(mc.zeta1, theta) + eps * eps * ring_coefficient(mc.zeta2, theta);
    return {b, shift};
}

double ExpansionEvaluator::inner(int i, double eps, double t, double theta) const {
    const auto [b, shift] = stretch(eps, theta);
    const double tau = b * (t - shift) / eps;
    const ProfileSampler::Sample p = (*profile_)(tau);
    const double V = i == 0 ? p.V1 : p.V2;
    const double W = i == 0 ? p.W1 : p.W2;
    return eps * b * V + eps * eps * kappa_ * W;
}

double ExpansionEvaluator::side_value(const Vec& field, int sub, double r, double theta) const {
    const PolarMesh& m = *ls_->mesh;
    const int g = ls_->gamma_ring;
    const int side = sub == 0 ? side_ : -side_;
    const int lo = side > 0 ? g : 0;
    const int hi = side > 0 ? m.nr() - 1 : g;
    require(hi - lo >= 3, ErrorKind::InvalidInput, "subdomain too thin for one-sided interpolation");
    const int i0 = std::clamp(m.ring_below(r) - 1, lo, hi - 3);
    const auto wr = lagrange4({m.r(i0), m.r(i0 + 1), m.r(i0 + 2), m.r(i0 + 3)}, r);
    const int nt = m.n_theta();
    double v = 0.0;
    if (nt == 1) {
        for (int a = 0; a < 4; ++a) v += wr[a] * field(m.index(i0 + a, 0));
        return v;
    }
    const auto [j0, wt] = angular_weights(nt, theta);
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) v += wr[a] * wt[c] * field(m.index(i0 + a, wrap(j0 + c, nt)));
    return v;
}

std::array<double, 3> ExpansionEvaluator::outer_terms(int i, double r, double theta) const {
    return {side_value(w0_[i], i, r, theta), side_value(mc_->w1[i], i, r, theta),
            side_value(mc_->w2[i], i, r, theta)};
}

double ExpansionEvaluator::outer(int i, double eps, double r, double theta) const {
    const auto w = outer_terms(i, r, theta);
    return w[0] + eps * w[1] + eps * eps * w[2];
}

ApproxPair assemble(const LimitSolution& ls, const MatchingCoefficients& mc, const ProfileSampler& profile, double beta,
                    double K, std::shared_ptr<const PolarMesh> target) {
    require(beta > 1.0, ErrorKind::InvalidInput, "beta must exceed 1");
    require(target != nullptr, ErrorKind::InvalidInput, "assembly needs a target mesh");
    const double eps = std::pow(beta, -0.25);
    ApproxPair ap;
    ap.mesh = target;
    ap.beta = beta;
    ap.eps = eps;
    ap.cutoff = CutoffFamily::make(K, eps);
    if (2.0 * ap.cutoff.eta >= ls.tube_half_width) {
        fail(ErrorKind::TubeOverflow, "2 eta = " + std::to_string(2.0 * ap.cutoff.eta) +
                                          " does not fit in the tube of half-width " +
                                          std::to_string(ls.tube_half_width) + "; increase beta or decrease K");
    }
    const ExpansionEvaluator ev(ls, mc, profile);
    const PolarMesh& m = *target;
    const int n = m.size();
    ap.U1 = ap.U2 = ap.t = ap.inner1 = ap.inner2 = ap.outer1 = ap.outer2 = Vec::Zero(n);
    for (int i = 0; i < m.nr(); ++i) {
        const double t = ev.t_of(m.r(i));
        const double chi = ap.cutoff.chi(t);
        const double chi_i[2] = {ap.cutoff.chi1(t), ap.cutoff.chi2(t)};
        for (int j = 0; j < m.n_theta(); ++j) {
            const int k = m.index(i, j);
            const double th = m.theta(j);
            ap.t(k) = t;
            if (chi > 0.0) {
                ap.inner1(k) = ev.inner(0, eps, t, th);
                ap.inner2(k) = ev.inner(1, eps, t, th);
            }
            if (chi_i[0] > 0.0) ap.outer1(k) = ev.outer(0, eps, m.r(i), th);
            if (chi_i[1] > 0.0) ap.outer2(k) = ev.outer(1, eps, m.r(i), th);
            ap.U1(k) = chi * ap.inner1(k) + chi_i[0] * ap.outer1(k);
            ap.U2(k) = chi * ap.inner2(k) + chi_i[1] * ap.outer2(k);
        }
    }
    return ap;
}

ResidualReport residual(const ApproxPair& ap, const Nonlinearity& f) {
    const PolarMesh& m = *ap.mesh;
    ResidualReport rep;
    rep.E1 = m.laplacian(ap.U1);
    rep.E2 = m.laplacian(ap.U2);
    for (int i = 0; i < m.nr(); ++i) {
        for (int j = 0; j < m.n_theta(); ++j) {
            const int k = m.index(i, j);
            if (m.dirichlet_ring(i)) {
                rep.E1(k) = rep.E2(k) = 0.0;
                continue;
            }
            const Point2 x = m.node(k);
            const double u1 = ap.U1(k), u2 = ap.U2(k);
            rep.E1(k) += f.f(u1, x) - ap.beta * u1 * u2 * u2;
            rep.E2(k) += f.f(u2, x) - ap.beta * u2 * u1 * u1;
            const double at = std::abs(ap.t(k));
            const int region = at <= ap.cutoff.eta ? 0 : (at <= 2.0 * ap.cutoff.eta ? 1 : 2);
            rep.sup[region][0] = std::max(rep.sup[region][0], std::abs(rep.E1(k)));
            rep.sup[region][1] = std::max(rep.sup[region][1], std::abs(rep.E2(k)));
        }
    }
    for (const auto& region : rep.sup) rep.sup_all = std::max({rep.sup_all, region[0], region[1]});
    return rep;
}

double overlap_mismatch(const ExpansionEvaluator& ev, double eps, double K, int samples) {
    require(samples >= 2, ErrorKind::InvalidInput, "need at least two overlap samples");
    const CutoffFamily c = CutoffFamily::make(K, eps);
    const double sign_r = ev.t_of(ev.r_gamma() + 1.0) > 0.0 ? 1.0 : -1.0;
    double worst = 0.0;
    const int angles = 16;
    for (int sub = 0; sub < 2; ++sub) {
        const double dir = sub == 0 ? 1.0 : -1.0;
        for (int k = 0; k < samples; ++k) {
            const double t = dir * c.eta * (1.0 + static_cast<double>(k) / (samples - 1));
            const double r = ev.r_gamma() + sign_r * t;
            for (int a = 0; a < angles; ++a) {
                const double th = 2.0 * std::numbers::pi * a / angles;
                worst = std::max(worst, std::abs(ev.inner(sub, eps, t, th) - ev.outer(sub, eps, r, th)));
            }
        }
    }
    return worst;
}

}  // namespace phasesep
