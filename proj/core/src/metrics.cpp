#include "phasesep/coupled.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace phasesep {

namespace {

double student_t975(int dof) {
    static constexpr std::array<double, 10> table{12.706, 4.303, 3.182, 2.776, 2.571,
                                                  2.447,  2.365, 2.306, 2.262, 2.228};
    if (dof < 1) return std::numeric_limits<double>::infinity();
    if (dof <= 10) return table[dof - 1];
    return 1.96 + 2.4 / dof;
}

double min_radial_spacing(const PolarMesh& m) {
    double h = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < m.nr(); ++i) h = std::min(h, m.r(i + 1) - m.r(i));
    return h;
}

int nearest_ring(const PolarMesh& m, double rho) {
    const int i = m.ring_below(rho);
    if (i + 1 < m.nr() && std::abs(m.r(i + 1) - rho) < std::abs(m.r(i) - rho)) return i + 1;
    return i;
}

}  // namespace

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    require(n >= 2 && static_cast<int>(y.size()) == n, ErrorKind::InsufficientData, "slope fit needs two points");
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, ErrorKind::InvalidInput, "log-log fit needs positive data");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double sse = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = std::log(y[i]) - fit.intercept - fit.slope * std::log(x[i]);
            sse += r * r;
        }
        fit.half_width = student_t975(n - 2) * std::sqrt(sse / (n - 2) / sxx);
    } else {
        fit.half_width = std::numeric_limits<double>::infinity();
    }
    return fit;
}

double sup_error(const PolarMesh& mesh, const Vec& u1, const Vec& u2, const Vec& w) {
    double worst = 0.0;
    for (int k = 0; k < mesh.size(); ++k) {
        worst = std::max(worst, std::abs(u1(k) - std::max(w(k), 0.0)));
        worst = std::max(worst, std::abs(u2(k) - std::max(-w(k), 0.0)));
    }
    return worst;
}

double holder_error(const PolarMesh& mesh, const Vec& e, double alpha, int pairs, unsigned seed) {
    require(alpha >= 0.0 && alpha < 1.0, ErrorKind::InvalidInput, "alpha must lie in [0, 1)");
    const double sup = e.cwiseAbs().maxCoeff();
    if (alpha == 0.0) return sup;
    const double dmin = 2.0 * min_radial_spacing(mesh);
    const double dmax = 2.0 * mesh.r_outer() / 10.0;
    require(dmax > dmin, ErrorKind::InvalidInput, "mesh too coarse for the Hoelder sampling range");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> node(0, mesh.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int strata = 10;
    const double lmin = std::log(dmin), lmax = std::log(dmax);
    const bool radial = mesh.axisymmetric();
    double semi = 0.0;
    for (int p = 0; p < pairs; ++p) {
        const int stratum = p % strata;
        const double d = std::exp(lmin + (lmax - lmin) * (stratum + unit(rng)) / strata);
        const int k = node(rng);
        const Point2 x = mesh.node(k);
        const double rx = std::hypot(x.x, x.y);
        Point2 y;
        if (radial) {
            const double sgn = unit(rng) < 0.5 ? -1.0 : 1.0;
            y = {rx + sgn * d, 0.0};
        } else {
            const double phi = 2.0 * std::numbers::pi * unit(rng);
            y = {x.x + d * std::cos(phi), x.y + d * std::sin(phi)};
        }
        double rho = std::hypot(y.x, y.y);
        double psi = std::atan2(y.y, y.x);
        if (radial && y.x < 0.0) {
            rho = -y.x;
            psi = std::numbers::pi;
        }
        if (rho > mesh.r_outer() || rho < mesh.r_inner()) continue;
        const int i = nearest_ring(mesh, rho);
        int j = 0;
        if (!radial) {
            const double a = psi < 0.0 ? psi + 2.0 * std::numbers::pi : psi;
            j = static_cast<int>(std::lround(a / mesh.dtheta())) % mesh.n_theta();
        }
        const int ky = mesh.index(i, j);
        Point2 yn = mesh.node(ky);
        if (radial) yn = {mesh.r(i) * std::cos(psi), mesh.r(i) * std::sin(psi)};
        const double sep = std::hypot(yn.x - x.x, yn.y - x.y);
        if (sep < dmin || sep > dmax) continue;
        semi = std::max(semi, std::abs(e(k) - e(ky)) / std::pow(sep, alpha));
    }
    return sup + semi;
}

double c2_compact_error(const PolarMesh& mesh, const Vec& e, const Vec& t, double delta0) {
    double worst = 0.0;
    const int nt = mesh.n_theta();
    const double dth = mesh.dtheta();
    for (int i = 1; i + 1 < mesh.nr(); ++i) {
        const double r = mesh.r(i);
        const double hm = r - mesh.r(i - 1), hp = mesh.r(i + 1) - r;
        for (int j = 0; j < nt; ++j) {
            const int k = mesh.index(i, j);
            if (std::abs(t(k)) < delta0) continue;
            const double em = e(mesh.index(i - 1, j)), ec = e(k), ep = e(mesh.index(i + 1, j));
            const double err = 2.0 * (hm * ep - (hm + hp) * ec + hp * em) / (hm * hp * (hm + hp));
            const double er = (hm * hm * ep + (hp * hp - hm * hm) * ec - hp * hp * em) / (hm * hp * (hm + hp));
            double tangential = er / r;
            if (nt > 1) {
                const double a = e(mesh.index(i, (j + 1) % nt)), b = e(mesh.index(i, (j + nt - 1) % nt));
                tangential += (a - 2.0 * ec + b) / (dth * dth * r * r);
            }
            worst = std::max({worst, std::abs(err), std::abs(tangential)});
        }
    }
    return worst;
}

double overlap_integral(const PolarMesh& mesh, const Vec& u1, const Vec& u2) {
    return mesh.integrate(u1.cwiseProduct(u2));
}

RateReport error_report(const std::vector<ContinuationEntry>& entries, const LimitSolution& ls, double alpha,
                        double delta0, double K, unsigned seed) {
    std::vector<const ContinuationEntry*> ok;
    for (const auto& e : entries)
        if (e.ok) ok.push_back(&e);
    require(ok.size() >= 4, ErrorKind::InsufficientData,
            "rate fit needs at least four converged solutions (have " + std::to_string(ok.size()) + ")");
    double eps_max = 0.0;
    for (const auto* e : ok) eps_max = std::max(eps_max, e->solution.eps);
    const double two_eta = 2.0 * CutoffFamily::make(K, eps_max).eta;
    require(delta0 > two_eta, ErrorKind::InvalidInput,
            "delta0 must exceed 2 eta = " + std::to_string(two_eta) + " at the largest eps");

    RateReport rep;
    rep.alpha = alpha;
    rep.delta0 = delta0;
    const double r_gamma = ls.mesh->r(ls.gamma_ring);
    for (const auto* e : ok) {
        const CoupledSolution& s = e->solution;
        const PolarMesh& m = *s.mesh;
        const Vec& w = e->w_reference;
        const Vec e1 = s.u1 - w.cwiseMax(0.0);
        const Vec e2 = s.u2 - (-w).cwiseMax(0.0);
        Vec t(m.size());
        for (int k = 0; k < m.size(); ++k) {
            const Point2 x = m.node(k);
            t(k) = ls.positive_side * (std::hypot(x.x, x.y) - r_gamma);
        }
        RateRow row;
        row.beta = s.beta;
        row.eps = s.eps;
        row.sup_err = sup_error(m, s.u1, s.u2, w);
        row.calpha_err = std::max(holder_error(m, e1, alpha, 100000, seed), holder_error(m, e2, alpha, 100000, seed));
        row.c2_compact_err = std::max(c2_compact_error(m, e1, t, delta0), c2_compact_error(m, e2, t, delta0));
        row.overlap = overlap_integral(m, s.u1, s.u2);
        row.newton_iterations = s.newton_iterations;
        rep.rows.push_back(row);
    }
    std::vector<double> b, sup, hol, c2;
    for (const auto& r : rep.rows) {
        b.push_back(r.beta);
        sup.push_back(r.sup_err);
        hol.push_back(r.calpha_err);
        c2.push_back(r.c2_compact_err);
    }
    rep.sup_slope = fit_loglog(b, sup);
    rep.calpha_slope = fit_loglog(b, hol);
    rep.c2_slope = fit_loglog(b, c2);
    rep.overlap_decreasing = true;
    for (size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].overlap < rep.rows[i - 1].overlap)) rep.overlap_decreasing = false;
    return rep;
}

}  // namespace phasesep
