#include "phasesep/dtn.hpp"

#include "phasesep/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace phasesep {

namespace {

std::pair<int, int> band_limits(const PolarMesh& mesh, int ring, int side) {
    require(side == 1 || side == -1, ErrorKind::InvalidInput, "side must be +1 or -1");
    require(ring >= 0 && ring < mesh.nr(), ErrorKind::InvalidInput, "interface ring out of range");
    const int first = mesh.kind() == GeometryKind::Disk ? 0 : 1;
    const int last = mesh.nr() - 2;
    const std::pair<int, int> band = side > 0 ? std::pair{ring + 1, last} : std::pair{first, ring - 1};
    require(band.first <= band.second, ErrorKind::InvalidInput, "subdomain next to the interface ring is empty");
    return band;
}

Vec angular_second_difference(const PolarMesh& mesh, const Vec& g) {
    const int nt = mesh.n_theta();
    Vec out = Vec::Zero(nt);
    if (nt == 1) return out;
    const auto& ang = mesh.angular_stencil();
    for (int j = 0; j < nt; ++j)
        for (int o = -2; o <= 2; ++o) out(j) += ang[o + 2] * g(((j + o) % nt + nt) % nt);
    return out;
}

Vec ring_values(const PolarMesh& mesh, const Vec& field, int ring) {
    return field.segment(static_cast<Eigen::Index>(ring) * mesh.n_theta(), mesh.n_theta());
}

double spread(const Vec& v) { return v.size() == 0 ? 0.0 : v.maxCoeff() - v.minCoeff(); }

GmresResult solve_sum(const MatchingContext& ctx, const Vec& rhs, const MatchingOptions& options) {
    const int n = static_cast<int>(rhs.size());
    GmresResult res = gmres([&](const Vec& x) { return ctx.apply_sum(x); }, rhs, options.gmres_tol,
                            std::min(options.gmres_restart, n), options.gmres_max_iterations);
    if (!res.converged) {
        fail(ErrorKind::DtNInversionFailure,
             "GMRES for the summed DtN equation stalled at relative residual " + std::to_string(res.relative_residual));
    }
    return res;
}

}  // namespace

DtNOperator::DtNOperator(std::shared_ptr<const PolarMesh> mesh, int gamma_ring, int side, const Vec& potential)
    : mesh_(std::move(mesh)),
      ring_(gamma_ring),
      side_(side),
      potential_(potential),
      band_(*mesh_, band_limits(*mesh_, gamma_ring, side).first, band_limits(*mesh_, gamma_ring, side).second) {
    require(potential_.size() == mesh_->size(), ErrorKind::InvalidInput, "potential does not match the mesh");
    lu_.factor(band_.matrix(potential_));
}

Vec DtNOperator::extend(const Vec& g, const Vec* source) const {
    require(g.size() == trace_size(), ErrorKind::InvalidInput, "trace size does not match the ring");
    Vec full = Vec::Zero(mesh_->size());
    full.segment(static_cast<Eigen::Index>(ring_) * trace_size(), trace_size()) = g;
    Vec rhs = -band_.boundary_term(full);
    if (source) rhs += band_.gather(*source);
    band_.scatter(lu_.solve(rhs), full);
    return full;
}

Vec DtNOperator::normal_derivative(const Vec& field, const Vec* source) const {
    const PolarMesh& m = *mesh_;
    const int g = ring_;
    const int adj = g + side_;
    const double rg = m.r(g);
    const double c = side_ > 0 ? m.conductance(g) : m.conductance(g - 1);
    const double a = 0.5 * rg * std::abs(m.r(adj) - rg);
    const Vec trace = ring_values(m, field, g);
    const Vec neighbour = ring_values(m, field, adj);
    const Vec dtt = angular_second_difference(m, trace);
    Vec out(trace_size());
    for (int j = 0; j < trace_size(); ++j) {
        const int k = m.index(g, j);
        double bulk = dtt(j) / (rg * rg) + potential_(k) * trace(j);
        if (source) bulk += (*source)(k);
        out(j) = (c * (trace(j) - neighbour(j)) - a * bulk) / rg;
    }
    return out;
}

Vec DtNOperator::apply(const Vec& g, const Vec* source) const { return normal_derivative(extend(g, source), source); }

double DtNOperator::inner(const Vec& g, const Vec& h) const {
    const double w = mesh_->r(ring_) * (trace_size() == 1 ? 2.0 * std::numbers::pi : mesh_->dtheta());
    return w * g.dot(h);
}

Eigen::MatrixXd DtNOperator::dense() const {
    const int n = trace_size();
    Eigen::MatrixXd D(n, n);
    for (int j = 0; j < n; ++j) D.col(j) = apply(Vec::Unit(n, j));
    return D;
}

Vec one_sided_normal_derivative(const PolarMesh& mesh, const Vec& field, int ring, int side) {
    const double r0 = mesh.r(ring), r1 = mesh.r(ring + side), r2 = mesh.r(ring + 2 * side);
    const double d1 = r1 - r0, d2 = r2 - r0;
    const double c0 = -(d1 + d2) / (d1 * d2);
    const double c1 = d2 / (d1 * (d2 - d1));
    const double c2 = -d1 / (d2 * (d2 - d1));
    const Vec u0 = ring_values(mesh, field, ring);
    const Vec u1 = ring_values(mesh, field, ring + side);
    const Vec u2 = ring_values(mesh, field, ring + 2 * side);
    return -static_cast<double>(side) * (c0 * u0 + c1 * u1 + c2 * u2);
}

Vec compute_b0(const Vec& omega, double A) {
    require(A > 0.0, ErrorKind::NonPositiveInput, "profile constant A must be positive");
    require(omega.size() > 0 && omega.minCoeff() > 0.0, ErrorKind::NonPositiveInput, "omega must be positive");
    return (omega / A).array().sqrt();
}

Vec lowpass(const Vec& trace, int K) {
    const int n = static_cast<int>(trace.size());
    if (K <= 0 || n <= 2 * K + 1) return trace;
    Eigen::FFT<double> fft;
    std::vector<double> in(trace.data(), trace.data() + n), back;
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, in);
    for (int j = 0; j < n; ++j) {
        const int k = j <= n / 2 ? j : n - j;
        if (k > K) spec[j] = 0.0;
    }
    fft.inv(back, spec);
    return Eigen::Map<Vec>(back.data(), n);
}

MatchingContext make_matching_context(const LimitSolution& ls, const Nonlinearity& f, const Margins& margins,
                                      double A, double B) {
    require(ls.gamma_ring > 0, ErrorKind::InvalidInput, "matching needs an interface-fitted limit solution");
    if (margins.degenerate) {
        fail(ErrorKind::SingularOperator,
             "nondegeneracy margin " + std::to_string(margins.min_margin()) + " below 1e-6 * scale " +
                 std::to_string(margins.scale) + "; the DtN sum has no bounded inverse");
    }
    MatchingContext ctx;
    ctx.mesh = ls.mesh;
    ctx.gamma_ring = ls.gamma_ring;
    ctx.positive_side = ls.positive_side;
    ctx.kappa = ls.gamma.kappa()(0);
    ctx.A = A;
    ctx.B = B;
    ctx.omega = curve_to_ring(ls, ls.omega);
    ctx.b0 = compute_b0(ctx.omega, A);
    const PolarMesh& m = *ls.mesh;
    ctx.potential.resize(m.size());
    ctx.w0[0] = ls.w.cwiseMax(0.0);
    ctx.w0[1] = (-ls.w).cwiseMax(0.0);
    for (int k = 0; k < m.size(); ++k) ctx.potential(k) = f.fu(std::abs(ls.w(k)), m.node(k));
    ctx.D[0] = std::make_shared<const DtNOperator>(ls.mesh, ls.gamma_ring, ls.positive_side, ctx.potential);
    ctx.D[1] = std::make_shared<const DtNOperator>(ls.mesh, ls.gamma_ring, -ls.positive_side, ctx.potential);
    return ctx;
}

MatchingOrder1 solve_matching_order1(const MatchingContext& ctx, const MatchingOptions& options) {
    const double A = ctx.A, B = ctx.B, kappa = ctx.kappa;
    const Vec& b0 = ctx.b0;
    const Vec Bb0 = B * b0;
    const Vec D1Bb0 = ctx.D[0]->apply(Bb0);
    const Vec D2Bb0 = ctx.D[1]->apply(Bb0);

    MatchingOrder1 out;
    const GmresResult sol = solve_sum(ctx, D1Bb0 - D2Bb0, options);
    const Vec& q = sol.x;
    out.gmres_iterations = sol.iterations;
    out.gmres_residual = sol.relative_residual;
    out.zeta1 = q.cwiseQuotient(A * b0.cwiseAbs2());

    const Vec D1q = ctx.D[0]->apply(q);
    const Vec D2q = ctx.D[1]->apply(q);
    const Vec rhs = -0.5 * (D1q - D2q) - A * kappa * (b0.cwiseAbs2().cwiseProduct(out.zeta1)) + 0.5 * (D1Bb0 + D2Bb0);
    out.b1 = -rhs.cwiseQuotient(2.0 * A * b0);

    out.w1[0] = ctx.D[0]->extend(Bb0 - q);
    out.w1[1] = ctx.D[1]->extend(Bb0 + q);
    const Vec expected = -2.0 * A * b0.cwiseProduct(out.b1) + A * kappa * b0.cwiseAbs2().cwiseProduct(out.zeta1);
    for (int i = 0; i < 2; ++i) {
        const Vec dn = one_sided_normal_derivative(*ctx.mesh, out.w1[i], ctx.gamma_ring, ctx.D[i]->side());
        out.neumann_defect[i] = sup_norm(dn - expected);
    }
    return out;
}

MatchingOrder2 solve_matching_order2(const MatchingContext& ctx, const MatchingOrder1& o1, const Nonlinearity& f,
                                     const MatchingOptions& options) {
    const double A = ctx.A, B = ctx.B, kappa = ctx.kappa;
    const PolarMesh& m = *ctx.mesh;
    const Vec& b0 = ctx.b0;
    const Vec b0sq = b0.cwiseAbs2();
    const Vec& b1 = o1.b1;
    const Vec& z1 = o1.zeta1;

    const Vec cross = 2.0 * A * b0.cwiseProduct(b1).cwiseProduct(z1);
    const Vec curv = 0.5 * A * kappa * b0sq.cwiseProduct(z1.cwiseAbs2());
    const Vec g[2] = {B * b1 - cross + curv, B * b1 + cross - curv};
    const Vec common = -A * b1.cwiseAbs2() + 2.0 * A * kappa * b0.cwiseProduct(b1).cwiseProduct(z1);

    MatchingOrder2 out;
    Vec Dg[2];
    for (int i = 0; i < 2; ++i) {
        Vec src = Vec::Zero(m.size());
        for (int k = 0; k < m.size(); ++k) {
            const double w0 = ctx.w0[i](k);
            const double w1 = o1.w1[i](k);
            if (w1 != 0.0) src(k) = 0.5 * f.fuu(w0, m.node(k)) * w1 * w1;
        }
        const Vec zero = Vec::Zero(ctx.D[i]->trace_size());
        out.w2_tilde[i] = ctx.D[i]->extend(zero, &src);
        out.h[i] = common - ctx.D[i]->normal_derivative(out.w2_tilde[i], &src);
        Dg[i] = ctx.D[i]->apply(g[i]);
    }

    const GmresResult sol = solve_sum(ctx, Dg[0] - Dg[1] + out.h[1] - out.h[0], options);
    out.gmres_iterations = sol.iterations;
    out.gmres_residual = sol.relative_residual;
    Vec q2 = sol.x;
    out.zeta2 = q2.cwiseQuotient(A * b0sq);
    const Vec D1q = ctx.D[0]->apply(q2);
    const Vec D2q = ctx.D[1]->apply(q2);
    const Vec rhs = 0.5 * (-(out.h[0] + out.h[1]) + Dg[0] + Dg[1]) - 0.5 * (D1q - D2q) -
                    A * kappa * b0sq.cwiseProduct(out.zeta2);
    out.b2 = -rhs.cwiseQuotient(2.0 * A * b0);
    if (options.filter_modes > 0) {
        out.zeta2 = lowpass(out.zeta2, options.filter_modes);
        out.b2 = lowpass(out.b2, options.filter_modes);
        q2 = A * b0sq.cwiseProduct(out.zeta2);
    }

    out.w2[0] = out.w2_tilde[0] + ctx.D[0]->extend(g[0] - q2);
    out.w2[1] = out.w2_tilde[1] + ctx.D[1]->extend(g[1] + q2);
    const Vec expected = -2.0 * A * b0.cwiseProduct(out.b2) + A * kappa * b0sq.cwiseProduct(out.zeta2) + common;
    for (int i = 0; i < 2; ++i) {
        const Vec dn = one_sided_normal_derivative(m, out.w2[i], ctx.gamma_ring, ctx.D[i]->side());
        out.neumann_defect[i] = sup_norm(dn - expected);
    }
    return out;
}

double MatchingCoefficients::radial_spread() const {
    return std::max({spread(b1), spread(zeta1), spread(b2), spread(zeta2)});
}

MatchingCoefficients collect(const MatchingContext& ctx, const MatchingOrder1& o1, const MatchingOrder2& o2) {
    MatchingCoefficients mc;
    mc.A = ctx.A;
    mc.B = ctx.B;
    mc.kappa = ctx.kappa;
    mc.b0 = ctx.b0;
    mc.b1 = o1.b1;
    mc.b2 = o2.b2;
    mc.zeta1 = o1.zeta1;
    mc.zeta2 = o2.zeta2;
    for (int i = 0; i < 2; ++i) {
        mc.w1[i] = o1.w1[i];
        mc.w2[i] = o2.w2[i];
    }
    mc.gamma_ring = ctx.gamma_ring;
    mc.positive_side = ctx.positive_side;
    return mc;
}

double dtn_symmetry_defect(const DtNOperator& op, int pairs, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = op.trace_size();
    double worst = 0.0;
    for (int p = 0; p < pairs; ++p) {
        Vec g(n), h(n);
        for (int j = 0; j < n; ++j) {
            g(j) = dist(rng);
            h(j) = dist(rng);
        }
        const double a = op.inner(op.apply(g), h);
        const double b = op.inner(g, op.apply(h));
        worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}));
    }
    return worst;
}

}  // namespace phasesep
