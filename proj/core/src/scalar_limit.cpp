#include "phasesep/scalar_limit.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace phasesep {

double Margins::min_margin() const {
    return std::min({std::abs(sigma1), std::abs(sigma2), std::abs(sigma_omega)});
}

namespace {

int first_unknown_ring(const PolarMesh& m) { return m.kind() == GeometryKind::Disk ? 0 : 1; }

Vec reaction(const PolarMesh& m, const Nonlinearity& f, const Vec& w, bool derivative) {
    Vec out(m.size());
    for (int k = 0; k < m.size(); ++k) {
        const Point2 x = m.node(k);
        out(k) = derivative ? f.fu(w(k), x) : f.f(w(k), x);
    }
    return out;
}

}  // namespace

std::pair<int, int> LimitSolution::omega_rings(int which) const {
    require(gamma_ring > 0 && mesh, ErrorKind::InvalidInput, "subdomain rings need an interface-fitted mesh");
    const int first = first_unknown_ring(*mesh);
    const int last = mesh->nr() - 2;
    const std::pair<int, int> inner{first, gamma_ring - 1};
    const std::pair<int, int> outer{gamma_ring + 1, last};
    const bool positive_outer = positive_side > 0;
    if (which == 0) return positive_outer ? outer : inner;
    return positive_outer ? inner : outer;
}

Vec radial_initial_guess(const PolarMesh& mesh, double amplitude, const BoundaryFn& boundary) {
    Vec w(mesh.size());
    const double j02 = 5.520078110286311;
    for (int i = 0; i < mesh.nr(); ++i) {
        for (int j = 0; j < mesh.n_theta(); ++j) {
            const int k = mesh.index(i, j);
            if (mesh.kind() == GeometryKind::Disk) {
                w(k) = amplitude * std::cyl_bessel_j(0.0, j02 * mesh.r(i) / mesh.r_outer());
            } else {
                const double a = boundary ? boundary(mesh.node(0, j)) : -1.0;
                const double b = boundary ? boundary(mesh.node(mesh.nr() - 1, j)) : 1.0;
                const double s = (mesh.r(i) - mesh.r_inner()) / (mesh.r_outer() - mesh.r_inner());
                w(k) = a + (b - a) * s;
            }
        }
    }
    return w;
}

int nodal_domain_count(const PolarMesh& mesh, const Vec& w) {
    const int n = mesh.size();
    const int nt = mesh.n_theta();
    std::vector<int> label(n, -1);
    int count = 0;
    for (int start = 0; start < n; ++start) {
        if (label[start] >= 0 || w(start) == 0.0) continue;
        const bool pos = w(start) > 0.0;
        std::queue<int> q;
        q.push(start);
        label[start] = count;
        while (!q.empty()) {
            const int k = q.front();
            q.pop();
            const int i = k / nt, j = k % nt;
            int nb[4];
            int cnt = 0;
            if (i > 0) nb[cnt++] = mesh.index(i - 1, j);
            if (i + 1 < mesh.nr()) nb[cnt++] = mesh.index(i + 1, j);
            if (nt > 1) {
                nb[cnt++] = mesh.index(i, (j + 1) % nt);
                nb[cnt++] = mesh.index(i, (j + nt - 1) % nt);
            }
            for (int c = 0; c < cnt; ++c) {
                const int kk = nb[c];
                if (label[kk] >= 0 || w(kk) == 0.0 || (w(kk) > 0.0) != pos) continue;
                label[kk] = count;
                q.push(kk);
            }
        }
        ++count;
    }
    // The disk centre: nodes of ring 0 are connected through the centre.
    if (mesh.kind() == GeometryKind::Disk && nt > 1) {
        std::vector<int> seen;
        bool pos_seen = false, neg_seen = false;
        for (int j = 0; j < nt; ++j) {
            const int k = mesh.index(0, j);
            if (w(k) > 0.0) pos_seen = true;
            if (w(k) < 0.0) neg_seen = true;
            if (std::find(seen.begin(), seen.end(), label[k]) == seen.end() && label[k] >= 0) seen.push_back(label[k]);
        }
        count -= static_cast<int>(seen.size()) - (pos_seen ? 1 : 0) - (neg_seen ? 1 : 0);
    }
    return count;
}

std::vector<Point2> node_coordinates(const PolarMesh& mesh) {
    std::vector<Point2> pts(mesh.size());
    for (int k = 0; k < mesh.size(); ++k) pts[k] = mesh.node(k);
    return pts;
}

LimitSolution solve_limit(std::shared_ptr<const PolarMesh> mesh_ptr, const Nonlinearity& f, const Vec& w_init,
                          BoundaryFn boundary, double tol, const LimitOptions& options) {
    require(mesh_ptr != nullptr, ErrorKind::InvalidInput, "limit solve needs a mesh");
    const PolarMesh& mesh = *mesh_ptr;
    require(tol > 0.0, ErrorKind::InvalidInput, "tolerance must be positive");
    require(w_init.size() == mesh.size(), ErrorKind::InvalidInput, "initial guess does not match the mesh");
    require(w_init.maxCoeff() > 0.0 && w_init.minCoeff() < 0.0, ErrorKind::InvalidInput,
            "initial guess must change sign");
    if (!boundary) boundary = [](const Point2&) { return 0.0; };

    Vec w = w_init;
    for (int i = 0; i < mesh.nr(); ++i) {
        if (!mesh.dirichlet_ring(i)) continue;
        for (int j = 0; j < mesh.n_theta(); ++j) w(mesh.index(i, j)) = boundary(mesh.node(i, j));
    }
    const BandOperator band(mesh, first_unknown_ring(mesh), mesh.nr() - 2);

    auto residual = [&](const Vec& u) {
        Vec F = -mesh.laplacian(u) - reaction(mesh, f, u, false);
        return band.gather(F);
    };
    /// Residual level reachable in double precision for the Jacobian J at w.
    auto rounding_floor = [&](const SpMat& J, const Vec& u) {
        double diag = 0.0;
        for (int k = 0; k < J.outerSize(); ++k) diag = std::max(diag, std::abs(J.coeff(k, k)));
        return diag * 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, sup_norm(u));
    };
    Vec F = residual(w);
    double res = sup_norm(F);
    SpMat J = band.matrix(reaction(mesh, f, w, true));
    double floor = rounding_floor(J, w);
    int iter = 0;
    for (; iter < options.max_iterations && res > std::max(tol, floor); ++iter) {
        if (iter > 0) {
            J = band.matrix(reaction(mesh, f, w, true));
            floor = rounding_floor(J, w);
        }
        SparseFactor lu(J);
        Vec delta = lu.solve(-F);
        const double merit0 = F.squaredNorm();
        double lambda = 1.0;
        Vec trial, Ft;
        for (int halving = 0; halving < 30; ++halving) {
            trial = w;
            band.scatter(band.gather(w) + lambda * delta, trial);
            Ft = residual(trial);
            if (Ft.squaredNorm() < merit0) break;
            lambda *= 0.5;
        }
        w = std::move(trial);
        F = std::move(Ft);
        res = sup_norm(F);
        if (!w.allFinite() || sup_norm(w) > 1e8) fail(ErrorKind::NonConvergence, "limit Newton diverged");
    }
    if (res > std::max(tol, floor)) {
        std::ostringstream msg;
        msg << "limit Newton did not reach tolerance " << tol << " (residual " << res << " after " << iter
            << " iterations)";
        fail(ErrorKind::NonConvergence, msg.str());
    }
    const int domains = nodal_domain_count(mesh, w);
    if (domains != 2) {
        std::ostringstream msg;
        msg << "converged to a solution with " << domains << " nodal domains (expected 2)";
        fail(ErrorKind::WrongBranch, msg.str());
    }

    LimitSolution ls;
    ls.mesh = std::move(mesh_ptr);
    ls.w = std::move(w);
    ls.residual_sup = res;
    ls.newton_iterations = iter;
    ls.boundary = boundary;
    try {
        auto [gamma, omega] = interface_data(ls, options.curve_samples);
        ls.gamma = std::move(gamma);
        ls.omega = std::move(omega);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::MultipleComponents) fail(ErrorKind::WrongBranch, e.what());
        throw;
    }
    // Distance of the interface to the boundary circles.
    double dist = 1e300;
    for (int k = 0; k < ls.gamma.size(); ++k) {
        const double r = std::hypot(ls.gamma.x()(k), ls.gamma.y()(k));
        dist = std::min(dist, ls.mesh->r_outer() - r);
        if (ls.mesh->kind() == GeometryKind::Annulus) dist = std::min(dist, r - ls.mesh->r_inner());
    }
    require(dist > 0.0, ErrorKind::WrongBranch, "interface touches the boundary");
    ls.tube_half_width = TubeCoords::default_half_width(ls.gamma, dist);
    const int g = ls.mesh->ring_at(std::hypot(ls.gamma.x()(0), ls.gamma.y()(0)), 1e-9);
    if (g > 0 && ls.gamma.radius_about({0.0, 0.0}).second < 1e-9) {
        ls.gamma_ring = g;
        ls.positive_side = ls.w(ls.mesh->index(g + 1, 0)) > 0.0 ? 1 : -1;
    }
    return ls;
}

std::pair<ClosedCurve, Vec> interface_data(const LimitSolution& ls, int curve_samples) {
    return interface_data(*ls.mesh, ls.w, curve_samples);
}

std::pair<ClosedCurve, Vec> interface_data(const PolarMesh& mesh, const Vec& w, int curve_samples) {
    // Homogeneous Dirichlet rings take the sign of their interior neighbour so that they do
    // not register as a spurious contour.
    Vec signed_field = w;
    for (int i = 0; i < mesh.nr(); ++i) {
        if (!mesh.dirichlet_ring(i)) continue;
        const int inner = i == 0 ? 1 : i - 1;
        for (int j = 0; j < mesh.n_theta(); ++j) {
            const int k = mesh.index(i, j);
            if (w(k) == 0.0) signed_field(k) = std::copysign(1e-300, w(mesh.index(inner, j)));
        }
    }
    ClosedCurve gamma = from_level_set(signed_field, mesh.mapped_grid(), curve_samples);
    Vec omega(gamma.size());
    for (int k = 0; k < gamma.size(); ++k) {
        const Point2 p{gamma.x()(k), gamma.y()(k)};
        const Point2 nu{gamma.nx()(k), gamma.ny()(k)};
        const double radius = std::hypot(p.x, p.y);
        const double h = mesh.radial_spacing(mesh.ring_below(radius));
        auto at = [&](double t) { return mesh.interpolate(w, Point2{p.x + t * nu.x, p.y + t * nu.y}); };
        const double w0 = at(0.0);
        const double plus = (-3.0 * w0 + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
        const double minus = (3.0 * w0 - 4.0 * at(-h) + at(-2.0 * h)) / (2.0 * h);
        omega(k) = 0.5 * (plus + minus);
        if (!(omega(k) > 0.0)) {
            std::ostringstream msg;
            msg << "interface slope " << omega(k) << " at s = " << gamma.s()(k) << " is not positive";
            fail(ErrorKind::NonPositiveOmega, msg.str());
        }
    }
    return {std::move(gamma), std::move(omega)};
}

LimitSolution fit_interface_mesh(const LimitSolution& ls, const Nonlinearity& f, const RadialGrading& grading,
                                 int n_theta, double tol, const LimitOptions& options) {
    auto [mean_r, spread] = ls.gamma.radius_about({0.0, 0.0});
    require(spread <= 1e-3 * mean_r, ErrorKind::InvalidInput,
            "interface-fitted meshes require a circular interface centred at the origin");
    const PolarMesh& old = *ls.mesh;
    double radius = mean_r;
    LimitSolution current = ls;
    for (int pass = 0; pass < 12; ++pass) {
        RadialGrading g = grading;
        g.focus = radius;
        auto mesh = std::make_shared<const PolarMesh>(
            PolarMesh::make(old.kind(), old.r_inner(), old.r_outer(), n_theta, g));
        Vec init(mesh->size());
        for (int k = 0; k < mesh->size(); ++k) init(k) = current.mesh->interpolate(current.w, mesh->node(k));
        current = solve_limit(mesh, f, init, ls.boundary, tol, options);
        const auto [r_new, s_new] = current.gamma.radius_about({0.0, 0.0});
        const double change = std::abs(r_new - radius);
        radius = r_new;
        if (change <= 1e-12 * radius) break;
    }
    const PolarMesh& m = *current.mesh;
    const int g = m.ring_at(radius, 1e-9 * radius);
    require(g > 0, ErrorKind::NonConvergence, "interface ring fitting did not converge");
    current.gamma_ring = g;
    current.positive_side = current.w(m.index(g + 1, 0)) > 0.0 ? 1 : -1;
    // The interface is the ring itself: rebuild the exact circle with the extracted orientation.
    const bool ccw = current.positive_side < 0;
    const int samples = m.n_theta() >= 16 ? m.n_theta() : current.gamma.size();
    ClosedCurve circle = ClosedCurve::circle({0.0, 0.0}, m.r(g), samples, ccw);
    Vec omega(circle.size());
    for (int k = 0; k < circle.size(); ++k) {
        const double th = std::atan2(circle.y()(k), circle.x()(k));
        const double h = m.radial_spacing(g);
        const int side = current.positive_side;
        auto at = [&](double t) { return m.interpolate(current.w, m.r(g) + t, th); };
        const double w0 = at(0.0);
        const double plus = (-3.0 * w0 + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
        const double minus = (3.0 * w0 - 4.0 * at(-h) + at(-2.0 * h)) / (2.0 * h);
        omega(k) = side * 0.5 * (plus + minus);
        require(omega(k) > 0.0, ErrorKind::NonPositiveOmega, "interface slope is not positive");
    }
    current.gamma = std::move(circle);
    current.omega = std::move(omega);
    return current;
}

double smallest_eigenvalue(const BandOperator& band, const Vec& potential, int max_iterations) {
    SpMat A = band.matrix(potential);
    SparseFactor lu;
    try {
        lu.factor(A);
    } catch (const Error&) {
        return 0.0;
    }
    const Vec wts = band.weights();
    auto wdot = [&](const Vec& a, const Vec& b) { return (a.array() * b.array() * wts.array()).sum(); };
    Vec x(band.size());
    for (int k = 0; k < x.size(); ++k) x(k) = 1.0 + 0.01 * std::sin(1.0 + 0.37 * k);
    x /= std::sqrt(wdot(x, x));
    double lambda = wdot(x, A * x);
    for (int it = 0; it < max_iterations; ++it) {
        Vec y = lu.solve(x);
        if (!y.allFinite()) return 0.0;
        const double nrm = std::sqrt(wdot(y, y));
        if (nrm == 0.0) fail(ErrorKind::EigSolverFailure, "inverse iteration produced a zero vector");
        x = y / nrm;
        const double next = wdot(x, A * x);
        if (std::abs(next - lambda) <= 1e-13 * std::max(1.0, std::abs(next))) return next;
        lambda = next;
    }
    fail(ErrorKind::EigSolverFailure, "inverse iteration did not converge");
}

Margins nondegeneracy_margins(const LimitSolution& ls, const Nonlinearity& f) {
    const PolarMesh& m = *ls.mesh;
    require(ls.gamma_ring > 0, ErrorKind::InvalidInput, "margins need an interface-fitted limit solution");
    Vec pot(m.size());
    double fu_max = 0.0;
    for (int k = 0; k < m.size(); ++k) {
        pot(k) = f.fu(std::abs(ls.w(k)), m.node(k));
        fu_max = std::max(fu_max, std::abs(pot(k)));
    }
    Margins out;
    const auto r1 = ls.omega_rings(0);
    const auto r2 = ls.omega_rings(1);
    out.sigma1 = smallest_eigenvalue(BandOperator(m, r1.first, r1.second), pot);
    out.sigma2 = smallest_eigenvalue(BandOperator(m, r2.first, r2.second), pot);
    out.sigma_omega = smallest_eigenvalue(BandOperator(m, first_unknown_ring(m), m.nr() - 2), pot);
    out.scale = std::max(1.0, fu_max);
    out.degenerate = out.min_margin() < 1e-6 * out.scale;
    return out;
}

Vec ring_to_curve(const LimitSolution& ls, const Vec& ring_trace) {
    const int m = ls.gamma.size();
    if (ring_trace.size() == 1) return Vec::Constant(m, ring_trace(0));
    const int nt = static_cast<int>(ring_trace.size());
    require(nt == m, ErrorKind::InvalidInput, "curve samples do not coincide with the interface ring");
    Vec out(m);
    const bool ccw = ls.gamma.kappa()(0) > 0.0;
    for (int k = 0; k < m; ++k) out(k) = ring_trace(ccw ? k : (nt - k) % nt);
    return out;
}

Vec curve_to_ring(const LimitSolution& ls, const Vec& curve_values) {
    const int nt = ls.mesh->n_theta();
    if (nt == 1) return Vec::Constant(1, curve_values.mean());
    require(curve_values.size() == nt, ErrorKind::InvalidInput, "curve samples do not coincide with the interface ring");
    Vec out(nt);
    const bool ccw = ls.gamma.kappa()(0) > 0.0;
    for (int j = 0; j < nt; ++j) out(j) = curve_values(ccw ? j : (nt - j) % nt);
    return out;
}

std::pair<double, double> jet_identity_defects(const LimitSolution& ls) {
    const PolarMesh& m = *ls.mesh;
    double jet = 0.0, tangential = 0.0;
    for (int k = 0; k < ls.gamma.size(); ++k) {
        const double s = ls.gamma.s()(k);
        const Point2 p{ls.gamma.x()(k), ls.gamma.y()(k)};
        const Point2 nu{ls.gamma.nx()(k), ls.gamma.ny()(k)};
        const double h = m.radial_spacing(m.ring_below(std::hypot(p.x, p.y)));
        auto at = [&](double t) { return m.interpolate(ls.w, Point2{p.x + t * nu.x, p.y + t * nu.y}); };
        const double wp = at(h), w0 = at(0.0), wm = at(-h);
        const double dt = (wp - wm) / (2.0 * h);
        const double dtt = (wp - 2.0 * w0 + wm) / (h * h);
        jet = std::max(jet, std::abs(dtt - ls.gamma.kappa()(k) * dt));
        const double hs = 0.5 * ls.gamma.ds();
        const double ds = (m.interpolate(ls.w, ls.gamma.point(s + hs)) - m.interpolate(ls.w, ls.gamma.point(s - hs))) /
                          (2.0 * hs);
        tangential = std::max(tangential, std::abs(ds));
    }
    return {jet, tangential};
}

}  // namespace phasesep
