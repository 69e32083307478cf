#include "phasesep/profile1d.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace phasesep {

namespace {

struct Stencil {
    std::array<int, 6> idx{};
    std::array<double, 6> coef{};
    int size = 0;
};

// Fourth-order second-derivative stencil at node j (already divided by h^2).
Stencil d2_stencil(int j, int n, double h) {
    Stencil s;
    const double scale = 1.0 / (12.0 * h * h);
    auto set = [&](int start, int dir, std::initializer_list<double> c) {
        int k = 0;
        for (double v : c) {
            s.idx[k] = start + dir * k;
            s.coef[k] = v * scale;
            ++k;
        }
        s.size = k;
    };
    if (j == 0) {
        set(0, +1, {45.0, -154.0, 214.0, -156.0, 61.0, -10.0});
    } else if (j == 1) {
        set(0, +1, {10.0, -15.0, -4.0, 14.0, -6.0, 1.0});
    } else if (j == n - 2) {
        set(n - 1, -1, {10.0, -15.0, -4.0, 14.0, -6.0, 1.0});
    } else if (j == n - 1) {
        set(n - 1, -1, {45.0, -154.0, 214.0, -156.0, 61.0, -10.0});
    } else {
        set(j - 2, +1, {-1.0, 16.0, -30.0, 16.0, -1.0});
    }
    return s;
}

double apply_stencil(const Stencil& s, const Vec& u) {
    double acc = 0.0;
    for (int k = 0; k < s.size; ++k) acc += s.coef[k] * u(s.idx[k]);
    return acc;
}

void check_grid(const ProfileGrid& grid, const Vec& u, const char* what) {
    if (u.size() != grid.n) {
        std::ostringstream msg;
        msg << "grid mismatch: " << what << " has " << u.size() << " entries, grid has " << grid.n;
        fail(ErrorKind::InvalidInput, msg.str());
    }
}

// Interior rows of the linear operator  -D2 + diag(p11, p22) + offdiag(p12)  with
// unknown ordering [Z1(0..n-1), Z2(0..n-1)].
void add_linear_rows(Triplets& trip, int n, double h, const Vec& p11, const Vec& p22, const Vec& p12,
                     double shift) {
    for (int j = 1; j < n - 1; ++j) {
        const Stencil s = d2_stencil(j, n, h);
        for (int k = 0; k < s.size; ++k) {
            trip.emplace_back(j, s.idx[k], -s.coef[k]);
            trip.emplace_back(n + j, n + s.idx[k], -s.coef[k]);
        }
        trip.emplace_back(j, j, p11(j) + shift);
        trip.emplace_back(n + j, n + j, p22(j) + shift);
        trip.emplace_back(j, n + j, p12(j));
        trip.emplace_back(n + j, j, p12(j));
    }
}

Vec initial_profile_guess(const ProfileGrid& grid) {
    // Smooth positive guess with the expected linear growth on the right and decay on the left.
    const double slope = 1.9;
    Vec v(grid.n);
    for (int j = 0; j < grid.n; ++j) {
        const double x = grid.x(j);
        const double linear = 0.5 * (slope * x + std::sqrt(slope * slope * x * x + 4.0));
        const double damp = x < 0.0 ? std::exp(-0.3 * x * x) : 1.0;
        v(j) = linear * damp;
    }
    v(0) = 0.0;
    return v;
}

}  // namespace

ProfileGrid ProfileGrid::make(double T, int n) {
    require(std::isfinite(T) && T >= 8.0, ErrorKind::InvalidInput, "profile half-width T must be >= 8");
    require(n >= 801 && n % 2 == 1, ErrorKind::InvalidInput, "profile node count must be odd and >= 801");
    return ProfileGrid{T, n};
}

Vec ProfileGrid::nodes() const {
    Vec x(n);
    for (int j = 0; j < n; ++j) x(j) = this->x(j);
    return x;
}

Vec fd_first_derivative(const Vec& u, double h) {
    const Eigen::Index n = u.size();
    require(n >= 5, ErrorKind::InvalidInput, "first derivative needs at least 5 samples");
    Vec d(n);
    const double s = 1.0 / (12.0 * h);
    d(0) = s * (-25.0 * u(0) + 48.0 * u(1) - 36.0 * u(2) + 16.0 * u(3) - 3.0 * u(4));
    d(1) = s * (-3.0 * u(0) - 10.0 * u(1) + 18.0 * u(2) - 6.0 * u(3) + u(4));
    for (Eigen::Index j = 2; j < n - 2; ++j)
        d(j) = s * (u(j - 2) - 8.0 * u(j - 1) + 8.0 * u(j + 1) - u(j + 2));
    const Eigen::Index m = n - 1;
    d(m - 1) = -s * (-3.0 * u(m) - 10.0 * u(m - 1) + 18.0 * u(m - 2) - 6.0 * u(m - 3) + u(m - 4));
    d(m) = -s * (-25.0 * u(m) + 48.0 * u(m - 1) - 36.0 * u(m - 2) + 16.0 * u(m - 3) - 3.0 * u(m - 4));
    return d;
}

Vec fd_second_derivative(const Vec& u, double h) {
    const int n = static_cast<int>(u.size());
    require(n >= 6, ErrorKind::InvalidInput, "second derivative needs at least 6 samples");
    Vec d(n);
    for (int j = 0; j < n; ++j) d(j) = apply_stencil(d2_stencil(j, n, h), u);
    return d;
}

double trapezoid(const ProfileGrid& grid, const Vec& f) {
    check_grid(grid, f, "integrand");
    return grid.h() * (f.sum() - 0.5 * (f(0) + f(grid.n - 1)));
}

ProfilePair profile_residual(const ProfileGrid& grid, const Vec& V1, const Vec& V2) {
    check_grid(grid, V1, "V1");
    check_grid(grid, V2, "V2");
    const int n = grid.n;
    const double h = grid.h();
    ProfilePair r{Vec::Zero(n), Vec::Zero(n)};
    for (int j = 1; j < n - 1; ++j) {
        const Stencil s = d2_stencil(j, n, h);
        r.first(j) = -apply_stencil(s, V1) + V1(j) * V2(j) * V2(j);
        r.second(j) = -apply_stencil(s, V2) + V2(j) * V1(j) * V1(j);
    }
    return r;
}

ProfileSolution solve_profile(double T, int n, double tol) {
    ProfileOptions options;
    options.tol = tol;
    return solve_profile(T, n, options);
}

ProfileSolution solve_profile(double T, int n, const ProfileOptions& options) {
    const ProfileGrid grid = ProfileGrid::make(T, n);
    require(options.tol > 0.0, ErrorKind::InvalidInput, "profile tolerance must be positive");
    const double h = grid.h();
    const int c = grid.center();

    Vec V1 = initial_profile_guess(grid);
    Vec V2 = V1.reverse();

    auto residual_vector = [&](const Vec& a, const Vec& b) {
        ProfilePair r = profile_residual(grid, a, b);
        Vec F(2 * n);
        F.head(n) = r.first;
        F.tail(n) = r.second;
        F(0) = a(0);
        F(n - 1) = a(c) - 1.0;
        F(n) = b(c) - 1.0;
        F(2 * n - 1) = b(n - 1);
        return F;
    };
    auto interior_sup = [&](const Vec& F) {
        double m = 0.0;
        for (int j = 1; j < n - 1; ++j) m = std::max({m, std::abs(F(j)), std::abs(F(n + j))});
        return std::max({m, std::abs(F(0)), std::abs(F(n - 1)), std::abs(F(n)), std::abs(F(2 * n - 1))});
    };

    Vec F = residual_vector(V1, V2);
    double res = interior_sup(F);
    int iter = 0;
    double last_step = 0.0;
    // The residual of the fourth-order stencil has a rounding floor proportional to the
    // magnitude of the profile (about 1e-11 per unit of |V| at h = 0.01).
    auto threshold = [&]() { return options.tol * std::max(1.0, sup_norm(V1)); };
    for (; iter < options.max_iterations && res > threshold(); ++iter) {
        Triplets trip;
        trip.reserve(static_cast<size_t>(16 * n));
        Vec p11 = V2.cwiseProduct(V2);
        Vec p22 = V1.cwiseProduct(V1);
        Vec p12 = 2.0 * V1.cwiseProduct(V2);
        add_linear_rows(trip, n, h, p11, p22, p12, 0.0);
        trip.emplace_back(0, 0, 1.0);
        trip.emplace_back(n - 1, c, 1.0);
        trip.emplace_back(n, n + c, 1.0);
        trip.emplace_back(2 * n - 1, 2 * n - 1, 1.0);
        SpMat J(2 * n, 2 * n);
        J.setFromTriplets(trip.begin(), trip.end());
        SparseFactor lu(J);
        Vec delta = lu.solve(-F);

        const double merit0 = F.squaredNorm();
        double lambda = 1.0;
        Vec a, b, Fn;
        for (int halving = 0; halving < 30; ++halving) {
            a = V1 + lambda * delta.head(n);
            b = V2 + lambda * delta.tail(n);
            Fn = residual_vector(a, b);
            if (Fn.squaredNorm() < merit0 || lambda < 1e-8) break;
            lambda *= 0.5;
        }
        last_step = lambda * sup_norm(delta);
        V1 = std::move(a);
        V2 = std::move(b);
        F = std::move(Fn);
        const double new_res = interior_sup(F);
        // Rounding floor of the fourth-order stencil on O(T) values.
        res = new_res;
    }
    if (res > threshold()) {
        std::ostringstream msg;
        msg << "profile Newton stalled after " << iter << " iterations; residual " << res
            << ", iterate norm " << sup_norm(V1) << ", last step " << last_step;
        fail(ErrorKind::NonConvergence, msg.str());
    }

    const double tail = std::max(std::abs(V1(1)), std::abs(V2(n - 2)));
    if (tail > 10.0 * options.tol) {
        std::ostringstream msg;
        msg << "profile tail value " << tail << " at the decaying boundary exceeds 10*tol; increase T";
        fail(ErrorKind::DomainTooSmall, msg.str());
    }

    ProfileSolution p;
    p.grid = grid;
    p.V1 = V1;
    p.V2 = V2;
    p.dV1 = fd_first_derivative(V1, h);
    p.dV2 = fd_first_derivative(V2, h);
    p.sup_residual = res;
    p.newton_iterations = iter;
    const auto [A, B] = growth_constants(p);
    p.A = A;
    p.B = B;
    require(p.A > 0.0, ErrorKind::WrongBranch, "profile growth slope A is not positive");
    if (p.symmetry_defect() > options.symmetry_tol) {
        std::ostringstream msg;
        msg << "profile symmetry defect " << p.symmetry_defect() << " exceeds " << options.symmetry_tol;
        fail(ErrorKind::NonConvergence, msg.str());
    }
    return p;
}

std::pair<double, double> growth_constants(const ProfileSolution& p) {
    const int n = p.grid.n;
    check_grid(p.grid, p.V1, "V1");
    const double A = p.dV1.size() == n ? p.dV1(n - 1) : fd_first_derivative(p.V1, p.grid.h())(n - 1);
    const double B = p.V1(n - 1) - A * p.grid.T;
    return {A, B};
}

double ProfileSolution::first_integral_drift() const {
    const int c = grid.center();
    const double e0 = dV1(c) * dV1(c) + dV2(c) * dV2(c) - V1(c) * V1(c) * V2(c) * V2(c);
    double m = 0.0;
    for (int j = 0; j < grid.n; ++j) {
        const double e = dV1(j) * dV1(j) + dV2(j) * dV2(j) - V1(j) * V1(j) * V2(j) * V2(j);
        m = std::max(m, std::abs(e - e0));
    }
    return m;
}

double ProfileSolution::first_integral_gap() const {
    double m = 0.0;
    for (int j = 0; j < grid.n; ++j) {
        const double e = dV1(j) * dV1(j) + dV2(j) * dV2(j) - V1(j) * V1(j) * V2(j) * V2(j);
        m = std::max(m, std::abs(e - A * A));
    }
    return m;
}

double ProfileSolution::symmetry_defect() const {
    double m = 0.0;
    for (int j = 0; j < grid.n; ++j) m = std::max(m, std::abs(V1(j) - V2(grid.n - 1 - j)));
    return m;
}

double ProfileSolution::closure_defect() const {
    const double h = grid.h();
    const int n = grid.n;
    const double right = apply_stencil(d2_stencil(n - 1, n, h), V1);
    const double left = apply_stencil(d2_stencil(0, n, h), V2);
    return std::max(std::abs(right), std::abs(left));
}

ProfilePair apply_L0(const ProfileSolution& p, const ProfilePair& Z) {
    check_grid(p.grid, Z.first, "Z1");
    check_grid(p.grid, Z.second, "Z2");
    const int n = p.grid.n;
    const double h = p.grid.h();
    ProfilePair out{Vec::Zero(n), Vec::Zero(n)};
    for (int j = 1; j < n - 1; ++j) {
        const Stencil s = d2_stencil(j, n, h);
        const double v1 = p.V1(j), v2 = p.V2(j);
        out.first(j) = -apply_stencil(s, Z.first) + v2 * v2 * Z.first(j) + 2.0 * v1 * v2 * Z.second(j);
        out.second(j) = -apply_stencil(s, Z.second) + v1 * v1 * Z.second(j) + 2.0 * v1 * v2 * Z.first(j);
    }
    return out;
}

namespace {

SpMat linearized_matrix(const ProfileSolution& p, double shift) {
    const int n = p.grid.n;
    Triplets trip;
    trip.reserve(static_cast<size_t>(16 * n));
    Vec p11 = p.V2.cwiseProduct(p.V2);
    Vec p22 = p.V1.cwiseProduct(p.V1);
    Vec p12 = 2.0 * p.V1.cwiseProduct(p.V2);
    add_linear_rows(trip, n, p.grid.h(), p11, p22, p12, shift);
    trip.emplace_back(0, 0, 1.0);
    trip.emplace_back(n - 1, n - 1, 1.0);
    trip.emplace_back(n, n, 1.0);
    trip.emplace_back(2 * n - 1, 2 * n - 1, 1.0);
    SpMat M(2 * n, 2 * n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

}  // namespace

ProfileW solve_W(const ProfileSolution& p, double tol) {
    require(tol > 0.0, ErrorKind::InvalidInput, "tolerance must be positive");
    const int n = p.grid.n;
    const double T = p.grid.T;
    SpMat M = linearized_matrix(p, 0.0);
    SparseFactor lu(M);

    Vec rhs(2 * n);
    rhs.head(n) = -p.dV1;
    rhs.tail(n) = -p.dV2;
    // Tail pinning: W1 -> 0 on the left, W1 -> x^2 V1'/2 on the right, mirrored for W2.
    rhs(0) = 0.0;
    rhs(n - 1) = 0.5 * T * T * p.dV1(n - 1);
    rhs(n) = 0.5 * T * T * p.dV2(0);
    rhs(2 * n - 1) = 0.0;
    Vec sol = lu.solve(rhs);
    // One step of iterative refinement against the assembled operator.
    sol += lu.solve(rhs - M * sol);

    ProfileW w;
    w.grid = p.grid;
    w.W1 = sol.head(n);
    w.W2 = sol.tail(n);
    w.dW1 = fd_first_derivative(w.W1, p.grid.h());
    w.dW2 = fd_first_derivative(w.W2, p.grid.h());
    w.C = w.W1(p.grid.center());

    ProfilePair r = apply_L0(p, ProfilePair{w.W1, w.W2});
    double res = 0.0;
    for (int j = 1; j < n - 1; ++j)
        res = std::max({res, std::abs(r.first(j) + p.dV1(j)), std::abs(r.second(j) + p.dV2(j))});
    w.sup_residual = res;
    if (res > tol) {
        std::ostringstream msg;
        msg << "W residual " << res << " exceeds tolerance " << tol;
        fail(ErrorKind::NonConvergence, msg.str());
    }
    return w;
}

double Lomega_condition(const ProfileSolution& p, double omega) {
    SpMat M = linearized_matrix(p, omega * omega);
    SparseFactor lu(M);
    return condition_estimate_1norm(M, lu);
}

ProfilePair solve_Lomega(const ProfileSolution& p, const ModeRHS& rhs, double tol) {
    require(rhs.grid == p.grid, ErrorKind::InvalidInput, "grid mismatch between profile and mode rhs");
    check_grid(p.grid, rhs.g1, "g1");
    check_grid(p.grid, rhs.g2, "g2");
    require(rhs.omega >= 0.0 && std::isfinite(rhs.omega), ErrorKind::InvalidInput, "omega must be >= 0");
    require(rhs.g1.allFinite() && rhs.g2.allFinite(), ErrorKind::InvalidInput, "mode rhs must be finite");
    const int n = p.grid.n;
    const double shift = rhs.omega * rhs.omega;
    SpMat M = linearized_matrix(p, shift);
    SparseFactor lu(M);
    const double cond = condition_estimate_1norm(M, lu);
    if (cond > 1e12) {
        std::ostringstream msg;
        msg << "condition estimate " << cond << " exceeds 1e12 at omega = " << rhs.omega;
        fail(ErrorKind::IllConditioned, msg.str());
    }
    Vec b(2 * n);
    b.head(n) = rhs.g1;
    b.tail(n) = rhs.g2;
    b(0) = b(n - 1) = b(n) = b(2 * n - 1) = 0.0;
    Vec sol = lu.solve(b);
    sol += lu.solve(b - M * sol);
    const double res = sup_norm(M * sol - b);
    if (res > tol) {
        std::ostringstream msg;
        msg << "mode solve residual " << res << " exceeds tolerance " << tol;
        fail(ErrorKind::NonConvergence, msg.str());
    }
    return ProfilePair{sol.head(n), sol.tail(n)};
}

Vec phi_xi_weight(const ProfileSolution& p) {
    const int n = p.grid.n;
    Vec phi(n);
    for (int j = 0; j < n; ++j) {
        const double v1 = p.V1(j), v2 = p.V2(j), d1 = p.dV1(j), d2 = p.dV2(j);
        const double dd1 = v1 * v2 * v2;
        const double dd2 = v2 * v1 * v1;
        const double ddd1 = d1 * v2 * v2 + 2.0 * v1 * v2 * d2;
        const double ddd2 = d2 * v1 * v1 + 2.0 * v2 * v1 * d1;
        phi(j) = -(ddd1 * d1 + dd1 * dd1 + ddd2 * d2 + dd2 * dd2);
    }
    return phi;
}

ProfileSampler::ProfileSampler(const ProfileSolution& p, const ProfileW& w)
    : grid_(p.grid),
      V1_(p.V1),
      V2_(p.V2),
      dV1_(p.dV1),
      dV2_(p.dV2),
      W1_(w.W1),
      W2_(w.W2),
      dW1_(w.dW1),
      dW2_(w.dW2),
      A_(p.A),
      B_(p.B) {
    require(w.grid == p.grid, ErrorKind::InvalidInput, "grid mismatch between profile and W");
    ddV1_ = p.V1.cwiseProduct(p.V2).cwiseProduct(p.V2);
    ddV2_ = p.V2.cwiseProduct(p.V1).cwiseProduct(p.V1);
}

ProfileSampler::Sample ProfileSampler::operator()(double x) const {
    if (!(std::abs(x) <= grid_.T)) {
        std::ostringstream msg;
        msg << "stretched argument " << x << " outside profile half-width " << grid_.T;
        fail(ErrorKind::ProfileRangeExceeded, msg.str());
    }
    const double h = grid_.h();
    const double u = (x + grid_.T) / h;
    int j = static_cast<int>(std::floor(u));
    j = std::clamp(j, 0, grid_.n - 2);
    const double s = u - j;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    auto herm = [&](const Vec& f, const Vec& df) {
        return h00 * f(j) + h10 * h * df(j) + h01 * f(j + 1) + h11 * h * df(j + 1);
    };
    Sample out;
    out.V1 = herm(V1_, dV1_);
    out.V2 = herm(V2_, dV2_);
    out.dV1 = herm(dV1_, ddV1_);
    out.dV2 = herm(dV2_, ddV2_);
    out.W1 = herm(W1_, dW1_);
    out.W2 = herm(W2_, dW2_);
    return out;
}

}  // namespace phasesep
