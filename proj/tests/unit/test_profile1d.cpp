#include "fixtures.hpp"
#include "phasesep/error.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace phasesep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Taylor-series shooting at 45 digits (tests/oracles/profile_shooting.py).
constexpr double kA = 1.8868343035153018;
constexpr double kV1p0 = 1.5099906769450721;
constexpr double kB = 0.89071158129268247;

double interior_sup(const Vec& v, int margin) {
    return v.segment(margin, v.size() - 2 * margin).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("profile constants match the high-precision shooting oracle", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    CHECK_THAT(p.A, WithinAbs(kA, 1e-8));
    CHECK_THAT(p.V1p0(), WithinAbs(kV1p0, 1e-8));
    CHECK_THAT(p.B, WithinAbs(kB, 1e-6));
    const auto [A, B] = growth_constants(p);
    CHECK(A == p.A);
    CHECK(B == p.B);
}

TEST_CASE("profile satisfies normalization, symmetry and the first integral", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    const int c = p.grid.center();
    CHECK_THAT(p.V1(c), WithinAbs(1.0, 1e-12));
    CHECK_THAT(p.V2(c), WithinAbs(1.0, 1e-12));
    CHECK(p.symmetry_defect() <= 1e-8);
    CHECK(p.first_integral_drift() <= 1e-6);
    CHECK(p.first_integral_gap() <= 1e-6);
    CHECK(std::abs(p.A * p.A - (2.0 * p.V1p0() * p.V1p0() - 1.0)) <= 1e-4);
    CHECK(p.sup_residual <= 1e-9);
    for (int j = 0; j < p.grid.n; ++j) {
        REQUIRE(p.V1(j) >= -1e-14);
        REQUIRE(p.V2(j) >= -1e-14);
        REQUIRE(p.dV1(j) >= -1e-14);
    }
}

TEST_CASE("profile tails are Gaussian", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    const double h = p.grid.h();
    const int at_minus_T_plus_1 = static_cast<int>(std::lround(1.0 / h));
    const int at_minus_half_T = static_cast<int>(std::lround(p.grid.T / 2.0 / h));
    CHECK(p.V1(at_minus_T_plus_1) / p.V1(at_minus_half_T) <= 1e-3);
}

TEST_CASE("growth slope converges under refinement", "[profile1d]") {
    const double a1 = solve_profile(12.0, 801, 1e-10).A;
    const double a2 = solve_profile(12.0, 1601, 1e-10).A;
    const double a3 = solve_profile(12.0, 3201, 1e-10).A;
    const double order = std::log2(std::abs(a1 - a2) / std::abs(a2 - a3));
    CHECK(order >= 2.0);
}

TEST_CASE("translation and scaling generate the kernel of L0", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    const Vec x = p.grid.nodes();
    const ProfilePair X{p.dV1, p.dV2};
    const ProfilePair LX = apply_L0(p, X);
    CHECK(interior_sup(LX.first, 8) <= 1e-6);
    CHECK(interior_sup(LX.second, 8) <= 1e-6);

    const ProfilePair Y{(x.array() * p.dV1.array() + p.V1.array()).matrix(),
                        (x.array() * p.dV2.array() + p.V2.array()).matrix()};
    const ProfilePair LY = apply_L0(p, Y);
    const int margin = p.grid.n / 8;
    CHECK(interior_sup(LY.first, margin) <= 1e-5);
    CHECK(interior_sup(LY.second, margin) <= 1e-5);
}

TEST_CASE("apply_L0 agrees with the finite-difference Jacobian of the residual", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    const Vec x = p.grid.nodes();
    const Vec z1 = (-0.1 * x.array().square()).exp() * (1.0 + 0.3 * x.array()).matrix().array();
    const Vec z2 = (-0.05 * (x.array() - 1.0).square()).exp().matrix();
    const ProfilePair L = apply_L0(p, {z1, z2});
    const double step = 1e-4;
    const ProfilePair Fp = profile_residual(p.grid, p.V1 + step * z1, p.V2 + step * z2);
    const ProfilePair Fm = profile_residual(p.grid, p.V1 - step * z1, p.V2 - step * z2);
    const Vec d1 = (Fp.first - Fm.first) / (2.0 * step);
    const Vec d2 = (Fp.second - Fm.second) / (2.0 * step);
    CHECK(interior_sup(d1 - L.first, 2) <= 1e-5);
    CHECK(interior_sup(d2 - L.second, 2) <= 1e-5);
}

TEST_CASE("W solves L0 W = -V' with the antisymmetric normalization", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    const ProfileW& W = fixtures::profile_W();
    const ProfilePair LW = apply_L0(p, {W.W1, W.W2});
    CHECK(interior_sup(LW.first + p.dV1, 1) <= 1e-8);
    CHECK(interior_sup(LW.second + p.dV2, 1) <= 1e-8);
    const int c = p.grid.center();
    CHECK_THAT(W.W1(c) + W.W2(c), WithinAbs(0.0, 1e-10));
    CHECK(W.C == W.W1(c));

    const Vec x = p.grid.nodes();
    double antisym = 0.0;
    for (int j = 0; j < p.grid.n; ++j) antisym = std::max(antisym, std::abs(W.W1(j) + W.W2(p.grid.n - 1 - j)));
    CHECK(antisym <= 1e-8);

    // W1 - x^2 V1'/2 is linear on the right tail with slope B/3, independent of T.
    auto d1 = [&](int j) { return W.W1(j) - 0.5 * x(j) * x(j) * p.dV1(j); };
    const int a = c + static_cast<int>(std::lround(5.0 / p.grid.h()));
    const int b = c + static_cast<int>(std::lround(8.0 / p.grid.h()));
    CHECK_THAT((d1(b) - d1(a)) / (x(b) - x(a)), WithinAbs(p.B / 3.0, 1e-6));
    CHECK_THAT(d1(p.grid.n - 1), WithinAbs(0.0, 1e-12));
}

TEST_CASE("phi_xi is even and pinned by the slope at the origin", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    const Vec phi = phi_xi_weight(p);
    const int c = p.grid.center();
    CHECK_THAT(phi(c), WithinAbs(-2.0 * (1.0 - p.V1p0() * p.V1p0()), 1e-6));
    double odd = 0.0;
    for (int j = 0; j < p.grid.n; ++j) odd = std::max(odd, std::abs(phi(j) - phi(p.grid.n - 1 - j)));
    CHECK(odd <= 1e-8);
    CHECK(trapezoid(p.grid, phi.cwiseAbs2()) > 0.0);
}

TEST_CASE("L_omega round trip and decay", "[profile1d]") {
    const ProfileSolution& p = fixtures::profile();
    const Vec x = p.grid.nodes();
    Vec phi1 = (-0.2 * x.array().square()).exp().matrix();
    Vec phi2 = (x.array() * (-0.3 * x.array().square()).exp()).matrix();
    phi1(0) = phi1(p.grid.n - 1) = phi2(0) = phi2(p.grid.n - 1) = 0.0;
    const double omega = 1.0;
    ProfilePair g = apply_L0(p, {phi1, phi2});
    ModeRHS rhs{p.grid, g.first + omega * omega * phi1, g.second + omega * omega * phi2, omega};
    const ProfilePair back = solve_Lomega(p, rhs, 1e-10);
    CHECK((back.first - phi1).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((back.second - phi2).cwiseAbs().maxCoeff() <= 1e-8);

    ModeRHS bump{p.grid, (1.0 / (x.array().cosh())).matrix(), Vec::Zero(p.grid.n), 1.0};
    const ProfilePair sol = solve_Lomega(p, bump, 1e-10);
    const double peak = std::max(sol.first.cwiseAbs().maxCoeff(), sol.second.cwiseAbs().maxCoeff());
    for (int j = 0; j < p.grid.n; ++j) {
        if (std::abs(x(j)) >= 10.0) {
            REQUIRE(std::abs(sol.first(j)) < 1e-3 * peak);
            REQUIRE(std::abs(sol.second(j)) < 1e-3 * peak);
        }
    }
}

TEST_CASE("profile input validation and sampler range", "[profile1d]") {
    CHECK_THROWS_AS(solve_profile(4.0, 2401, 1e-10), Error);
    CHECK_THROWS_AS(solve_profile(12.0, 2400, 1e-10), Error);
    const ProfileSampler& s = fixtures::sampler();
    const auto mid = s(0.0);
    CHECK_THAT(mid.V1, WithinAbs(1.0, 1e-14));
    CHECK_THAT(mid.V2, WithinAbs(1.0, 1e-14));
    try {
        s(s.half_width() + 1.0);
        FAIL("sampler accepted an abscissa outside the grid");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ProfileRangeExceeded);
    }
}
