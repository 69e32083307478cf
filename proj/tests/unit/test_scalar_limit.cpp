#include "fixtures.hpp"
#include "phasesep/error.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include <cmath>

using namespace phasesep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Radial shooting at 1e-12 (tests/oracles/radial_limit_shooting.py).
constexpr double kDiskRadius = 0.484264750433057;
constexpr double kDiskOmega = 2.544891346663369;
constexpr double kDiskCentre = 0.782232327707324;

/// First Dirichlet eigenvalue of the annulus a < r < b: smallest root of
/// J0(k a) Y0(k b) - J0(k b) Y0(k a).
double annulus_dirichlet_eigenvalue(double a, double b) {
    auto g = [&](double k) {
        return std::cyl_bessel_j(0.0, k * a) * std::cyl_neumann(0.0, k * b) -
               std::cyl_bessel_j(0.0, k * b) * std::cyl_neumann(0.0, k * a);
    };
    double lo = 1e-3, step = 1e-2;
    while (g(lo) * g(lo + step) > 0.0) lo += step;
    double hi = lo + step;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(lo) * g(mid) <= 0.0 ? hi : lo) = mid;
    }
    const double k = 0.5 * (lo + hi);
    return k * k;
}

std::shared_ptr<const PolarMesh> annulus_mesh(double h, int nt = 1) {
    RadialGrading g;
    g.h_coarse = h;
    return std::make_shared<const PolarMesh>(PolarMesh::make(GeometryKind::Annulus, 1.0, std::exp(1.0), nt, g));
}

double annulus_error(const LimitSolution& ls) {
    double err = 0.0;
    for (int k = 0; k < ls.mesh->size(); ++k) {
        const Point2 p = ls.mesh->node(k);
        err = std::max(err, std::abs(ls.w(k) - (2.0 * std::log(std::hypot(p.x, p.y)) - 1.0)));
    }
    return err;
}

}  // namespace

TEST_CASE("annulus harmonic solution matches the closed form", "[scalar_limit]") {
    const auto mesh = annulus_mesh(1.0 / 256.0);
    const auto bc = fixtures::log_boundary();
    const LimitSolution ls = solve_limit(mesh, Nonlinearity::zero(), radial_initial_guess(*mesh, 1.0, bc), bc, 1e-10);
    CHECK(annulus_error(ls) <= 1e-6);
    CHECK(ls.residual_sup <= 1e-10);
    CHECK(nodal_domain_count(*mesh, ls.w) == 2);
}

TEST_CASE("annulus solution is exact or converges at second order", "[scalar_limit]") {
    const auto bc = fixtures::log_boundary();
    double errs[3];
    const double hs[3] = {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0};
    for (int i = 0; i < 3; ++i) {
        const auto mesh = annulus_mesh(hs[i]);
        errs[i] = annulus_error(
            solve_limit(mesh, Nonlinearity::zero(), radial_initial_guess(*mesh, 1.0, bc), bc, 1e-12));
    }
    // The log-mean face radius makes the scheme exact for ln r, so the error may sit at rounding level.
    if (errs[0] > 1e-10) {
        CHECK(std::log2(errs[0] / errs[1]) >= 1.8);
        CHECK(std::log2(errs[1] / errs[2]) >= 1.8);
    } else {
        CHECK(errs[2] <= 1e-10);
    }
}

TEST_CASE("annulus interface data", "[scalar_limit]") {
    for (int nt : {1, 32}) {
        const LimitSolution& ls = fixtures::annulus(nt);
        const double r0 = std::sqrt(std::exp(1.0));
        for (int j = 0; j < ls.omega.size(); ++j) REQUIRE_THAT(ls.omega(j), WithinRel(2.0 / r0, 1e-4));
        const auto [mean, spread] = ls.gamma.radius_about({0.0, 0.0});
        CHECK_THAT(mean, WithinRel(r0, 1e-5));
        const auto [jet, tangential] = jet_identity_defects(ls);
        CHECK(jet <= 1e-2);
        CHECK(tangential <= 1e-2);
    }
}

TEST_CASE("scaling the field doubles omega", "[scalar_limit]") {
    const LimitSolution& ls = fixtures::annulus(32);
    const auto [g1, om1] = interface_data(*ls.mesh, ls.w);
    const auto [g2, om2] = interface_data(*ls.mesh, Vec(2.0 * ls.w));
    REQUIRE(om1.size() == om2.size());
    for (int j = 0; j < om1.size(); ++j) REQUIRE_THAT(om2(j), WithinRel(2.0 * om1(j), 1e-12));
}

TEST_CASE("disk cubic radial solution matches the shooting oracle", "[scalar_limit]") {
    const LimitSolution& ls = fixtures::disk_radial();
    const auto [mean, spread] = ls.gamma.radius_about({0.0, 0.0});
    CHECK_THAT(mean, WithinAbs(kDiskRadius, 1e-3));
    const double om_max = ls.omega.maxCoeff(), om_min = ls.omega.minCoeff();
    CHECK((om_max - om_min) / om_min <= 1e-3);
    CHECK_THAT(ls.omega.mean(), WithinRel(kDiskOmega, 1e-3));
    CHECK_THAT(std::abs(ls.w(0)), WithinAbs(kDiskCentre, 1e-3));
    // Fine rings of width 1/2048 put the double-precision floor of the residual above 1e-10.
    CHECK(ls.residual_sup <= 1e-9);
    const auto [jet, tangential] = jet_identity_defects(ls);
    CHECK(jet <= 1e-2);
    CHECK(tangential <= 1e-2);
}

TEST_CASE("a converged solution is a fixed point", "[scalar_limit]") {
    const LimitSolution& ls = fixtures::disk_radial();
    const LimitSolution again = solve_limit(ls.mesh, Nonlinearity::cubic(40.0), ls.w, ls.boundary, 1e-10);
    CHECK(again.newton_iterations == 0);
    CHECK((again.w - ls.w).cwiseAbs().maxCoeff() == 0.0);
    CHECK(again.residual_sup == ls.residual_sup);
}

TEST_CASE("odd nonlinearity with negated initial guess returns -w", "[scalar_limit]") {
    RadialGrading g;
    g.h_coarse = 1.0 / 128.0;
    const auto mesh = std::make_shared<const PolarMesh>(PolarMesh::make(GeometryKind::Disk, 0.0, 1.0, 1, g));
    const auto f = Nonlinearity::cubic(40.0);
    CHECK(f.oddness_defect() <= 1e-12);
    const auto bc = fixtures::zero_boundary();
    const Vec w0 = radial_initial_guess(*mesh, 0.8, bc);
    const LimitSolution plus = solve_limit(mesh, f, w0, bc, 1e-11);
    const LimitSolution minus = solve_limit(mesh, f, Vec(-w0), bc, 1e-11);
    CHECK((plus.w + minus.w).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("one-signed guesses and solutions are rejected", "[scalar_limit]") {
    RadialGrading g;
    g.h_coarse = 1.0 / 64.0;
    const auto mesh = std::make_shared<const PolarMesh>(PolarMesh::make(GeometryKind::Disk, 0.0, 1.0, 1, g));
    const auto f = Nonlinearity::cubic(40.0);
    Vec w0(mesh->size());
    for (int i = 0; i < mesh->nr(); ++i) w0(i) = 0.9 * (1.0 - mesh->r(i) * mesh->r(i));
    try {
        solve_limit(mesh, f, w0, fixtures::zero_boundary(), 1e-10);
        FAIL("one-signed initial guess accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidInput);
    }
    // A shallow negative dip near the wall still falls into the positive solution.
    for (int i = 0; i < mesh->nr(); ++i)
        if (mesh->r(i) > 0.95 && !mesh->dirichlet_ring(i)) w0(i) = -0.01;
    try {
        solve_limit(mesh, f, w0, fixtures::zero_boundary(), 1e-10);
        FAIL("one-signed solution accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::WrongBranch);
        CHECK(std::string(e.what()).find("nodal domains") != std::string::npos);
    }
}

TEST_CASE("annulus margins match the Bessel eigenvalue oracle", "[scalar_limit]") {
    const LimitSolution& ls = fixtures::annulus(1);
    const Margins m = nondegeneracy_margins(ls, Nonlinearity::zero());
    const double r0 = std::sqrt(std::exp(1.0));
    CHECK_THAT(m.sigma1, WithinRel(annulus_dirichlet_eigenvalue(r0, std::exp(1.0)), 1e-3));
    CHECK_THAT(m.sigma2, WithinRel(annulus_dirichlet_eigenvalue(1.0, r0), 1e-3));
    CHECK_THAT(m.sigma_omega, WithinRel(annulus_dirichlet_eigenvalue(1.0, std::exp(1.0)), 1e-3));
    CHECK_FALSE(m.degenerate);
}

TEST_CASE("a potential equal to the first eigenvalue is flagged as degenerate", "[scalar_limit]") {
    const LimitSolution& ls = fixtures::annulus(1);
    const auto rings = ls.omega_rings(0);
    const BandOperator band(*ls.mesh, rings.first, rings.second);
    const Vec zero = Vec::Zero(ls.mesh->size());
    const double lambda1 = smallest_eigenvalue(band, zero);

    const Eigen::MatrixXd dense = Eigen::MatrixXd(band.matrix(zero));
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(dense, false).eigenvalues();
    double smallest = ev(0).real();
    for (int k = 1; k < ev.size(); ++k)
        if (std::abs(ev(k)) < std::abs(smallest)) smallest = ev(k).real();
    CHECK_THAT(lambda1, WithinRel(smallest, 1e-8));

    const Margins m = nondegeneracy_margins(ls, Nonlinearity::linear(lambda1));
    CHECK(std::abs(m.sigma1) <= 1e-6 * lambda1);
    CHECK(m.degenerate);
}

TEST_CASE("a non-positive potential gives positive margins", "[scalar_limit]") {
    for (int nt : {1, 32}) {
        const Margins m = nondegeneracy_margins(fixtures::annulus(nt), Nonlinearity::linear(-3.0));
        CHECK(m.sigma1 > 0.0);
        CHECK(m.sigma2 > 0.0);
        CHECK(m.sigma_omega > 0.0);
        CHECK_FALSE(m.degenerate);
    }
}

TEST_CASE("limit input validation", "[scalar_limit]") {
    const auto mesh = annulus_mesh(1.0 / 32.0);
    const auto bc = fixtures::log_boundary();
    CHECK_THROWS_AS(solve_limit(mesh, Nonlinearity::zero(), radial_initial_guess(*mesh, 1.0, bc), bc, 0.0), Error);
    CHECK_THROWS_AS(solve_limit(mesh, Nonlinearity::zero(), Vec::Zero(3), bc, 1e-10), Error);
}
