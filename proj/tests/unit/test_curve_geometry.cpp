#include "fixtures.hpp"
#include "phasesep/error.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace phasesep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Vec sample(const PolarMesh& mesh, const std::function<double(double, double)>& fn) {
    Vec out(mesh.size());
    for (int k = 0; k < mesh.size(); ++k) {
        const Point2 p = mesh.node(k);
        out(k) = fn(p.x, p.y);
    }
    return out;
}

const PolarMesh& wide_mesh() {
    static const PolarMesh m = [] {
        RadialGrading g;
        g.h_coarse = 1.0 / 64.0;
        return PolarMesh::make(GeometryKind::Disk, 0.0, 3.0, 256, g);
    }();
    return m;
}

}  // namespace

TEST_CASE("circle from a level set", "[curve_geometry]") {
    const double r0 = 0.6;
    const PolarMesh& mesh = wide_mesh();
    const Vec w = sample(mesh, [&](double x, double y) { return x * x + y * y - r0 * r0; });
    const ClosedCurve c = from_level_set(w, mesh.mapped_grid());
    CHECK_THAT(c.length(), WithinAbs(2.0 * kPi * r0, 1e-3));
    const auto [mean, spread] = c.radius_about({0.0, 0.0});
    CHECK_THAT(mean, WithinAbs(r0, 1e-3));
    for (int j = 0; j < c.size(); ++j) {
        REQUIRE_THAT(std::abs(c.kappa()(j)), WithinAbs(1.0 / r0, 1e-3));
        // The normal points into {w > 0}, which is outside the circle.
        REQUIRE(c.nx()(j) * c.x()(j) + c.ny()(j) * c.y()(j) > 0.0);
    }
    CHECK_THAT(std::abs(c.total_turning()), WithinAbs(2.0 * kPi, 1e-3));
    CHECK(c.unit_speed_defect() <= 1e-3);
}

TEST_CASE("exact circle has unit frames and constant curvature", "[curve_geometry]") {
    const double R = 0.75;
    for (bool ccw : {true, false}) {
        const ClosedCurve c = ClosedCurve::circle({0.0, 0.0}, R, 256, ccw);
        for (int j = 0; j < c.size(); ++j) {
            const double tn = std::hypot(c.tx()(j), c.ty()(j));
            const double nn = std::hypot(c.nx()(j), c.ny()(j));
            REQUIRE_THAT(tn, WithinAbs(1.0, 1e-12));
            REQUIRE_THAT(nn, WithinAbs(1.0, 1e-12));
            REQUIRE_THAT(c.tx()(j) * c.nx()(j) + c.ty()(j) * c.ny()(j), WithinAbs(0.0, 1e-12));
            REQUIRE_THAT(c.kappa()(j), WithinAbs(ccw ? 1.0 / R : -1.0 / R, 1e-4));
        }
        CHECK_THAT(c.total_turning(), WithinAbs(ccw ? 2.0 * kPi : -2.0 * kPi, 1e-3));
    }
}

TEST_CASE("ellipse perimeter and curvature against closed forms", "[curve_geometry]") {
    const double a = 2.0, b = 1.0;
    const PolarMesh& mesh = wide_mesh();
    const Vec w = sample(mesh, [&](double x, double y) { return x * x / (a * a) + y * y / (b * b) - 1.0; });
    const ClosedCurve c = from_level_set(w, mesh.mapped_grid());
    const double e = std::sqrt(1.0 - b * b / (a * a));
    const double perimeter = 4.0 * a * std::comp_ellint_2(e);
    CHECK_THAT(c.length(), WithinAbs(perimeter, 1e-3));
    CHECK_THAT(std::abs(c.total_turning()), WithinAbs(2.0 * kPi, 1e-3));
    // Parametric curvature a b / (a^2 sin^2 + b^2 cos^2)^{3/2}: a/b^2 on the major axis, b/a^2 on the minor.
    const double s_major = c.closest_parameter({a, 0.0});
    const double s_minor = c.closest_parameter({0.0, b});
    CHECK_THAT(std::abs(c.curvature(s_major)), WithinRel(a / (b * b), 1e-2));
    CHECK_THAT(std::abs(c.curvature(s_minor)), WithinAbs(b / (a * a), 1e-3));
}

TEST_CASE("level set errors", "[curve_geometry]") {
    const PolarMesh& mesh = wide_mesh();
    const Vec two = sample(mesh, [](double x, double y) {
        return std::min((x - 1.0) * (x - 1.0) + y * y, (x + 1.0) * (x + 1.0) + y * y) - 0.25;
    });
    try {
        from_level_set(two, mesh.mapped_grid());
        FAIL("two contours accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MultipleComponents);
    }
    const Vec open = sample(mesh, [](double x, double) { return x - 0.5; });
    try {
        from_level_set(open, mesh.mapped_grid());
        FAIL("open contour accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OpenContour);
    }
}

TEST_CASE("annulus harmonic contour is the geometric-mean circle", "[curve_geometry]") {
    const LimitSolution& ls = fixtures::annulus(32);
    const auto [mean, spread] = ls.gamma.radius_about({0.0, 0.0});
    CHECK_THAT(mean, WithinAbs(std::sqrt(std::exp(1.0)), 1e-3));
}

TEST_CASE("Fermi coordinates round trip inside the tube", "[curve_geometry]") {
    const PolarMesh& mesh = wide_mesh();
    const Vec w = sample(mesh, [](double x, double y) { return x * x / 4.0 + y * y - 1.0; });
    auto curve = std::make_shared<const ClosedCurve>(from_level_set(w, mesh.mapped_grid()));
    const double delta = TubeCoords::default_half_width(*curve, 1.0);
    CHECK(delta * curve->max_abs_curvature() < 0.5);
    const TubeCoords tube(curve, delta);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ut(-0.9 * delta, 0.9 * delta), us(0.0, curve->length());
    double err = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double t = ut(rng), s = us(rng);
        const TubePoint back = tube.to_tube(tube.from_tube(t, s));
        double ds = std::abs(back.s - s);
        ds = std::min(ds, curve->length() - ds);
        err = std::max({err, std::abs(back.t - t), ds});
    }
    CHECK(err <= 1e-8);
    const Point2 far = tube.from_tube(0.0, 0.0);
    const Point2 n = curve->normal(0.0);
    try {
        tube.to_tube({far.x + 2.0 * delta * n.x, far.y + 2.0 * delta * n.y});
        FAIL("point outside the tube accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OutsideTube);
    }
}

TEST_CASE("uniform resampling is idempotent", "[curve_geometry]") {
    const PolarMesh& mesh = wide_mesh();
    const Vec w = sample(mesh, [](double x, double y) { return x * x / 4.0 + y * y - 1.0; });
    const ClosedCurve c = from_level_set(w, mesh.mapped_grid());
    const ClosedCurve r = c.resampled(c.size());
    double d = 0.0;
    for (int j = 0; j < c.size(); ++j) d = std::max(d, std::hypot(r.x()(j) - c.x()(j), r.y()(j) - c.y()(j)));
    CHECK(d <= 1e-10);
}

TEST_CASE("Fermi Laplacian coefficients", "[curve_geometry]") {
    const double R = 0.8;
    const ClosedCurve c = ClosedCurve::circle({0.0, 0.0}, R, 1024, true);
    const double kappa = c.kappa()(0);
    for (double t : {-0.2, 0.0, 0.1}) {
        const LaplacianCoeffs k = laplacian_coeffs(c, t, 0.3);
        CHECK_THAT(k.c_tt, WithinAbs(1.0, 1e-12));
        CHECK_THAT(k.c_ss, WithinRel(1.0 / ((1.0 - t * kappa) * (1.0 - t * kappa)), 1e-5));
        CHECK_THAT(k.c_t, WithinRel(-kappa / (1.0 - t * kappa), 1e-5));
        CHECK_THAT(k.c_s, WithinAbs(0.0, 1e-3));
    }
    // Delta(t^2) at t = 0 is 2 c_tt + 0.
    const LaplacianCoeffs at0 = laplacian_coeffs(c, 0.0, 1.0);
    CHECK_THAT(2.0 * at0.c_tt, WithinAbs(2.0, 1e-12));

    // For a radial function u(r) with r = R - t (left normal points inward), c_tt u_tt + c_t u_t
    // equals u'' + u'/r.
    const double t = 0.15, r = R - t;
    const LaplacianCoeffs k = laplacian_coeffs(c, t, 0.0);
    const double u_r = 3.0 * r * r, u_rr = 6.0 * r;
    CHECK_THAT(k.c_tt * u_rr + k.c_t * (-u_r), WithinRel(u_rr + u_r / r, 1e-5));
}

TEST_CASE("stretched coordinates", "[curve_geometry]") {
    const double L = 2.0 * kPi;
    const StretchedCoords id(L, [](double) { return 1.0; }, [](double) { return 0.0; }, 0.1);
    CHECK_THAT(id.tau(0.03, 1.0), WithinAbs(0.3, 1e-15));
    const StretchedCoords sc(
        L, [](double s) { return 1.0 + 0.2 * std::cos(s); }, [](double s) { return 0.05 * std::sin(s); }, 0.1);
    const double s = kPi / 2.0, t = 0.05;
    const double expected = (1.0 + 0.2 * std::cos(s)) * (t - 0.1 * 0.05 * std::sin(s)) / 0.1;
    CHECK_THAT(sc.tau(t, s), WithinAbs(expected, 1e-14));
    double err = 0.0;
    for (double tt = -0.3; tt <= 0.3; tt += 0.01)
        for (double ss = 0.0; ss < L; ss += 0.37) err = std::max(err, std::abs(sc.t_of(sc.tau(tt, ss), ss) - tt));
    CHECK(err <= 1e-12);
}
