#pragma once

#include "phasesep/coupled.hpp"

#include <cmath>
#include <memory>

/// Shared, lazily built cases for the unit tests.
namespace fixtures {

using namespace phasesep;

inline const ProfileSolution& profile() {
    static const ProfileSolution p = solve_profile(12.0, 2401, 1e-10);
    return p;
}

inline const ProfileW& profile_W() {
    static const ProfileW w = solve_W(profile(), 1e-8);
    return w;
}

inline const ProfileSampler& sampler() {
    static const ProfileSampler s(profile(), profile_W());
    return s;
}

inline BoundaryFn zero_boundary() {
    return [](const Point2&) { return 0.0; };
}

inline BoundaryFn log_boundary() {
    return [](const Point2& p) { return 2.0 * std::log(std::hypot(p.x, p.y)) - 1.0; };
}

/// Harmonic annulus 1 < r < e, w = 2 ln r - 1, fitted mesh.
inline const LimitSolution& annulus(int n_theta) {
    auto build = [](int nt) {
        RadialGrading g;
        g.h_coarse = 1.0 / 64.0;
        auto mesh = std::make_shared<const PolarMesh>(PolarMesh::make(GeometryKind::Annulus, 1.0, std::exp(1.0), nt, g));
        const auto f = Nonlinearity::zero();
        const auto bc = log_boundary();
        const LimitSolution ls = solve_limit(mesh, f, radial_initial_guess(*mesh, 1.0, bc), bc, 1e-10);
        g.h_fine = 1.0 / 512.0;
        g.band = 0.05;
        return fit_interface_mesh(ls, f, g, nt, 1e-10);
    };
    static const LimitSolution radial = build(1);
    static const LimitSolution planar = build(32);
    return n_theta == 1 ? radial : planar;
}

/// Unit disk, f = 40 (u - u^3), zero boundary data, fitted radial mesh.
inline const LimitSolution& disk_radial() {
    static const LimitSolution ls = [] {
        RadialGrading g;
        g.h_coarse = 1.0 / 256.0;
        auto mesh = std::make_shared<const PolarMesh>(PolarMesh::make(GeometryKind::Disk, 0.0, 1.0, 1, g));
        const auto f = Nonlinearity::cubic(40.0);
        const auto bc = zero_boundary();
        const LimitSolution first = solve_limit(mesh, f, radial_initial_guess(*mesh, 0.8, bc), bc, 1e-10);
        g.h_fine = 1.0 / 2048.0;
        g.band = 0.05;
        return fit_interface_mesh(first, f, g, 1, 1e-10);
    }();
    return ls;
}

inline const MatchingCoefficients& disk_matching() {
    static const MatchingCoefficients mc = [] {
        const auto f = Nonlinearity::cubic(40.0);
        const LimitSolution& ls = disk_radial();
        const MatchingContext ctx = make_matching_context(ls, f, nondegeneracy_margins(ls, f), sampler().A(),
                                                          sampler().B());
        const MatchingOrder1 o1 = solve_matching_order1(ctx);
        return collect(ctx, o1, solve_matching_order2(ctx, o1, f));
    }();
    return mc;
}

}  // namespace fixtures
