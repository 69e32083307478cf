#include "fixtures.hpp"
#include "phasesep/error.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace phasesep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ApproxPair disk_pair(double beta, double K = 0.3) {
    const double eps = std::pow(beta, -0.25);
    return assemble(fixtures::disk_radial(), fixtures::disk_matching(), fixtures::sampler(), beta, K,
                    coupled_mesh(fixtures::disk_radial(), eps, SolveConfig{}));
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) mx += std::log(x[i]) / n, my += std::log(y[i]) / n;
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("cutoff family is a partition of unity", "[assembler]") {
    const CutoffFamily c = CutoffFamily::make(4.0, 0.05);
    CHECK_THAT(c.eta, WithinRel(4.0 * 0.05 * std::abs(std::log(0.05)), 1e-15));
    for (double t = -3.0 * c.eta; t <= 3.0 * c.eta; t += c.eta / 97.0) {
        REQUIRE_THAT(c.chi(t) + c.chi1(t) + c.chi2(t), WithinAbs(1.0, 1e-12));
        REQUIRE(c.chi(t) == c.chi(-t));
        if (std::abs(t) <= c.eta) REQUIRE(c.chi(t) == 1.0);
        if (std::abs(t) >= 2.0 * c.eta) REQUIRE(c.chi(t) == 0.0);
        if (t > 0.0) REQUIRE(c.chi2(t) == 0.0);
        if (t < 0.0) REQUIRE(c.chi1(t) == 0.0);
    }
    // C^2 joins at eta and 2 eta: one-sided second differences agree.
    const double h = 1e-4 * c.eta;
    for (double t0 : {c.eta, 2.0 * c.eta}) {
        const double left = (c.chi(t0 - 2 * h) - 2 * c.chi(t0 - h) + c.chi(t0)) / (h * h);
        const double right = (c.chi(t0) - 2 * c.chi(t0 + h) + c.chi(t0 + 2 * h)) / (h * h);
        CHECK(std::abs(left - right) <= 1e-2 / (c.eta * c.eta));
    }
}

TEST_CASE("bulk nodes carry the outer expansion only", "[assembler]") {
    const ApproxPair ap = disk_pair(1e4);
    int checked = 0;
    for (int k = 0; k < ap.mesh->size(); ++k) {
        if (std::abs(ap.t(k)) <= 2.0 * ap.cutoff.eta) continue;
        const int own = ap.t(k) > 0.0 ? 0 : 1;
        const Vec& U_own = own == 0 ? ap.U1 : ap.U2;
        const Vec& U_other = own == 0 ? ap.U2 : ap.U1;
        const Vec& outer = own == 0 ? ap.outer1 : ap.outer2;
        REQUIRE(U_other(k) == 0.0);
        REQUIRE(U_own(k) == outer(k));
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("inner expansion on the shifted curve", "[assembler]") {
    const ExpansionEvaluator ev(fixtures::disk_radial(), fixtures::disk_matching(), fixtures::sampler());
    const ProfileW& W = fixtures::profile_W();
    const int c = W.grid.center();
    for (double eps : {0.1, 0.05}) {
        const auto [b, shift] = ev.stretch(eps, 0.7);
        const double u1 = ev.inner(0, eps, shift, 0.7);
        const double u2 = ev.inner(1, eps, shift, 0.7);
        CHECK_THAT(u1, WithinAbs(eps * b + eps * eps * ev.kappa() * W.W1(c), 1e-12));
        CHECK_THAT(u2, WithinAbs(eps * b + eps * eps * ev.kappa() * W.W2(c), 1e-12));
    }
}

TEST_CASE("assembled ansatz positivity", "[assembler]") {
    const ApproxPair ap = disk_pair(1e4);
    double inner_min = 1e300, all_min = 1e300;
    for (int k = 0; k < ap.mesh->size(); ++k) {
        const double m = std::min(ap.U1(k), ap.U2(k));
        all_min = std::min(all_min, m);
        if (std::abs(ap.t(k)) <= ap.cutoff.eta) inner_min = std::min(inner_min, m);
    }
    CHECK(inner_min > 0.0);
    // Frozen regression: the eps^2 kappa W correction dips slightly below zero in the overlap
    // region at beta = 1e4.
    CHECK_THAT(all_min, WithinAbs(-2.965e-5, 1e-7));
    CHECK(disk_pair(1.6e5).U1.minCoeff() >= 0.0);
    CHECK(disk_pair(1.6e5).U2.minCoeff() >= 0.0);
}

TEST_CASE("tube overflow for a wide cutoff", "[assembler]") {
    try {
        disk_pair(1e4, 0.6);
        FAIL("cutoff wider than the tube accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TubeOverflow);
    }
}

TEST_CASE("profile range is enforced inside the cutoff support", "[assembler]") {
    const ProfileSolution short_profile = solve_profile(8.0, 1601, 1e-10);
    const ProfileW short_W = solve_W(short_profile, 1e-8);
    const ProfileSampler sampler(short_profile, short_W);
    const double eps = 0.01;
    try {
        assemble(fixtures::disk_radial(), fixtures::disk_matching(), sampler, std::pow(eps, -4.0), 1.0,
                 coupled_mesh(fixtures::disk_radial(), eps, SolveConfig{}));
        FAIL("stretched argument beyond the profile accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ProfileRangeExceeded);
    }
}

TEST_CASE("residual and overlap mismatch decay under eps halving", "[assembler]") {
    const auto f = Nonlinearity::cubic(40.0);
    const ExpansionEvaluator ev(fixtures::disk_radial(), fixtures::disk_matching(), fixtures::sampler());
    std::vector<double> eps, outer, mismatch;
    for (double beta : {1e4, 1.6e5, 2.56e6, 4.096e7}) {
        const ApproxPair ap = disk_pair(beta);
        const ResidualReport rr = residual(ap, f);
        eps.push_back(ap.eps);
        outer.push_back(std::max(rr.sup[2][0], rr.sup[2][1]));
        mismatch.push_back(overlap_mismatch(ev, ap.eps, 0.3));
    }
    CHECK(fitted_slope(eps, outer) >= 2.5);
    for (size_t i = 1; i < mismatch.size(); ++i) CHECK(mismatch[i] < mismatch[i - 1]);
}

TEST_CASE("assembled fields approach the limit away from the interface", "[assembler]") {
    const LimitSolution& ls = fixtures::disk_radial();
    const ExpansionEvaluator ev(ls, fixtures::disk_matching(), fixtures::sampler());
    const double delta0 = 0.2;
    double previous = 1e300;
    for (double beta : {1e4, 1e5, 1e6, 1e7}) {
        const ApproxPair ap = disk_pair(beta);
        double dev = 0.0;
        for (int k = 0; k < ap.mesh->size(); ++k) {
            if (std::abs(ap.t(k)) <= delta0) continue;
            const double r = ap.mesh->r(k / ap.mesh->n_theta());
            const double w0_1 = ev.outer_terms(0, r, 0.0)[0];
            const double w0_2 = ev.outer_terms(1, r, 0.0)[0];
            dev = std::max({dev, std::abs(ap.U1(k) - (ap.t(k) > 0 ? w0_1 : 0.0)),
                            std::abs(ap.U2(k) - (ap.t(k) < 0 ? w0_2 : 0.0))});
        }
        CHECK(dev < previous);
        previous = dev;
    }
}

TEST_CASE("reversing the sign of the limit swaps the components", "[assembler]") {
    const LimitSolution& ls = fixtures::disk_radial();
    const auto f = Nonlinearity::cubic(40.0);
    const LimitSolution neg = solve_limit(ls.mesh, f, Vec(-ls.w), ls.boundary, 1e-10);
    const MatchingContext ctx = make_matching_context(neg, f, nondegeneracy_margins(neg, f), fixtures::sampler().A(),
                                                      fixtures::sampler().B());
    const MatchingOrder1 o1 = solve_matching_order1(ctx);
    const MatchingCoefficients mc = collect(ctx, o1, solve_matching_order2(ctx, o1, f));

    const double beta = 1e4, eps = 0.1;
    const auto mesh = coupled_mesh(ls, eps, SolveConfig{});
    const ApproxPair plus = assemble(ls, fixtures::disk_matching(), fixtures::sampler(), beta, 0.3, mesh);
    const ApproxPair minus = assemble(neg, mc, fixtures::sampler(), beta, 0.3, mesh);
    CHECK((neg.w + ls.w).cwiseAbs().maxCoeff() == 0.0);
    // The reversed contour is resampled from a different start point, so curvature and slope
    // agree only to the spline accuracy.
    CHECK((plus.U1 - minus.U2).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((plus.U2 - minus.U1).cwiseAbs().maxCoeff() <= 1e-5);
}
