#pragma once

#include "phasesep/linalg.hpp"
#include "phasesep/mesh.hpp"
#include "phasesep/nonlinearity.hpp"
#include "phasesep/scalar_limit.hpp"

#include <memory>

namespace phasesep {

/// Dirichlet-to-Neumann map of -Delta - V on the rings lying on one side of an interface ring.
///
/// side = +1 takes the rings at larger radii (outward normal -r), side = -1 the rings at smaller
/// radii (outward normal +r). The far boundary carries zero Dirichlet data. Traces are ring
/// samples ordered by theta; the outward normal derivative is recovered from the flux balance
/// over the half control volume next to the interface, which keeps the discrete map symmetric
/// in the ring inner product.
class DtNOperator {
public:
    DtNOperator(std::shared_ptr<const PolarMesh> mesh, int gamma_ring, int side, const Vec& potential);

    int trace_size() const { return mesh_->n_theta(); }
    int gamma_ring() const { return ring_; }
    int side() const { return side_; }
    const PolarMesh& mesh() const { return *mesh_; }
    const BandOperator& band() const { return band_; }

    /// Outward normal derivative of the solution with trace g. The optional source is a
    /// full-mesh field; its band part enters the interior solve and its ring part the half cell.
    Vec apply(const Vec& g, const Vec* source = nullptr) const;
    /// Full-mesh field of the interior solution: band values, g on the ring, zero elsewhere.
    Vec extend(const Vec& g, const Vec* source = nullptr) const;
    /// Half-cell outward normal derivative of a field that already solves the band problem.
    Vec normal_derivative(const Vec& field, const Vec* source = nullptr) const;
    /// Ring quadrature sum_j g_j h_j r_gamma dtheta.
    double inner(const Vec& g, const Vec& h) const;
    /// Column-by-column matrix of the map (n_theta interior solves).
    Eigen::MatrixXd dense() const;

private:
    std::shared_ptr<const PolarMesh> mesh_;
    int ring_;
    int side_;
    Vec potential_;
    BandOperator band_;
    SparseFactor lu_;
};

/// Second-order one-sided difference of a field along the outward normal of the subdomain on
/// `side` of ring g. Independent of the half-cell formula, used for a posteriori checks.
Vec one_sided_normal_derivative(const PolarMesh& mesh, const Vec& field, int ring, int side);

/// b0 = sqrt(omega / A) pointwise.
Vec compute_b0(const Vec& omega, double A);

/// Keeps the Fourier modes |k| <= K of a periodic trace.
Vec lowpass(const Vec& trace, int K);

struct MatchingOptions {
    double gmres_tol = 1e-12;
    int gmres_restart = 200;
    int gmres_max_iterations = 2000;
    /// Low-pass cutoff for zeta2 and b2; <= 0 keeps every mode.
    int filter_modes = 0;
};

/// Interface data of a fitted limit solution in ring order, with the two subdomain DtN maps.
/// Subdomain 0 is {w > 0} (normal n1 = -nu) and 1 is {w < 0} (n2 = +nu).
struct MatchingContext {
    std::shared_ptr<const PolarMesh> mesh;
    int gamma_ring = -1;
    int positive_side = 0;
    double kappa = 0.0;
    double A = 0.0;
    double B = 0.0;
    Vec omega;
    Vec b0;
    /// Componentwise limit w0_i = max(+-w, 0).
    Vec w0[2];
    /// f_u(w0_i) on the whole mesh.
    Vec potential;
    std::shared_ptr<const DtNOperator> D[2];

    Vec apply_sum(const Vec& g) const { return D[0]->apply(g) + D[1]->apply(g); }
};

/// Builds the context; fails with SingularOperator when the margins flag degeneracy.
MatchingContext make_matching_context(const LimitSolution& ls, const Nonlinearity& f, const Margins& margins,
                                      double A, double B);

struct MatchingOrder1 {
    Vec zeta1, b1;
    /// Correction fields w1_i on the whole mesh (zero outside Omega_i, trace on the ring).
    Vec w1[2];
    int gmres_iterations = 0;
    double gmres_residual = 0.0;
    /// sup |d_{n1} w1_1 + 2 A b0 b1 - A kappa b0^2 zeta1| by one-sided differences, and its
    /// counterpart on Omega_2.
    double neumann_defect[2] = {0.0, 0.0};
};

struct MatchingOrder2 {
    Vec zeta2, b2;
    Vec w2_tilde[2];
    Vec w2[2];
    Vec h[2];
    int gmres_iterations = 0;
    double gmres_residual = 0.0;
    double neumann_defect[2] = {0.0, 0.0};
};

MatchingOrder1 solve_matching_order1(const MatchingContext& ctx, const MatchingOptions& options = {});
MatchingOrder2 solve_matching_order2(const MatchingContext& ctx, const MatchingOrder1& o1, const Nonlinearity& f,
                                     const MatchingOptions& options = {});

/// All matching data of one run in ring order.
struct MatchingCoefficients {
    double A = 0.0, B = 0.0, kappa = 0.0;
    Vec b0, b1, b2, zeta1, zeta2;
    Vec w1[2], w2[2];
    int gamma_ring = -1;
    int positive_side = 0;

    /// max - min over the ring of each of b1, zeta1, b2, zeta2.
    double radial_spread() const;
};

MatchingCoefficients collect(const MatchingContext& ctx, const MatchingOrder1& o1, const MatchingOrder2& o2);

/// max |<D g, h> - <g, D h>| over `pairs` random trace pairs (seeded), relative to |D g||h|.
double dtn_symmetry_defect(const DtNOperator& op, int pairs, unsigned seed = 42);

}  // namespace phasesep
