#pragma once

#include "phasesep/curve.hpp"
#include "phasesep/mesh.hpp"
#include "phasesep/nonlinearity.hpp"

#include <functional>
#include <memory>

namespace phasesep {

using BoundaryFn = std::function<double(const Point2&)>;

/// Spectral margins of the linearized operators (Definition of nondegeneracy).
struct Margins {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma_omega = 0.0;
    /// max(1, sup |f_u(w_i)|): reference size of the operators.
    double scale = 1.0;
    bool degenerate = false;
    double min_margin() const;
};

/// Discrete solution of -Delta w = f(w, x) with its nodal curve and interface slope.
struct LimitSolution {
    std::shared_ptr<const PolarMesh> mesh;
    Vec w;
    ClosedCurve gamma;
    /// omega = d_nu w sampled at the curve nodes.
    Vec omega;
    double residual_sup = 0.0;
    int newton_iterations = 0;
    /// Ring index of the interface on an interface-fitted mesh, -1 otherwise.
    int gamma_ring = -1;
    /// +1 when {w > 0} lies at larger radii than the interface ring, -1 otherwise.
    int positive_side = 0;
    BoundaryFn boundary;
    double tube_half_width = 0.0;

    /// Rings of the subdomains {w > 0} (index 0) and {w < 0} (index 1) on a fitted mesh.
    std::pair<int, int> omega_rings(int which) const;
};

struct LimitOptions {
    int max_iterations = 60;
    int curve_samples = 512;
};

/// Damped Newton for -Delta w = f(w) with Dirichlet data on the boundary rings.
LimitSolution solve_limit(std::shared_ptr<const PolarMesh> mesh, const Nonlinearity& f, const Vec& w_init,
                          BoundaryFn boundary, double tol, const LimitOptions& options = {});

/// Extracts the nodal curve and the slope omega (average of the two one-sided
/// second-order normal differences).
std::pair<ClosedCurve, Vec> interface_data(const LimitSolution& ls, int curve_samples = 512);
/// Same extraction on a bare field.
std::pair<ClosedCurve, Vec> interface_data(const PolarMesh& mesh, const Vec& w, int curve_samples = 512);

/// Re-meshes with a ring on the (circular) interface and re-solves until the ring and the
/// discrete zero set coincide. Requires a circular interface centred at the origin. When
/// n_theta >= 16 the returned curve samples coincide with the ring nodes (see ring_to_curve).
LimitSolution fit_interface_mesh(const LimitSolution& ls, const Nonlinearity& f, const RadialGrading& grading,
                                 int n_theta, double tol, const LimitOptions& options = {});

/// Margins by inverse iteration on the discrete operators of Omega_1, Omega_2 and Omega.
Margins nondegeneracy_margins(const LimitSolution& ls, const Nonlinearity& f);

/// Smallest-magnitude eigenvalue of -L - diag(potential) on a band of rings.
double smallest_eigenvalue(const BandOperator& band, const Vec& potential, int max_iterations = 2000);

/// Two-sign radial initial guess amplitude * J0(j_{0,2} r / R) on a disk, or the linear
/// interpolant of the boundary values on an annulus.
Vec radial_initial_guess(const PolarMesh& mesh, double amplitude, const BoundaryFn& boundary);

/// Number of connected components of {w > 0} plus those of {w < 0} on the mesh graph.
int nodal_domain_count(const PolarMesh& mesh, const Vec& w);

/// Field samples (x, y, value) of the mesh nodes.
std::vector<Point2> node_coordinates(const PolarMesh& mesh);

/// Reorders a trace on the interface ring of a fitted solution into curve-sample order
/// (a single value on the axisymmetric mesh is broadcast).
Vec ring_to_curve(const LimitSolution& ls, const Vec& ring_trace);
/// Inverse of ring_to_curve (curve samples must coincide with ring nodes).
Vec curve_to_ring(const LimitSolution& ls, const Vec& curve_values);

/// max over the curve of |d_tt w - kappa d_t w| and of |d_s w| (interface jet identities).
std::pair<double, double> jet_identity_defects(const LimitSolution& ls);

}  // namespace phasesep
