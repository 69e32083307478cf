#pragma once

#include "phasesep/linalg.hpp"

#include <utility>

namespace phasesep {

/// Uniform grid on [-T, T] with an odd node count so that x = 0 is a node.
struct ProfileGrid {
    double T = 12.0;
    int n = 2401;

    static ProfileGrid make(double T, int n);
    double h() const { return 2.0 * T / static_cast<double>(n - 1); }
    double x(int j) const { return -T + h() * static_cast<double>(j); }
    int center() const { return (n - 1) / 2; }
    Vec nodes() const;
    bool operator==(const ProfileGrid& other) const { return T == other.T && n == other.n; }
};

/// A pair of grid functions, used for vector unknowns of the 2x2 linear problems.
struct ProfilePair {
    Vec first;
    Vec second;
};

/// Solution of -V1'' + V1 V2^2 = 0, -V2'' + V2 V1^2 = 0 normalized by V1(0) = V2(0) = 1.
struct ProfileSolution {
    ProfileGrid grid;
    Vec V1, V2;
    Vec dV1, dV2;
    double A = 0.0;
    double B = 0.0;
    double sup_residual = 0.0;
    int newton_iterations = 0;

    double V1p0() const { return dV1(grid.center()); }
    /// max_j |E(x_j) - E(0)| with E = V1'^2 + V2'^2 - V1^2 V2^2.
    double first_integral_drift() const;
    /// max_j |E(x_j) - A^2|.
    double first_integral_gap() const;
    /// max_j |V1(x_j) - V2(-x_j)|.
    double symmetry_defect() const;
    /// Residual of the linear closure V1''(T) = 0, V2''(-T) = 0.
    double closure_defect() const;
};

/// Secondary profile solving L0 W = -V' with W ~ x^2 V'/2 in the tails.
struct ProfileW {
    ProfileGrid grid;
    Vec W1, W2;
    Vec dW1, dW2;
    double C = 0.0;
    double sup_residual = 0.0;
};

/// Right-hand side of the truncated mode problem (L0 + omega^2) phi = g.
struct ModeRHS {
    ProfileGrid grid;
    Vec g1, g2;
    double omega = 0.0;
};

struct ProfileOptions {
    double tol = 1e-10;
    int max_iterations = 60;
    double symmetry_tol = 1e-8;
};

ProfileSolution solve_profile(double T, int n, double tol);
ProfileSolution solve_profile(double T, int n, const ProfileOptions& options);

/// Growth constants (A, B) of V1 = A x + B + o(1) as x -> +infinity.
std::pair<double, double> growth_constants(const ProfileSolution& p);

/// Nonlinear residual (-V1'' + V1 V2^2, -V2'' + V2 V1^2) at interior nodes
/// (zero at the end nodes), using the stencil of solve_profile.
ProfilePair profile_residual(const ProfileGrid& grid, const Vec& V1, const Vec& V2);

/// Linearized operator L0 at the profile, on interior nodes (zero at the end nodes).
ProfilePair apply_L0(const ProfileSolution& p, const ProfilePair& Z);

ProfileW solve_W(const ProfileSolution& p, double tol);

/// Solves (L0 + omega^2) phi = g with phi(-T) = phi(T) = 0 for both components.
ProfilePair solve_Lomega(const ProfileSolution& p, const ModeRHS& rhs, double tol);

/// Condition estimate of the truncated operator L0 + omega^2 with Dirichlet closure.
double Lomega_condition(const ProfileSolution& p, double omega);

/// phi_xi(x) = -(V1'' V1' + V2'' V2')', computed pointwise from the ODE.
Vec phi_xi_weight(const ProfileSolution& p);

/// Trapezoidal integral over the profile grid.
double trapezoid(const ProfileGrid& grid, const Vec& f);

/// Fourth-order finite-difference derivatives on a uniform grid (one-sided at the ends).
Vec fd_first_derivative(const Vec& u, double h);
Vec fd_second_derivative(const Vec& u, double h);

/// Evaluates V, V', W on arbitrary abscissae by cubic Hermite interpolation.
class ProfileSampler {
public:
    ProfileSampler(const ProfileSolution& p, const ProfileW& w);

    struct Sample {
        double V1, V2, dV1, dV2, W1, W2;
    };

    /// Throws ProfileRangeExceeded when |x| exceeds the profile half-width.
    Sample operator()(double x) const;
    double half_width() const { return grid_.T; }
    double A() const { return A_; }
    double B() const { return B_; }

private:
    ProfileGrid grid_;
    Vec V1_, V2_, dV1_, dV2_, ddV1_, ddV2_;
    Vec W1_, W2_, dW1_, dW2_;
    double A_, B_;
};

}  // namespace phasesep
