#pragma once

#include "phasesep/linalg.hpp"
#include "phasesep/nonlinearity.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace phasesep {

/// Periodic interpolating cubic spline f(t) with period P on increasing knots in [t0, t0 + P).
class PeriodicSpline {
public:
    PeriodicSpline() = default;
    PeriodicSpline(std::vector<double> knots, double period, std::vector<double> values);
    /// Uniform knots t_j = j P / m.
    static PeriodicSpline uniform(double period, const std::vector<double>& values);

    double value(double t) const { return eval(t, 0); }
    double d1(double t) const { return eval(t, 1); }
    double d2(double t) const { return eval(t, 2); }
    double period() const { return period_; }
    bool empty() const { return knots_.empty(); }

private:
    double eval(double t, int order) const;

    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> second_;
    double period_ = 0.0;
};

/// Arc-length parametrized simple closed curve sampled at m uniform nodes.
class ClosedCurve {
public:
    ClosedCurve() = default;

    /// Builds a curve through the vertices of a closed polygon (last vertex not repeated),
    /// resampled to m nodes uniform in arc length by a periodic cubic spline.
    /// s = 0 is placed at the point of maximal x.
    static ClosedCurve from_points(const std::vector<Point2>& vertices, int m = 512);
    static ClosedCurve circle(const Point2& center, double radius, int m = 512, bool counterclockwise = true);

    int size() const { return m_; }
    double length() const { return L_; }
    double ds() const { return L_ / m_; }

    const Vec& s() const { return s_; }
    const Vec& x() const { return x_; }
    const Vec& y() const { return y_; }
    const Vec& tx() const { return tx_; }
    const Vec& ty() const { return ty_; }
    const Vec& nx() const { return nx_; }
    const Vec& ny() const { return ny_; }
    const Vec& kappa() const { return kappa_; }

    Point2 point(double s) const;
    Point2 tangent(double s) const;
    /// Left normal (-tau_y, tau_x).
    Point2 normal(double s) const;
    double curvature(double s) const;
    double curvature_derivative(double s) const;

    /// Same curve traversed in the opposite direction (normal flips, curvature changes sign).
    ClosedCurve reversed() const;
    /// Resamples an existing curve through its own nodes.
    ClosedCurve resampled(int m) const;

    double total_turning() const;
    double max_abs_curvature() const;
    /// max_j | |gamma(s_{j+1}) - gamma(s_j)| / ds - 1 |.
    double unit_speed_defect() const;
    /// Mean and spread (max - min) of the distance from a centre point.
    std::pair<double, double> radius_about(const Point2& center) const;
    /// Arc-length parameter of the point closest to p (Newton refinement of the nearest node).
    double closest_parameter(const Point2& p) const;

private:
    void build_from_splines(PeriodicSpline xs, PeriodicSpline ys, double length, int m);

    int m_ = 0;
    double L_ = 0.0;
    Vec s_, x_, y_, tx_, ty_, nx_, ny_, kappa_;
    PeriodicSpline xs_, ys_;
};

double curvature(const ClosedCurve& c, double s);

/// Logically rectangular mapped grid: node (i, j) sits at map(p_i, q_j); q may be periodic.
struct MappedGrid {
    Vec p;
    Vec q;
    bool periodic_q = true;
    double q_period = 0.0;
    std::function<Point2(double, double)> map;
    /// True when the field is known to be independent of q (single q sample).
    bool axisymmetric() const { return q.size() == 1; }
};

/// Zero level set of a nodal field (index i * nq + j) as an oriented closed curve.
/// The normal points from {field < 0} into {field > 0}.
ClosedCurve from_level_set(const Vec& field, const MappedGrid& grid, int m = 512);

struct TubePoint {
    double t = 0.0;
    double s = 0.0;
};

/// Fermi coordinates x = gamma(s) + t nu(s) in the tube |t| <= delta.
class TubeCoords {
public:
    TubeCoords(std::shared_ptr<const ClosedCurve> curve, double half_width);

    /// delta = min(0.45 / max|kappa|, distance_to_boundary / 2).
    static double default_half_width(const ClosedCurve& c, double distance_to_boundary);

    const ClosedCurve& curve() const { return *curve_; }
    double half_width() const { return delta_; }
    /// Throws OutsideTube when the point is farther than delta from the curve.
    TubePoint to_tube(const Point2& p) const;
    /// Same as to_tube without the range check.
    TubePoint project(const Point2& p) const;
    Point2 from_tube(double t, double s) const;

private:
    std::shared_ptr<const ClosedCurve> curve_;
    double delta_;
};

struct LaplacianCoeffs {
    double c_tt = 1.0;
    double c_ss = 1.0;
    double c_t = 0.0;
    double c_s = 0.0;
};

/// Coefficients of the Laplacian in Fermi coordinates with metric factor (1 - t kappa)^2.
LaplacianCoeffs laplacian_coeffs(const TubeCoords& tube, double t, double s);
LaplacianCoeffs laplacian_coeffs(const ClosedCurve& c, double t, double s);

/// tau = b(s) (t - eps zeta(s)) / eps with b, zeta given as samples on the curve nodes.
class StretchedCoords {
public:
    StretchedCoords(double length, const std::vector<double>& b, const std::vector<double>& zeta, double eps);
    StretchedCoords(double length, std::function<double(double)> b, std::function<double(double)> zeta,
                    double eps);

    double tau(double t, double s) const;
    double t_of(double tau, double s) const;
    double b(double s) const { return b_(s); }
    double zeta(double s) const { return zeta_(s); }
    double eps() const { return eps_; }

private:
    std::function<double(double)> b_, zeta_;
    double eps_;
};

}  // namespace phasesep
