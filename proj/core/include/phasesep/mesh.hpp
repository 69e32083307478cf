#pragma once

#include "phasesep/curve.hpp"
#include "phasesep/linalg.hpp"
#include "phasesep/nonlinearity.hpp"

#include <vector>

namespace phasesep {

enum class GeometryKind { Disk, Annulus };

/// Radial refinement around a circle r = focus: uniform spacing h_fine for |r - focus| <= band,
/// geometric growth (ratio `growth`) up to h_coarse elsewhere. focus < 0 means uniform h_coarse.
struct RadialGrading {
    double focus = -1.0;
    double h_fine = 0.0;
    double band = 0.0;
    double h_coarse = 1.0 / 64.0;
    double growth = 1.08;
};

/// Polar tensor grid on a disk or annulus centred at the origin.
///
/// Radial nodes are vertex centred; for the disk the innermost node sits at half the first
/// spacing so that its control volume reaches the centre. The outer ring (and, for the
/// annulus, the inner ring) carries Dirichlet data. n_theta = 1 is the axisymmetric mesh.
class PolarMesh {
public:
    PolarMesh(GeometryKind kind, std::vector<double> radii, int n_theta);

    static PolarMesh make(GeometryKind kind, double r_inner, double r_outer, int n_theta, const RadialGrading& g);
    static std::vector<double> graded_radii(GeometryKind kind, double r_inner, double r_outer,
                                            const RadialGrading& g);

    GeometryKind kind() const { return kind_; }
    double r_inner() const { return kind_ == GeometryKind::Disk ? 0.0 : r_(0); }
    double r_outer() const { return r_(nr_ - 1); }
    const Vec& r() const { return r_; }
    double r(int i) const { return r_(i); }
    int nr() const { return nr_; }
    int n_theta() const { return nt_; }
    int size() const { return nr_ * nt_; }
    double dtheta() const { return dtheta_; }
    double theta(int j) const { return dtheta_ * j; }
    bool axisymmetric() const { return nt_ == 1; }
    int index(int i, int j) const { return i * nt_ + j; }
    Point2 node(int i, int j) const;
    Point2 node(int k) const { return node(k / nt_, k % nt_); }

    bool dirichlet_ring(int i) const;
    /// Radius of the face between rings i and i+1 (log mean on the annulus, arithmetic on the disk).
    double face_radius(int i) const;
    /// face_radius(i) / (r_{i+1} - r_i); zero for i = -1 (disk centre).
    double conductance(int i) const;
    /// Radial width of the control volume of ring i (half cells at Dirichlet rings).
    double cv_width(int i) const;
    /// Area weight of a node on ring i: r_i * cv_width(i) * dtheta (2 pi on the axisymmetric mesh).
    double area_weight(int i) const;
    /// Coefficients of the periodic angular second difference (offsets -2..2), divided by dtheta^2.
    const std::vector<double>& angular_stencil() const { return ang_; }
    /// Local radial spacing max(r_{i+1}-r_i, r_i-r_{i-1}).
    double radial_spacing(int i) const;

    /// Index of the ring with |r_i - radius| <= tol, or -1.
    int ring_at(double radius, double tol = 1e-12) const;
    /// Index i with r_i <= radius < r_{i+1} (clamped).
    int ring_below(double radius) const;

    MappedGrid mapped_grid() const;
    /// Tensor cubic Lagrange interpolation in (r, theta).
    double interpolate(const Vec& field, double radius, double theta) const;
    double interpolate(const Vec& field, const Point2& p) const;

    /// Strong-form discrete Laplacian at all non-Dirichlet nodes (zero on Dirichlet rings).
    Vec laplacian(const Vec& u) const;
    /// Weighted integral sum_k area_weight * f_k (Dirichlet rings use half cells).
    double integrate(const Vec& f) const;

private:
    GeometryKind kind_;
    Vec r_;
    int nr_;
    int nt_;
    double dtheta_;
    std::vector<double> ang_;
};

/// Linear operator -L - diag(potential) restricted to the rings [i_lo, i_hi]; the rings
/// i_lo - 1 and i_hi + 1 (when present) act as Dirichlet data.
class BandOperator {
public:
    BandOperator(const PolarMesh& mesh, int i_lo, int i_hi);

    int i_lo() const { return i_lo_; }
    int i_hi() const { return i_hi_; }
    int size() const { return (i_hi_ - i_lo_ + 1) * mesh_->n_theta(); }
    const PolarMesh& mesh() const { return *mesh_; }
    int local(int i, int j) const { return (i - i_lo_) * mesh_->n_theta() + j; }

    /// Assembles -L - diag(potential) on the band; potential is a full-mesh field.
    SpMat matrix(const Vec& potential) const;
    /// Contribution of the Dirichlet rings adjacent to the band: (-L u)_band = A u_band + b.
    Vec boundary_term(const Vec& full) const;
    Vec gather(const Vec& full) const;
    void scatter(const Vec& local, Vec& full) const;
    /// Weights r_i * cv_width(i) * dtheta of the band unknowns.
    Vec weights() const;

private:
    const PolarMesh* mesh_;
    int i_lo_, i_hi_;
};

}  // namespace phasesep
