#include "phasesep/mesh.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace phasesep {

namespace {

// Spacings growing geometrically from h0 (ratio q, capped at hmax) that exactly cover `length`.
// With center_rule the last spacing counts only half (node at half spacing from the centre).
std::vector<double> graded_spacings(double length, double h0, double q, double hmax, bool center_rule) {
    std::vector<double> s;
    if (length <= 0.0) return s;
    double sum = 0.0, h = std::min(h0, hmax);
    while (true) {
        s.push_back(h);
        sum += h;
        if ((center_rule ? sum + 0.5 * h : sum) >= length) break;
        h = std::min(h * q, hmax);
    }
    if (!center_rule && s.size() > 1 && std::abs(sum - s.back() - length) < std::abs(sum - length)) {
        sum -= s.back();
        s.pop_back();
    }
    const double total = center_rule ? sum + 0.5 * s.back() : sum;
    const double scale = length / total;
    for (double& v : s) v *= scale;
    return s;
}

}  // namespace

PolarMesh::PolarMesh(GeometryKind kind, std::vector<double> radii, int n_theta)
    : kind_(kind), nr_(static_cast<int>(radii.size())), nt_(n_theta) {
    require(nr_ >= 6, ErrorKind::InvalidInput, "polar mesh needs at least 6 radial nodes");
    require(n_theta == 1 || n_theta >= 8, ErrorKind::InvalidInput, "n_theta must be 1 or >= 8");
    r_ = Eigen::Map<const Vec>(radii.data(), nr_);
    for (int i = 0; i + 1 < nr_; ++i)
        require(r_(i + 1) > r_(i), ErrorKind::InvalidInput, "radial nodes must increase");
    require(r_(0) > 0.0, ErrorKind::InvalidInput, "radial nodes must be positive");
    dtheta_ = 2.0 * std::numbers::pi / nt_;
    if (nt_ >= 8) {
        const double c = 1.0 / (12.0 * dtheta_ * dtheta_);
        ang_ = {-c, 16.0 * c, -30.0 * c, 16.0 * c, -c};
    } else {
        ang_ = {0.0, 0.0, 0.0, 0.0, 0.0};
    }
}

std::vector<double> PolarMesh::graded_radii(GeometryKind kind, double r_inner, double r_outer,
                                            const RadialGrading& g) {
    const bool disk = kind == GeometryKind::Disk;
    require(r_outer > r_inner && (disk || r_inner > 0.0), ErrorKind::InvalidInput, "invalid radial extent");
    require(g.h_coarse > 0.0 && g.growth >= 1.0, ErrorKind::InvalidInput, "invalid grading parameters");
    const double lo = disk ? 0.0 : r_inner;
    std::vector<double> r;
    if (g.focus < 0.0) {
        if (disk) {
            const int n = std::max(5, static_cast<int>(std::ceil(r_outer / g.h_coarse - 0.5)));
            const double d = r_outer / (n + 0.5);
            for (int k = 0; k <= n; ++k) r.push_back((k + 0.5) * d);
            r.back() = r_outer;
        } else {
            const int n = std::max(5, static_cast<int>(std::ceil((r_outer - r_inner) / g.h_coarse)));
            for (int k = 0; k <= n; ++k) r.push_back(r_inner + (r_outer - r_inner) * k / n);
        }
        return r;
    }
    require(g.focus >= lo && g.focus <= r_outer && g.h_fine > 0.0 && g.band >= 0.0, ErrorKind::InvalidInput,
            "grading focus must lie in the domain with positive fine spacing");
    const double hf = g.h_fine;
    // Band nodes focus + k hf.
    int kmin = 0, kmax = 0;
    while ((kmax + 1) * hf <= g.band + 1e-12 && g.focus + (kmax + 1) * hf <= r_outer + 1e-12 * r_outer) ++kmax;
    kmin = 0;
    while ((-kmin + 1) * hf <= g.band + 1e-12 && g.focus - (-kmin + 1) * hf >= lo + (disk ? 1.5 * hf : 0.0) - 1e-12) --kmin;
    std::vector<double> band;
    for (int k = kmin; k <= kmax; ++k) band.push_back(g.focus + k * hf);
    if (std::abs(band.back() - r_outer) < 0.5 * hf) band.back() = r_outer;
    if (!disk && std::abs(band.front() - r_inner) < 0.5 * hf) band.front() = r_inner;

    // Inward segment.
    const double inner_edge = band.front();
    std::vector<double> inner;
    if (inner_edge > lo + 1e-14) {
        std::vector<double> s = graded_spacings(inner_edge - lo, hf * g.growth, g.growth, g.h_coarse, disk);
        double pos = inner_edge;
        for (double v : s) {
            pos -= v;
            inner.push_back(pos);
        }
        if (disk) {
            // The last node sits at half its spacing from the centre.
            inner.back() = 0.5 * s.back();
        } else {
            inner.back() = r_inner;
        }
        std::reverse(inner.begin(), inner.end());
    }
    // Outward segment.
    const double outer_edge = band.back();
    std::vector<double> outer;
    if (outer_edge < r_outer - 1e-14) {
        std::vector<double> s = graded_spacings(r_outer - outer_edge, hf * g.growth, g.growth, g.h_coarse, false);
        double pos = outer_edge;
        for (double v : s) {
            pos += v;
            outer.push_back(pos);
        }
        outer.back() = r_outer;
    }
    r.insert(r.end(), inner.begin(), inner.end());
    r.insert(r.end(), band.begin(), band.end());
    r.insert(r.end(), outer.begin(), outer.end());
    return r;
}

PolarMesh PolarMesh::make(GeometryKind kind, double r_inner, double r_outer, int n_theta, const RadialGrading& g) {
    return PolarMesh(kind, graded_radii(kind, r_inner, r_outer, g), n_theta);
}

Point2 PolarMesh::node(int i, int j) const {
    const double th = theta(j);
    return {r_(i) * std::cos(th), r_(i) * std::sin(th)};
}

bool PolarMesh::dirichlet_ring(int i) const {
    return i == nr_ - 1 || (kind_ == GeometryKind::Annulus && i == 0);
}

double PolarMesh::face_radius(int i) const {
    if (i < 0) return 0.0;
    const double a = r_(i), b = r_(i + 1);
    if (kind_ == GeometryKind::Annulus) return (b - a) / std::log(b / a);
    return 0.5 * (a + b);
}

double PolarMesh::conductance(int i) const {
    if (i < 0 || i >= nr_ - 1) return 0.0;
    return face_radius(i) / (r_(i + 1) - r_(i));
}

double PolarMesh::cv_width(int i) const {
    const double lower = (i == 0) ? (kind_ == GeometryKind::Disk ? 0.0 : r_(0)) : 0.5 * (r_(i - 1) + r_(i));
    const double upper = (i == nr_ - 1) ? r_(i) : 0.5 * (r_(i) + r_(i + 1));
    return upper - lower;
}

double PolarMesh::area_weight(int i) const { return r_(i) * cv_width(i) * dtheta_; }

double PolarMesh::radial_spacing(int i) const {
    double h = 0.0;
    if (i > 0) h = std::max(h, r_(i) - r_(i - 1));
    if (i + 1 < nr_) h = std::max(h, r_(i + 1) - r_(i));
    return h;
}

int PolarMesh::ring_at(double radius, double tol) const {
    for (int i = 0; i < nr_; ++i)
        if (std::abs(r_(i) - radius) <= tol) return i;
    return -1;
}

int PolarMesh::ring_below(double radius) const {
    const double* begin = r_.data();
    const double* end = r_.data() + nr_;
    int i = static_cast<int>(std::upper_bound(begin, end, radius) - begin) - 1;
    return std::clamp(i, 0, nr_ - 2);
}

MappedGrid PolarMesh::mapped_grid() const {
    MappedGrid g;
    g.p = r_;
    g.q.resize(nt_);
    for (int j = 0; j < nt_; ++j) g.q(j) = theta(j);
    g.periodic_q = true;
    g.q_period = 2.0 * std::numbers::pi;
    g.map = [](double r, double th) { return Point2{r * std::cos(th), r * std::sin(th)}; };
    return g;
}

double PolarMesh::interpolate(const Vec& field, double radius, double th) const {
    require(field.size() == size(), ErrorKind::InvalidInput, "field size does not match mesh");
    const int i0 = std::clamp(ring_below(radius) - 1, 0, nr_ - 4);
    std::array<double, 4> wr{};
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) w *= (radius - r_(i0 + b)) / (r_(i0 + a) - r_(i0 + b));
        wr[a] = w;
    }
    if (nt_ == 1) {
        double v = 0.0;
        for (int a = 0; a < 4; ++a) v += wr[a] * field(i0 + a);
        return v;
    }
    const double u = th / dtheta_;
    const int jf = static_cast<int>(std::floor(u));
    const double frac = u - jf;
    std::array<double, 4> wt{};
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        const double xa = a - 1.0;
        for (int b = 0; b < 4; ++b) {
            const double xb = b - 1.0;
            if (b != a) w *= (frac - xb) / (xa - xb);
        }
        wt[a] = w;
    }
    double v = 0.0;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const int j = (((jf - 1 + b) % nt_) + nt_) % nt_;
            v += wr[a] * wt[b] * field(index(i0 + a, j));
        }
    }
    return v;
}

double PolarMesh::interpolate(const Vec& field, const Point2& p) const {
    return interpolate(field, std::hypot(p.x, p.y), std::atan2(p.y, p.x));
}

Vec PolarMesh::laplacian(const Vec& u) const {
    require(u.size() == size(), ErrorKind::InvalidInput, "field size does not match mesh");
    Vec out = Vec::Zero(size());
    for (int i = 0; i < nr_; ++i) {
        if (dirichlet_ring(i)) continue;
        const double cm = conductance(i - 1), cp = conductance(i);
        const double vol = r_(i) * cv_width(i);
        const double inv_r2 = 1.0 / (r_(i) * r_(i));
        for (int j = 0; j < nt_; ++j) {
            const double uc = u(index(i, j));
            double acc = cp * (u(index(i + 1, j)) - uc);
            if (i > 0) acc -= cm * (uc - u(index(i - 1, j)));
            acc /= vol;
            if (nt_ > 1) {
                double ang = 0.0;
                for (int o = -2; o <= 2; ++o) ang += ang_[o + 2] * u(index(i, ((j + o) % nt_ + nt_) % nt_));
                acc += inv_r2 * ang;
            }
            out(index(i, j)) = acc;
        }
    }
    return out;
}

double PolarMesh::integrate(const Vec& f) const {
    require(f.size() == size(), ErrorKind::InvalidInput, "field size does not match mesh");
    const double dth = nt_ == 1 ? 2.0 * std::numbers::pi : dtheta_;
    double acc = 0.0;
    for (int i = 0; i < nr_; ++i) {
        double ring = 0.0;
        for (int j = 0; j < nt_; ++j) ring += f(index(i, j));
        acc += ring * r_(i) * cv_width(i) * dth;
    }
    return acc;
}

BandOperator::BandOperator(const PolarMesh& mesh, int i_lo, int i_hi) : mesh_(&mesh), i_lo_(i_lo), i_hi_(i_hi) {
    require(i_lo >= 0 && i_hi < mesh.nr() && i_lo <= i_hi, ErrorKind::InvalidInput, "invalid ring band");
    require(!(i_lo == 0 && mesh.kind() == GeometryKind::Annulus), ErrorKind::InvalidInput,
            "annulus inner ring is Dirichlet data");
}

SpMat BandOperator::matrix(const Vec& potential) const {
    const PolarMesh& m = *mesh_;
    require(potential.size() == m.size(), ErrorKind::InvalidInput, "potential size does not match mesh");
    const int nt = m.n_theta();
    Triplets trip;
    trip.reserve(static_cast<size_t>(size()) * (nt > 1 ? 7 : 3));
    const auto& ang = m.angular_stencil();
    for (int i = i_lo_; i <= i_hi_; ++i) {
        const double cm = m.conductance(i - 1), cp = m.conductance(i);
        const double vol = m.r(i) * m.cv_width(i);
        const double inv_r2 = 1.0 / (m.r(i) * m.r(i));
        for (int j = 0; j < nt; ++j) {
            const int row = local(i, j);
            double diag = (cp + (i > 0 ? cm : 0.0)) / vol - potential(m.index(i, j));
            if (i + 1 <= i_hi_) trip.emplace_back(row, local(i + 1, j), -cp / vol);
            if (i - 1 >= i_lo_) trip.emplace_back(row, local(i - 1, j), -cm / vol);
            if (nt > 1) {
                diag -= inv_r2 * ang[2];
                for (int o = -2; o <= 2; ++o) {
                    if (o == 0) continue;
                    trip.emplace_back(row, local(i, ((j + o) % nt + nt) % nt), -inv_r2 * ang[o + 2]);
                }
            }
            trip.emplace_back(row, row, diag);
        }
    }
    SpMat A(size(), size());
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

Vec BandOperator::boundary_term(const Vec& full) const {
    const PolarMesh& m = *mesh_;
    const int nt = m.n_theta();
    Vec b = Vec::Zero(size());
    if (i_lo_ > 0) {
        const int i = i_lo_;
        const double coef = -m.conductance(i - 1) / (m.r(i) * m.cv_width(i));
        for (int j = 0; j < nt; ++j) b(local(i, j)) += coef * full(m.index(i - 1, j));
    }
    if (i_hi_ < m.nr() - 1) {
        const int i = i_hi_;
        const double coef = -m.conductance(i) / (m.r(i) * m.cv_width(i));
        for (int j = 0; j < nt; ++j) b(local(i, j)) += coef * full(m.index(i + 1, j));
    }
    return b;
}

Vec BandOperator::gather(const Vec& full) const {
    const int nt = mesh_->n_theta();
    return full.segment(static_cast<Eigen::Index>(i_lo_) * nt, size());
}

void BandOperator::scatter(const Vec& local_values, Vec& full) const {
    const int nt = mesh_->n_theta();
    full.segment(static_cast<Eigen::Index>(i_lo_) * nt, size()) = local_values;
}

Vec BandOperator::weights() const {
    Vec w(size());
    for (int i = i_lo_; i <= i_hi_; ++i)
        for (int j = 0; j < mesh_->n_theta(); ++j) w(local(i, j)) = mesh_->area_weight(i);
    return w;
}

}  // namespace phasesep
