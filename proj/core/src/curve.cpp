#include "phasesep/curve.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace phasesep {

namespace {

constexpr std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

double speed(const PeriodicSpline& xs, const PeriodicSpline& ys, double u) {
    return std::hypot(xs.d1(u), ys.d1(u));
}

double arc_integral(const PeriodicSpline& xs, const PeriodicSpline& ys, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t k = 0; k < kGaussNodes.size(); ++k) acc += kGaussWeights[k] * speed(xs, ys, mid + half * kGaussNodes[k]);
    return acc * half;
}

// Lagrange interpolation through (t_k, f_k), k = 0..3, and its derivative at t.
std::pair<double, double> lagrange4(const std::array<double, 4>& t, const std::array<double, 4>& f, double x) {
    double value = 0.0, deriv = 0.0;
    for (int a = 0; a < 4; ++a) {
        double num = 1.0, den = 1.0, dnum = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            den *= t[a] - t[b];
        }
        for (int b = 0; b < 4; ++b) {
            if (b == a) continue;
            num *= x - t[b];
            double prod = 1.0;
            for (int c = 0; c < 4; ++c)
                if (c != a && c != b) prod *= x - t[c];
            dnum += prod;
        }
        value += f[a] * num / den;
        deriv += f[a] * dnum / den;
    }
    return {value, deriv};
}

// Root of the cubic interpolant in [lo, hi] where the node values bracket zero.
double bracketed_root(const std::array<double, 4>& t, const std::array<double, 4>& f, double lo, double hi,
                      double flo, double fhi) {
    double x = lo - flo * (hi - lo) / (fhi - flo);
    double a = lo, b = hi, fa = flo;
    for (int iter = 0; iter < 60; ++iter) {
        auto [v, d] = lagrange4(t, f, x);
        if (v == 0.0) return x;
        if ((v < 0.0) == (fa < 0.0)) {
            a = x;
            fa = v;
        } else {
            b = x;
        }
        double next = d != 0.0 ? x - v / d : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) return next;
        x = next;
    }
    return x;
}

}  // namespace

PeriodicSpline::PeriodicSpline(std::vector<double> knots, double period, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)), period_(period) {
    const size_t m = knots_.size();
    require(m >= 3 && values_.size() == m, ErrorKind::InvalidInput, "periodic spline needs >= 3 knots");
    require(period_ > knots_.back() - knots_.front(), ErrorKind::InvalidInput, "period shorter than knot span");
    std::vector<double> h(m);
    for (size_t k = 0; k < m; ++k) {
        h[k] = (k + 1 < m ? knots_[k + 1] : knots_[0] + period_) - knots_[k];
        require(h[k] > 0.0, ErrorKind::InvalidInput, "spline knots must strictly increase");
    }
    Triplets trip;
    Vec rhs(static_cast<Eigen::Index>(m));
    for (size_t k = 0; k < m; ++k) {
        const size_t km = (k + m - 1) % m, kp = (k + 1) % m;
        trip.emplace_back(k, km, h[km] / 6.0);
        trip.emplace_back(k, k, (h[km] + h[k]) / 3.0);
        trip.emplace_back(k, kp, h[k] / 6.0);
        rhs(static_cast<Eigen::Index>(k)) = (values_[kp] - values_[k]) / h[k] - (values_[k] - values_[km]) / h[km];
    }
    SpMat M(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    M.setFromTriplets(trip.begin(), trip.end());
    SparseFactor lu(M);
    Vec sol = lu.solve(rhs);
    second_.assign(sol.data(), sol.data() + sol.size());
}

PeriodicSpline PeriodicSpline::uniform(double period, const std::vector<double>& values) {
    const size_t m = values.size();
    std::vector<double> knots(m);
    for (size_t k = 0; k < m; ++k) knots[k] = period * static_cast<double>(k) / static_cast<double>(m);
    return PeriodicSpline(std::move(knots), period, values);
}

double PeriodicSpline::eval(double t, int order) const {
    const size_t m = knots_.size();
    double u = std::fmod(t - knots_[0], period_);
    if (u < 0.0) u += period_;
    u += knots_[0];
    size_t k = static_cast<size_t>(std::upper_bound(knots_.begin(), knots_.end(), u) - knots_.begin());
    k = (k == 0) ? 0 : k - 1;
    const size_t kp = (k + 1) % m;
    const double t0 = knots_[k];
    const double t1 = (k + 1 < m) ? knots_[k + 1] : knots_[0] + period_;
    const double h = t1 - t0;
    const double a = (t1 - u) / h, b = (u - t0) / h;
    const double f0 = values_[k], f1 = values_[kp], M0 = second_[k], M1 = second_[kp];
    switch (order) {
        case 0: return a * f0 + b * f1 + ((a * a * a - a) * M0 + (b * b * b - b) * M1) * h * h / 6.0;
        case 1: return (f1 - f0) / h - (3.0 * a * a - 1.0) * h * M0 / 6.0 + (3.0 * b * b - 1.0) * h * M1 / 6.0;
        case 2: return a * M0 + b * M1;
        default: return (M1 - M0) / h;
    }
}

ClosedCurve ClosedCurve::from_points(const std::vector<Point2>& vertices, int m) {
    require(m >= 16, ErrorKind::InvalidInput, "curve sample count must be >= 16");
    std::vector<Point2> pts;
    pts.reserve(vertices.size());
    double perimeter = 0.0;
    for (size_t k = 0; k < vertices.size(); ++k) {
        const Point2& a = vertices[k];
        const Point2& b = vertices[(k + 1) % vertices.size()];
        perimeter += std::hypot(b.x - a.x, b.y - a.y);
    }
    const double min_gap = 0.25 * perimeter / std::max<size_t>(vertices.size(), 1);
    for (const Point2& v : vertices) {
        if (!pts.empty() && std::hypot(v.x - pts.back().x, v.y - pts.back().y) <= min_gap) continue;
        pts.push_back(v);
    }
    while (pts.size() > 1 && std::hypot(pts.front().x - pts.back().x, pts.front().y - pts.back().y) <= min_gap)
        pts.pop_back();
    require(pts.size() >= 4, ErrorKind::InvalidInput, "closed curve needs at least 4 distinct vertices");

    // First pass: chord-length parametrization of the raw polygon.
    std::vector<double> knots(pts.size()), xv(pts.size()), yv(pts.size());
    double u = 0.0;
    for (size_t k = 0; k < pts.size(); ++k) {
        if (k > 0) u += std::hypot(pts[k].x - pts[k - 1].x, pts[k].y - pts[k - 1].y);
        knots[k] = u;
        xv[k] = pts[k].x;
        yv[k] = pts[k].y;
    }
    double period = u + std::hypot(pts.front().x - pts.back().x, pts.front().y - pts.back().y);
    PeriodicSpline xs(knots, period, xv), ys(knots, period, yv);

    for (int pass = 0; pass < 3; ++pass) {
        // Cumulative arc length on a fine uniform subdivision of the parameter interval.
        const int cells = std::max<int>(4 * m, 4 * static_cast<int>(knots.size()));
        std::vector<double> cum(cells + 1, 0.0);
        const double du = period / cells;
        for (int c = 0; c < cells; ++c) cum[c + 1] = cum[c] + arc_integral(xs, ys, c * du, (c + 1) * du);
        const double L = cum.back();

        // Parameter of maximal x (start point).
        int best = 0;
        double best_x = -1e300;
        for (int c = 0; c < cells; ++c) {
            const double xv0 = xs.value(c * du);
            if (xv0 > best_x) {
                best_x = xv0;
                best = c;
            }
        }
        double ustart = best * du;
        for (int it = 0; it < 30; ++it) {
            const double d1 = xs.d1(ustart), d2 = xs.d2(ustart);
            if (d2 >= 0.0) break;
            const double step = std::clamp(-d1 / d2, -du, du);
            ustart += step;
            if (std::abs(step) < 1e-15 * period) break;
        }
        ustart = std::fmod(ustart, period);
        if (ustart < 0.0) ustart += period;
        const int c0 = std::min(cells - 1, static_cast<int>(ustart / du));
        const double sstart = cum[c0] + arc_integral(xs, ys, c0 * du, ustart);

        auto param_of_arc = [&](double s) {
            s = std::fmod(s, L);
            if (s < 0.0) s += L;
            int c = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), s) - cum.begin()) - 1;
            c = std::clamp(c, 0, cells - 1);
            double lo = c * du, hi = (c + 1) * du;
            double x = lo + (s - cum[c]) / std::max(cum[c + 1] - cum[c], 1e-300) * du;
            for (int it = 0; it < 40; ++it) {
                const double g = cum[c] + arc_integral(xs, ys, lo, x) - s;
                const double sp = speed(xs, ys, x);
                double next = x - g / sp;
                if (!(next >= lo && next <= hi)) next = std::clamp(next, lo, hi);
                if (std::abs(next - x) <= 1e-15 * period) {
                    x = next;
                    break;
                }
                x = next;
            }
            return x;
        };

        std::vector<double> nx(m), ny(m);
        for (int j = 0; j < m; ++j) {
            const double uj = param_of_arc(sstart + L * j / m);
            nx[j] = xs.value(uj);
            ny[j] = ys.value(uj);
        }
        xs = PeriodicSpline::uniform(L, nx);
        ys = PeriodicSpline::uniform(L, ny);
        knots.assign(m, 0.0);
        for (int j = 0; j < m; ++j) knots[j] = L * j / m;
        period = L;
        if (pass == 2) {
            ClosedCurve c;
            c.build_from_splines(xs, ys, L, m);
            return c;
        }
    }
    return {};
}

ClosedCurve ClosedCurve::circle(const Point2& center, double radius, int m, bool counterclockwise) {
    require(radius > 0.0 && m >= 16, ErrorKind::InvalidInput, "circle needs positive radius and m >= 16");
    const double L = 2.0 * std::numbers::pi * radius;
    std::vector<double> xv(m), yv(m);
    for (int j = 0; j < m; ++j) {
        const double th = (counterclockwise ? 1.0 : -1.0) * 2.0 * std::numbers::pi * j / m;
        xv[j] = center.x + radius * std::cos(th);
        yv[j] = center.y + radius * std::sin(th);
    }
    ClosedCurve c;
    c.build_from_splines(PeriodicSpline::uniform(L, xv), PeriodicSpline::uniform(L, yv), L, m);
    // Replace spline-derived samples by exact circle geometry.
    const double sign = counterclockwise ? 1.0 : -1.0;
    for (int j = 0; j < m; ++j) {
        const double th = sign * 2.0 * std::numbers::pi * j / m;
        c.tx_(j) = -sign * std::sin(th);
        c.ty_(j) = sign * std::cos(th);
        c.nx_(j) = -c.ty_(j);
        c.ny_(j) = c.tx_(j);
        c.kappa_(j) = sign / radius;
    }
    return c;
}

void ClosedCurve::build_from_splines(PeriodicSpline xs, PeriodicSpline ys, double length, int m) {
    xs_ = std::move(xs);
    ys_ = std::move(ys);
    L_ = length;
    m_ = m;
    s_.resize(m);
    x_.resize(m);
    y_.resize(m);
    tx_.resize(m);
    ty_.resize(m);
    nx_.resize(m);
    ny_.resize(m);
    kappa_.resize(m);
    for (int j = 0; j < m; ++j) {
        const double s = L_ * j / m;
        s_(j) = s;
        x_(j) = xs_.value(s);
        y_(j) = ys_.value(s);
        const Point2 t = tangent(s);
        tx_(j) = t.x;
        ty_(j) = t.y;
        nx_(j) = -t.y;
        ny_(j) = t.x;
        kappa_(j) = curvature(s);
    }
}

Point2 ClosedCurve::point(double s) const { return {xs_.value(s), ys_.value(s)}; }

Point2 ClosedCurve::tangent(double s) const {
    const double dx = xs_.d1(s), dy = ys_.d1(s);
    const double nrm = std::hypot(dx, dy);
    return {dx / nrm, dy / nrm};
}

Point2 ClosedCurve::normal(double s) const {
    const Point2 t = tangent(s);
    return {-t.y, t.x};
}

double ClosedCurve::curvature(double s) const {
    const double dx = xs_.d1(s), dy = ys_.d1(s), ddx = xs_.d2(s), ddy = ys_.d2(s);
    const double sp = std::hypot(dx, dy);
    return (dx * ddy - dy * ddx) / (sp * sp * sp);
}

double ClosedCurve::curvature_derivative(double s) const {
    const double h = 1e-4 * ds();
    return (curvature(s + h) - curvature(s - h)) / (2.0 * h);
}

ClosedCurve ClosedCurve::reversed() const {
    std::vector<double> xv(m_), yv(m_);
    for (int j = 0; j < m_; ++j) {
        const int k = (m_ - j) % m_;
        xv[j] = x_(k);
        yv[j] = y_(k);
    }
    ClosedCurve c;
    c.build_from_splines(PeriodicSpline::uniform(L_, xv), PeriodicSpline::uniform(L_, yv), L_, m_);
    for (int j = 0; j < m_; ++j) {
        const int k = (m_ - j) % m_;
        c.tx_(j) = -tx_(k);
        c.ty_(j) = -ty_(k);
        c.nx_(j) = -nx_(k);
        c.ny_(j) = -ny_(k);
        c.kappa_(j) = -kappa_(k);
    }
    return c;
}

ClosedCurve ClosedCurve::resampled(int m) const {
    std::vector<Point2> pts(m_);
    for (int j = 0; j < m_; ++j) pts[j] = {x_(j), y_(j)};
    return from_points(pts, m);
}

double ClosedCurve::total_turning() const {
    // Trapezoid rule on the periodic samples is spectrally accurate.
    return kappa_.sum() * ds();
}

double ClosedCurve::max_abs_curvature() const { return kappa_.cwiseAbs().maxCoeff(); }

double ClosedCurve::unit_speed_defect() const {
    double m = 0.0;
    for (int j = 0; j < m_; ++j) {
        const int k = (j + 1) % m_;
        m = std::max(m, std::abs(std::hypot(x_(k) - x_(j), y_(k) - y_(j)) / ds() - 1.0));
    }
    return m;
}

std::pair<double, double> ClosedCurve::radius_about(const Point2& center) const {
    double lo = 1e300, hi = -1e300, sum = 0.0;
    for (int j = 0; j < m_; ++j) {
        const double r = std::hypot(x_(j) - center.x, y_(j) - center.y);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        sum += r;
    }
    return {sum / m_, hi - lo};
}

double ClosedCurve::closest_parameter(const Point2& p) const {
    int best = 0;
    double best_d = 1e300;
    for (int j = 0; j < m_; ++j) {
        const double d = (x_(j) - p.x) * (x_(j) - p.x) + (y_(j) - p.y) * (y_(j) - p.y);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    double s = s_(best);
    for (int it = 0; it < 50; ++it) {
        const double ex = xs_.value(s) - p.x, ey = ys_.value(s) - p.y;
        const double dx = xs_.d1(s), dy = ys_.d1(s);
        const double g = ex * dx + ey * dy;
        const double dg = dx * dx + dy * dy + ex * xs_.d2(s) + ey * ys_.d2(s);
        double step = dg > 0.0 ? -g / dg : -g / (dx * dx + dy * dy);
        step = std::clamp(step, -ds(), ds());
        s += step;
        if (std::abs(step) <= 1e-15 * L_) break;
    }
    s = std::fmod(s, L_);
    if (s < 0.0) s += L_;
    return s;
}

double curvature(const ClosedCurve& c, double s) { return c.curvature(s); }

// ---------------------------------------------------------------------------
// Level-set extraction.

namespace {

struct Crossing {
    Point2 point;
    Point2 positive_node;
};

struct Segment {
    long a;
    long b;
};

}  // namespace

ClosedCurve from_level_set(const Vec& field, const MappedGrid& grid, int m) {
    const int np = static_cast<int>(grid.p.size());
    const int nq = static_cast<int>(grid.q.size());
    require(np >= 4 && nq >= 1 && field.size() == static_cast<Eigen::Index>(np) * nq, ErrorKind::InvalidInput,
            "level-set field does not match the grid");
    require(static_cast<bool>(grid.map), ErrorKind::InvalidInput, "grid has no coordinate map");
    auto val = [&](int i, int j) { return field(static_cast<Eigen::Index>(i) * nq + j); };
    auto positive = [&](int i, int j) { return val(i, j) >= 0.0; };
    require(field.maxCoeff() > 0.0 && field.minCoeff() < 0.0, ErrorKind::InvalidInput,
            "field does not change sign");

    auto p_root = [&](int i, int j) {
        const int start = std::clamp(i - 1, 0, np - 4);
        std::array<double, 4> t{}, f{};
        for (int k = 0; k < 4; ++k) {
            t[k] = grid.p(start + k);
            f[k] = val(start + k, j);
        }
        return bracketed_root(t, f, grid.p(i), grid.p(i + 1), val(i, j), val(i + 1, j));
    };
    auto q_coord = [&](int j) {
        // Unwrapped q for periodic indexing.
        const int jj = ((j % nq) + nq) % nq;
        const double wraps = std::floor(static_cast<double>(j) / nq);
        return grid.q(jj) + wraps * grid.q_period;
    };
    auto q_root = [&](int i, int j) {
        std::array<double, 4> t{}, f{};
        int start = j - 1;
        if (!grid.periodic_q) start = std::clamp(j - 1, 0, nq - 4);
        for (int k = 0; k < 4; ++k) {
            const int jj = start + k;
            t[k] = q_coord(jj);
            f[k] = val(i, ((jj % nq) + nq) % nq);
        }
        const int j1 = (j + 1) % nq;
        return bracketed_root(t, f, q_coord(j), q_coord(j + 1), val(i, j), val(i, j1));
    };

    if (grid.axisymmetric()) {
        std::vector<int> changes;
        for (int i = 0; i + 1 < np; ++i)
            if (positive(i, 0) != positive(i + 1, 0)) changes.push_back(i);
        if (changes.size() > 1) {
            std::ostringstream msg;
            msg << changes.size() << " closed contours found (exactly one supported)";
            fail(ErrorKind::MultipleComponents, msg.str());
        }
        const int i = changes.front();
        const double r = p_root(i, 0);
        const bool outward_positive = positive(i + 1, 0);
        std::vector<Point2> pts(m);
        for (int k = 0; k < m; ++k) {
            const double q = grid.q(0) + grid.q_period * k / m;
            pts[k] = grid.map(r, q);
        }
        const Point2 c0 = grid.map(grid.p(0), grid.q(0));
        // Left normal of a counterclockwise circle points inward; flip if positive lies outside.
        const Point2 a = pts[0], b = pts[1];
        const double cross = (a.x - c0.x) * (b.y - c0.y) - (a.y - c0.y) * (b.x - c0.x);
        const bool ccw = cross > 0.0;
        if (ccw == outward_positive) std::reverse(pts.begin() + 1, pts.end());
        return ClosedCurve::from_points(pts, m);
    }

    // Edge ids: 2*(i*nq+j) for the p-edge (i,j)-(i+1,j); 2*(i*nq+j)+1 for the q-edge (i,j)-(i,j+1).
    std::map<long, Crossing> crossings;
    auto p_edge = [&](int i, int j) -> long {
        const long id = 2L * (static_cast<long>(i) * nq + j);
        if (!crossings.count(id)) {
            const double r = p_root(i, j);
            const Point2 pos = positive(i, j) ? grid.map(grid.p(i), grid.q(j)) : grid.map(grid.p(i + 1), grid.q(j));
            crossings[id] = {grid.map(r, grid.q(j)), pos};
        }
        return id;
    };
    auto q_edge = [&](int i, int j) -> long {
        const long id = 2L * (static_cast<long>(i) * nq + j) + 1;
        if (!crossings.count(id)) {
            const double th = q_root(i, j);
            const int j1 = (j + 1) % nq;
            const Point2 pos = positive(i, j) ? grid.map(grid.p(i), grid.q(j)) : grid.map(grid.p(i), q_coord(j + 1));
            (void)j1;
            crossings[id] = {grid.map(grid.p(i), th), pos};
        }
        return id;
    };

    std::vector<Segment> segments;
    const int jcells = grid.periodic_q ? nq : nq - 1;
    for (int i = 0; i + 1 < np; ++i) {
        for (int j = 0; j < jcells; ++j) {
            const int j1 = (j + 1) % nq;
            const bool s0 = positive(i, j), s1 = positive(i + 1, j), s2 = positive(i + 1, j1), s3 = positive(i, j1);
            std::vector<long> edges;
            std::array<long, 4> e{-1, -1, -1, -1};
            if (s0 != s1) e[0] = p_edge(i, j);
            if (s1 != s2) e[1] = q_edge(i + 1, j);
            if (s3 != s2) e[2] = p_edge(i, j1);
            if (s0 != s3) e[3] = q_edge(i, j);
            int count = 0;
            for (long v : e) count += v >= 0;
            if (count == 2) {
                for (long v : e)
                    if (v >= 0) edges.push_back(v);
                segments.push_back({edges[0], edges[1]});
            } else if (count == 4) {
                const double center = 0.25 * (val(i, j) + val(i + 1, j) + val(i + 1, j1) + val(i, j1));
                if ((center >= 0.0) == s0) {
                    segments.push_back({e[0], e[1]});
                    segments.push_back({e[2], e[3]});
                } else {
                    segments.push_back({e[0], e[3]});
                    segments.push_back({e[1], e[2]});
                }
            }
        }
    }
    require(!segments.empty(), ErrorKind::InvalidInput, "no zero crossings found");

    std::map<long, std::vector<int>> incidence;
    for (int k = 0; k < static_cast<int>(segments.size()); ++k) {
        incidence[segments[k].a].push_back(k);
        incidence[segments[k].b].push_back(k);
    }
    for (const auto& [edge, segs] : incidence) {
        if (segs.size() != 2) fail(ErrorKind::OpenContour, "zero set reaches the grid boundary");
    }

    std::vector<bool> used(segments.size(), false);
    std::vector<std::vector<long>> loops;
    for (int start = 0; start < static_cast<int>(segments.size()); ++start) {
        if (used[start]) continue;
        std::vector<long> loop;
        int seg = start;
        long edge = segments[start].a;
        while (!used[seg]) {
            used[seg] = true;
            loop.push_back(edge);
            const long next_edge = segments[seg].a == edge ? segments[seg].b : segments[seg].a;
            const auto& inc = incidence[next_edge];
            const int next_seg = inc[0] == seg ? inc[1] : inc[0];
            edge = next_edge;
            seg = next_seg;
        }
        loops.push_back(std::move(loop));
    }
    if (loops.size() != 1) {
        std::ostringstream msg;
        msg << loops.size() << " closed contours found (exactly one supported)";
        fail(ErrorKind::MultipleComponents, msg.str());
    }

    const auto& loop = loops.front();
    std::vector<Point2> pts;
    pts.reserve(loop.size());
    for (long id : loop) pts.push_back(crossings[id].point);
    // Orientation: the left normal must point toward the positive nodes.
    double vote = 0.0;
    const size_t n = pts.size();
    for (size_t k = 0; k < n; ++k) {
        const Point2& prev = pts[(k + n - 1) % n];
        const Point2& next = pts[(k + 1) % n];
        const Point2 nrm{-(next.y - prev.y), next.x - prev.x};
        const Point2& pos = crossings[loop[k]].positive_node;
        vote += (pos.x - pts[k].x) * nrm.x + (pos.y - pts[k].y) * nrm.y > 0.0 ? 1.0 : -1.0;
    }
    if (vote < 0.0) std::reverse(pts.begin(), pts.end());
    return ClosedCurve::from_points(pts, m);
}

// ---------------------------------------------------------------------------
// Fermi coordinates.

TubeCoords::TubeCoords(std::shared_ptr<const ClosedCurve> curve, double half_width)
    : curve_(std::move(curve)), delta_(half_width) {
    require(curve_ && curve_->size() > 0, ErrorKind::InvalidInput, "tube needs a curve");
    require(delta_ > 0.0 && delta_ * curve_->max_abs_curvature() < 0.5, ErrorKind::InvalidInput,
            "tube half-width must be positive and below 1/(2 max|kappa|)");
}

double TubeCoords::default_half_width(const ClosedCurve& c, double distance_to_boundary) {
    const double kmax = c.max_abs_curvature();
    double delta = kmax > 0.0 ? 0.45 / kmax : 1e300;
    if (distance_to_boundary > 0.0) delta = std::min(delta, 0.5 * distance_to_boundary);
    return delta;
}

TubePoint TubeCoords::project(const Point2& p) const {
    const double s = curve_->closest_parameter(p);
    const Point2 g = curve_->point(s);
    const Point2 nu = curve_->normal(s);
    return {(p.x - g.x) * nu.x + (p.y - g.y) * nu.y, s};
}

TubePoint TubeCoords::to_tube(const Point2& p) const {
    const TubePoint tp = project(p);
    if (std::abs(tp.t) > delta_) {
        std::ostringstream msg;
        msg << "point at distance " << tp.t << " lies outside the tube of half-width " << delta_;
        fail(ErrorKind::OutsideTube, msg.str());
    }
    return tp;
}

Point2 TubeCoords::from_tube(double t, double s) const {
    const Point2 g = curve_->point(s);
    const Point2 nu = curve_->normal(s);
    return {g.x + t * nu.x, g.y + t * nu.y};
}

LaplacianCoeffs laplacian_coeffs(const TubeCoords& tube, double t, double s) {
    if (std::abs(t) > tube.half_width()) {
        std::ostringstream msg;
        msg << "|t| = " << std::abs(t) << " exceeds tube half-width " << tube.half_width();
        fail(ErrorKind::OutsideTube, msg.str());
    }
    const ClosedCurve& c = tube.curve();
    const double k = c.curvature(s);
    const double dk = c.curvature_derivative(s);
    const double g = 1.0 - t * k;
    LaplacianCoeffs out;
    out.c_tt = 1.0;
    out.c_ss = 1.0 / (g * g);
    out.c_t = -k / g;
    out.c_s = t * dk / (g * g * g);
    return out;
}

LaplacianCoeffs laplacian_coeffs(const ClosedCurve& c, double t, double s) {
    const double kmax = c.max_abs_curvature();
    const double delta = kmax > 0.0 ? 0.45 / kmax : 1e300;
    if (std::abs(t) > delta) {
        std::ostringstream msg;
        msg << "|t| = " << std::abs(t) << " exceeds tube half-width " << delta;
        fail(ErrorKind::OutsideTube, msg.str());
    }
    const double k = c.curvature(s);
    const double dk = c.curvature_derivative(s);
    const double g = 1.0 - t * k;
    return {1.0, 1.0 / (g * g), -k / g, t * dk / (g * g * g)};
}

StretchedCoords::StretchedCoords(double length, const std::vector<double>& b, const std::vector<double>& zeta,
                                 double eps)
    : eps_(eps) {
    require(eps > 0.0, ErrorKind::InvalidInput, "eps must be positive");
    require(b.size() == zeta.size() && b.size() >= 3, ErrorKind::InvalidInput, "b and zeta sample mismatch");
    for (double v : b) require(v > 0.0, ErrorKind::InvalidInput, "b must be positive on the curve");
    auto bs = std::make_shared<PeriodicSpline>(PeriodicSpline::uniform(length, b));
    auto zs = std::make_shared<PeriodicSpline>(PeriodicSpline::uniform(length, zeta));
    b_ = [bs](double s) { return bs->value(s); };
    zeta_ = [zs](double s) { return zs->value(s); };
}

StretchedCoords::StretchedCoords(double, std::function<double(double)> b, std::function<double(double)> zeta,
                                 double eps)
    : b_(std::move(b)), zeta_(std::move(zeta)), eps_(eps) {
    require(eps > 0.0, ErrorKind::InvalidInput, "eps must be positive");
}

double StretchedCoords::tau(double t, double s) const { return b_(s) * (t - eps_ * zeta_(s)) / eps_; }

double StretchedCoords::t_of(double tau, double s) const { return eps_ * tau / b_(s) + eps_ * zeta_(s); }

}  // namespace phasesep
