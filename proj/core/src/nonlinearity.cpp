#include "phasesep/nonlinearity.hpp"

#include "phasesep/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace phasesep {

Nonlinearity::Nonlinearity(std::string name, Fn f, Fn fu, Fn fuu, bool odd)
    : name_(std::move(name)), f_(std::move(f)), fu_(std::move(fu)), fuu_(std::move(fuu)), odd_(odd) {
    if (odd_ && oddness_defect() > 1e-12) {
        fail(ErrorKind::InvalidInput, "nonlinearity '" + name_ + "' is flagged odd but f(u)+f(-u) != 0");
    }
}

Nonlinearity Nonlinearity::zero() {
    auto z = [](double, const Point2&) { return 0.0; };
    return Nonlinearity("zero", z, z, z, true);
}

Nonlinearity Nonlinearity::cubic(double lambda) {
    require(std::isfinite(lambda), ErrorKind::InvalidInput, "cubic lambda must be finite");
    std::ostringstream name;
    name << "cubic(" << lambda << ")";
    return Nonlinearity(
        name.str(), [lambda](double u, const Point2&) { return lambda * (u - u * u * u); },
        [lambda](double u, const Point2&) { return lambda * (1.0 - 3.0 * u * u); },
        [lambda](double u, const Point2&) { return -6.0 * lambda * u; }, true);
}

Nonlinearity Nonlinearity::linear(double c) {
    require(std::isfinite(c), ErrorKind::InvalidInput, "linear coefficient must be finite");
    std::ostringstream name;
    name << "linear(" << c << ")";
    return Nonlinearity(
        name.str(), [c](double u, const Point2&) { return c * u; }, [c](double, const Point2&) { return c; },
        [](double, const Point2&) { return 0.0; }, true);
}

Nonlinearity Nonlinearity::table(const std::vector<double>& u, const std::vector<double>& f) {
    const size_t n = u.size();
    require(n >= 3 && f.size() == n, ErrorKind::InvalidInput, "table nonlinearity needs >= 3 matching samples");
    require(u.front() == 0.0 && std::abs(f.front()) <= 1e-14, ErrorKind::InvalidInput,
            "table nonlinearity must start at (0, 0) for an odd extension");
    for (size_t k = 1; k < n; ++k)
        require(u[k] > u[k - 1], ErrorKind::InvalidInput, "table abscissae must increase");

    // Natural cubic spline second derivatives by the tridiagonal algorithm.
    std::vector<double> M(n, 0.0), c(n, 0.0), d(n, 0.0);
    for (size_t k = 1; k + 1 < n; ++k) {
        const double h0 = u[k] - u[k - 1], h1 = u[k + 1] - u[k];
        const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
        const double r = (f[k + 1] - f[k]) / h1 - (f[k] - f[k - 1]) / h0;
        const double denom = b - a * c[k - 1];
        c[k] = cc / denom;
        d[k] = (r - a * d[k - 1]) / denom;
    }
    for (size_t k = n - 2; k >= 1; --k) {
        M[k] = d[k] - c[k] * M[k + 1];
        if (k == 1) break;
    }
    auto data = std::make_shared<const std::tuple<std::vector<double>, std::vector<double>, std::vector<double>>>(
        u, f, M);

    // Evaluates the spline (or its derivatives) at |v|; beyond the table the last cubic piece is extended.
    auto eval = [data](double v, int order) {
        const auto& [uu, ff, MM] = *data;
        const size_t m = uu.size();
        size_t k = static_cast<size_t>(std::upper_bound(uu.begin(), uu.end(), v) - uu.begin());
        k = std::clamp<size_t>(k, 1, m - 1);
        const double h = uu[k] - uu[k - 1];
        const double a = (uu[k] - v) / h, b = (v - uu[k - 1]) / h;
        if (order == 0)
            return a * ff[k - 1] + b * ff[k] + ((a * a * a - a) * MM[k - 1] + (b * b * b - b) * MM[k]) * h * h / 6.0;
        if (order == 1)
            return (ff[k] - ff[k - 1]) / h - (3.0 * a * a - 1.0) * h * MM[k - 1] / 6.0 +
                   (3.0 * b * b - 1.0) * h * MM[k] / 6.0;
        return a * MM[k - 1] + b * MM[k];
    };
    auto sgn = [](double v) { return v < 0.0 ? -1.0 : 1.0; };
    return Nonlinearity(
        "table", [eval, sgn](double v, const Point2&) { return sgn(v) * eval(std::abs(v), 0); },
        [eval](double v, const Point2&) { return eval(std::abs(v), 1); },
        [eval, sgn](double v, const Point2&) { return sgn(v) * eval(std::abs(v), 2); }, true);
}

double Nonlinearity::oddness_defect() const {
    double m = 0.0;
    for (int a = 0; a <= 40; ++a) {
        const double u = -2.0 + 0.1 * a;
        for (int b = 0; b < 3; ++b) {
            const Point2 x{0.5 * b, 0.25 * b};
            m = std::max(m, std::abs(f_(u, x) + f_(-u, x)));
        }
    }
    return m;
}

}  // namespace phasesep
