#pragma once

#include <functional>
#include <string>
#include <vector>

namespace phasesep {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Reaction term f(u, x) with its first two u-derivatives.
class Nonlinearity {
public:
    using Fn = std::function<double(double, const Point2&)>;

    Nonlinearity(std::string name, Fn f, Fn fu, Fn fuu, bool odd);

    /// f = 0.
    static Nonlinearity zero();
    /// f = lambda (u - u^3).
    static Nonlinearity cubic(double lambda);
    /// f = c u; f_u is the constant c.
    static Nonlinearity linear(double c);
    /// Odd extension of a natural cubic spline through (u_k, f_k), u_k >= 0 increasing, f(0) = 0.
    static Nonlinearity table(const std::vector<double>& u, const std::vector<double>& f);

    double f(double u, const Point2& x) const { return f_(u, x); }
    double fu(double u, const Point2& x) const { return fu_(u, x); }
    double fuu(double u, const Point2& x) const { return fuu_(u, x); }
    bool odd() const { return odd_; }
    const std::string& name() const { return name_; }

    /// max |f(u,x) + f(-u,x)| over a fixed sample set in u in [-2, 2] and the unit square.
    double oddness_defect() const;

private:
    std::string name_;
    Fn f_, fu_, fuu_;
    bool odd_;
};

}  // namespace phasesep
