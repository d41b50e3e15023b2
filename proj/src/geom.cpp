#include "hyp2nav/geom.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hyp2nav::geom {
namespace {

void check_finite(std::span<const double> v, const char* who) {
    for (double c : v) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument(std::string(who) + ": non-finite coordinate");
        }
    }
}

void check_same_dim(std::size_t a, std::size_t b, const char* who) {
    if (a != b) {
        throw std::invalid_argument(std::string(who) + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool in_ball(const PoincarePoint& x) {
    for (double c : x.coords) {
        if (!std::isfinite(c)) return false;
    }
    return norm(x.coords) < 1.0;
}

PoincarePoint project_to_ball(std::span<const double> x) {
    check_finite(x, "project_to_ball");
    PoincarePoint p{std::vector<double>(x.begin(), x.end())};
    const double n = norm(x);
    if (n > kMaxNorm) {
        const double f = kMaxNorm / n;
        for (double& c : p.coords) c *= f;
    }
    return p;
}

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y) {
    check_same_dim(x.dim(), y.dim(), "mobius_add");
    check_finite(x.coords, "mobius_add");
    check_finite(y.coords, "mobius_add");

    const double xy = dot(x.coords, y.coords);
    const double x2 = dot(x.coords, x.coords);
    const double y2 = dot(y.coords, y.coords);
    const double den = 1.0 + 2.0 * xy + x2 * y2;
    const double cx = (1.0 + 2.0 * xy + y2) / den;
    const double cy = (1.0 - x2) / den;

    std::vector<double> out(x.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = cx * x.coords[i] + cy * y.coords[i];
    }
    return project_to_ball(out);
}

PoincarePoint mobius_matvec(std::span<const double> M, std::size_t rows, std::size_t cols,
                            const PoincarePoint& x) {
    check_same_dim(cols, x.dim(), "mobius_matvec");
    if (M.size() != rows * cols) {
        throw std::invalid_argument("mobius_matvec: matrix size does not match rows*cols");
    }
    check_finite(M, "mobius_matvec");
    check_finite(x.coords, "mobius_matvec");

    std::vector<double> y(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot(M.subspan(r * cols, cols), x.coords);
    }

    // tanh((|y|/|x|) atanh(|x|)) y / |y|  ==  y * q * tanh_ratio(q^2 |y|^2)
    // with q = atanh(|x|)/|x|; both zero limits (x = 0, Mx = 0) fall out.
    const double q = atanh_ratio(dot(x.coords, x.coords));
    const double s = q * tanh_ratio(q * q * dot(y, y));
    for (double& c : y) c *= s;
    return project_to_ball(y);
}

PoincarePoint exp_map_origin(const TangentVector& u) {
    check_finite(u.coords, "exp_map_origin");
    const double s = tanh_ratio(dot(u.coords, u.coords));
    std::vector<double> out(u.dim());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * u.coords[i];
    return project_to_ball(out);
}

TangentVector log_map_origin(const PoincarePoint& v) {
    check_finite(v.coords, "log_map_origin");
    const double n = norm(v.coords);
    if (n >= 1.0) {
        throw std::invalid_argument("log_map_origin: point not inside the unit ball");
    }
    const double r = atanh_ratio(n * n);
    TangentVector u{std::vector<double>(v.dim())};
    for (std::size_t i = 0; i < u.dim(); ++i) u.coords[i] = r * v.coords[i];
    return u;
}

double poincare_distance(const PoincarePoint& x, const PoincarePoint& y) {
    check_same_dim(x.dim(), y.dim(), "poincare_distance");
    check_finite(x.coords, "poincare_distance");
    check_finite(y.coords, "poincare_distance");

    double diff2 = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        const double d = x.coords[i] - y.coords[i];
        diff2 += d * d;
    }
    const double dx = 1.0 - dot(x.coords, x.coords);
    const double dy = 1.0 - dot(y.coords, y.coords);
    if (dx <= 0.0 || dy <= 0.0) {
        throw std::invalid_argument("poincare_distance: point not inside the unit ball");
    }
    return std::sqrt(acosh1p_sq(diff2 / (dx * dy)));
}

double hyperbolic_radius(const PoincarePoint& x) {
    check_finite(x.coords, "hyperbolic_radius");
    return norm(x.coords);
}

// Series thresholds: at t = 1e-4 the dropped terms are O(t^4) ~ 1e-16, below
// one ulp of the leading term, and the direct expressions are already stable.

double tanh_ratio(double t) {
    if (t < 1e-4) {
        return 1.0 + t * (-1.0 / 3.0 + t * (2.0 / 15.0 - t * (17.0 / 315.0)));
    }
    const double s = std::sqrt(t);
    return std::tanh(s) / s;
}

double tanh_ratio_deriv(double t) {
    if (t < 1e-4) {
        return -1.0 / 3.0 + t * (4.0 / 15.0 - t * (17.0 / 105.0));
    }
    const double s = std::sqrt(t);
    const double th = std::tanh(s);
    return (s * (1.0 - th * th) - th) / (2.0 * t * s);
}

double atanh_ratio(double t) {
    if (t < 1e-4) {
        return 1.0 + t * (1.0 / 3.0 + t * (1.0 / 5.0 + t * (1.0 / 7.0)));
    }
    const double s = std::sqrt(t);
    return std::atanh(s) / s;
}

double atanh_ratio_deriv(double t) {
    if (t < 1e-4) {
        return 1.0 / 3.0 + t * (2.0 / 5.0 + t * (3.0 / 7.0));
    }
    const double s = std::sqrt(t);
    return (s / (1.0 - t) - std::atanh(s)) / (2.0 * t * s);
}

double acosh1p_sq(double t) {
    if (t < 1e-4) {
        return t * (4.0 + t * (-4.0 / 3.0 + t * (32.0 / 45.0)));
    }
    const double d = std::acosh(1.0 + 2.0 * t);
    return d * d;
}

double acosh1p_sq_deriv(double t) {
    if (t < 1e-4) {
        return 4.0 + t * (-8.0 / 3.0 + t * (32.0 / 15.0));
    }
    return 2.0 * std::acosh(1.0 + 2.0 * t) / std::sqrt(t * (1.0 + t));
}

}  // namespace hyp2nav::geom
