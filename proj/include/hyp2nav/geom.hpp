#pragma once

#include <span>
#include <vector>

// Poincare-ball primitives at curvature -1. All maps are based at the origin.
// Points live strictly inside the unit ball; producing operations re-project
// into a shell of radius 1 - kBallEps so that atanh and the distance
// denominators stay bounded. Zero-norm inputs take explicit limit branches,
// so identities like exp_O(0) = O hold exactly.

namespace hyp2nav::geom {

inline constexpr double kBallEps = 1e-5;
inline constexpr double kMaxNorm = 1.0 - kBallEps;

// Vector inside the open unit ball.
struct PoincarePoint {
    std::vector<double> coords;

    PoincarePoint() = default;
    explicit PoincarePoint(std::vector<double> c) : coords(std::move(c)) {}
    std::size_t dim() const { return coords.size(); }
};

// Element of the tangent space at the origin; no norm bound.
struct TangentVector {
    std::vector<double> coords;

    TangentVector() = default;
    explicit TangentVector(std::vector<double> c) : coords(std::move(c)) {}
    std::size_t dim() const { return coords.size(); }
};

double norm(std::span<const double> v);

// True if every coordinate is finite and the Euclidean norm is < 1.
bool in_ball(const PoincarePoint& x);

// Rescale to norm 1 - kBallEps when outside the shell; identity otherwise.
// Throws std::invalid_argument on non-finite input.
PoincarePoint project_to_ball(std::span<const double> x);

// x (+) y = ((1 + 2<x,y> + |y|^2) x + (1 - |x|^2) y) / (1 + 2<x,y> + |x|^2 |y|^2)
PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y);

// M (x) x = tanh((|Mx|/|x|) atanh(|x|)) * Mx / |Mx|, with the zero limits
// M(x)0 = O and (Mx = 0) -> O. M is row-major, m x n.
PoincarePoint mobius_matvec(std::span<const double> M, std::size_t rows, std::size_t cols,
                            const PoincarePoint& x);

// exp_O(u) = tanh(|u|) u / |u|
PoincarePoint exp_map_origin(const TangentVector& u);

// log_O(v) = atanh(|v|) v / |v|
TangentVector log_map_origin(const PoincarePoint& v);

// d(x, y) = arcosh(1 + 2 |x - y|^2 / ((1 - |x|^2)(1 - |y|^2)))
double poincare_distance(const PoincarePoint& x, const PoincarePoint& y);

// Euclidean norm of the embedding; the confidence proxy read off the planner.
double hyperbolic_radius(const PoincarePoint& x);

// Smooth scalar helpers shared with the autodiff layer. Both take t = s^2 and
// use series branches near zero so values and derivatives stay exact there.
//   tanh_ratio(t)  = tanh(sqrt(t)) / sqrt(t)
//   atanh_ratio(t) = atanh(sqrt(t)) / sqrt(t)
//   acosh1p_sq(t)  = arcosh(1 + 2t)^2
double tanh_ratio(double t);
double tanh_ratio_deriv(double t);
double atanh_ratio(double t);
double atanh_ratio_deriv(double t);
double acosh1p_sq(double t);
double acosh1p_sq_deriv(double t);

}  // namespace hyp2nav::geom
