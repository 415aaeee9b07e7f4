#ifndef HJLAB_CORE_HPP
#define HJLAB_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hjlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double angle_of(const Vec2& v) { return std::atan2(v.y(), v.x()); }

/// Axis-aligned box [lo, hi].
struct Box {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Ones();

  bool contains(const Vec2& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  Vec2 extent() const { return hi - lo; }
  double diameter() const { return extent().norm(); }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of a map (p = 0 for gradients, x0 outside Omega, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A model could not be evaluated at a point; carries the point.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, Vec2 at) : Error(what), point(at) {}
  Vec2 point;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Too little usable data for an exponent fit.
class FitError : public Error {
 public:
  using Error::Error;
};

/// The model violates a structural requirement (e.g. non-unique support point).
class ModelDefect : public Error {
 public:
  using Error::Error;
};

}  // namespace hjlab

#endif  // HJLAB_CORE_HPP
