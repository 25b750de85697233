#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

namespace dispersim {

using Index = std::int32_t;
using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// A named coefficient y -> T. `constant` lets assembly pick the cheaper
/// quadrature rule.
template <class T>
struct Coefficient {
  std::function<T(const Point&)> fn;
  bool constant = false;
  std::string name;

  T operator()(const Point& x) const { return fn(x); }
  explicit operator bool() const { return static_cast<bool>(fn); }

  static Coefficient uniform(T value, std::string label) {
    return Coefficient{[value](const Point&) { return value; }, true, std::move(label)};
  }
};

using ScalarCoefficient = Coefficient<double>;
using VectorCoefficient = Coefficient<Vec2>;
using MatrixCoefficient = Coefficient<Mat2>;

/// Space-time scalar data such as the macroscopic source f(t, x).
struct SpaceTimeFunction {
  std::function<double(double, const Point&)> fn;
  bool time_independent = false;
  std::string name;

  double operator()(double t, const Point& x) const { return fn(t, x); }
};

}  // namespace dispersim
