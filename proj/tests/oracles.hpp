#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

// Reference computations used to check the library, kept deliberately naive.
namespace oracle {

// Dense Gaussian elimination with partial pivoting.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index piv = k;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    }
    if (a(piv, k) == 0.0) throw std::runtime_error("singular");
    a.row(k).swap(a.row(piv));
    std::swap(b(k), b(piv));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a.row(i) -= f * a.row(k);
      b(i) -= f * b(k);
    }
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = b(i);
    for (Eigen::Index j = i + 1; j < n; ++j) s -= a(i, j) * x(j);
    x(i) = s / a(i, i);
  }
  return x;
}

// Integral of x^a y^b over the reference triangle (0,0), (1,0), (0,1).
inline double monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

// Ellipse arc length by a fine polyline.
inline double ellipse_perimeter_polyline(double r1, double r2, int segments = 2000000) {
  double len = 0.0;
  double px = r1, py = 0.0;
  for (int k = 1; k <= segments; ++k) {
    const double t = 2.0 * M_PI * k / segments;
    const double x = r1 * std::cos(t), y = r2 * std::sin(t);
    len += std::hypot(x - px, y - py);
    px = x;
    py = y;
  }
  return len;
}

}  // namespace oracle
