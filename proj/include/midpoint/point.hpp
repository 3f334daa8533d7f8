#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace midpoint {

// Fixed-dimension coordinate tuple. D = 2 carries complex-plane semantics
// for the analysis code, D = 3 is used by the mesh pipeline.
template <std::size_t D>
struct Point {
  std::array<double, D> c{};

  double& operator[](std::size_t i) { return c[i]; }
  double operator[](std::size_t i) const { return c[i]; }

  Point& operator+=(const Point& o) {
    for (std::size_t i = 0; i < D; ++i) c[i] += o.c[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (std::size_t i = 0; i < D; ++i) c[i] -= o.c[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point&, const Point&) = default;
};

using Point2 = Point<2>;
using Point3 = Point<3>;

template <std::size_t D>
double max_abs_diff(const Point<D>& a, const Point<D>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < D; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline Point2 to_point(std::complex<double> z) { return {{z.real(), z.imag()}}; }
inline std::complex<double> to_complex(const Point2& p) { return {p[0], p[1]}; }

}  // namespace midpoint
