#ifndef DSL_TESTS_CURVES_HPP
#define DSL_TESTS_CURVES_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dsl/geom.hpp"

// Small curve builders shared by the unit and acceptance suites.
namespace testcurves
{

using dsl::geom::Point3;
using dsl::geom::PolyCycle;

// Circle of radius r about centre, in the plane spanned by orthonormal e1, e2.
inline PolyCycle circle(Point3 centre, double r, Point3 e1, Point3 e2, std::size_t n, std::string label)
{
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    pts.push_back(centre + e1 * (r * std::cos(a)) + e2 * (r * std::sin(a)));
  }
  return PolyCycle(std::move(pts), std::move(label));
}

inline PolyCycle square(Point3 corner, double side, std::string label)
{
  return PolyCycle({corner, corner + Point3{side, 0, 0}, corner + Point3{side, side, 0}, corner + Point3{0, side, 0}},
                   std::move(label));
}

// Independent oracle: midpoint-rule discretisation of the Gauss integral on
// curves refined `levels` times.
inline double gauss_midpoint(PolyCycle a, PolyCycle b, int levels)
{
  for (int i = 0; i < levels; ++i) {
    a = dsl::geom::refined(a);
    b = dsl::geom::refined(b);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [a0, a1] = a.edge(i);
    Point3 ma = dsl::geom::lerp(a0, a1, 0.5), da = a1 - a0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto [b0, b1] = b.edge(j);
      Point3 mb = dsl::geom::lerp(b0, b1, 0.5), db = b1 - b0;
      Point3 r = ma - mb;
      double d = dsl::geom::norm(r);
      total += dsl::geom::dot(r, dsl::geom::cross(da, db)) / (d * d * d);
    }
  }
  return total / (4.0 * std::numbers::pi);
}

} // namespace testcurves

#endif
