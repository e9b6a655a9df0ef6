#include "dsl/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dsl/error.hpp"

namespace dsl::geom
{

double norm(const Point3 &a)
{ return std::sqrt(dot(a, a)); }

double distance(const Point3 &a, const Point3 &b)
{ return norm(a - b); }

Point3 normalized(const Point3 &a)
{
  double n = norm(a);
  return n > 0.0 ? a * (1.0 / n) : a;
}

Point3 lerp(const Point3 &a, const Point3 &b, double s)
{ return a + (b - a) * s; }

PolyCycle::PolyCycle(std::vector<Point3> vertices, std::string label)
: _vertices(std::move(vertices)), _label(std::move(label))
{
  if (_vertices.size() < 3)
    throw Error("InvalidCurve", "closed curve '" + _label + "' needs at least 3 vertices");

  for (std::size_t i = 0; i < _vertices.size(); ++i) {
    auto const &p = _vertices[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw Error("InvalidCurve", "non-finite vertex in '" + _label + "'");

    auto [a, b] = edge(i);
    if (distance(a, b) <= kGeomEps)
      throw Error("InvalidCurve", "zero-length edge " + std::to_string(i) + " in '" + _label + "'");
  }
}

double PolyCycle::length() const
{
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    auto [a, b] = edge(i);
    total += distance(a, b);
  }
  return total;
}

OneCycle::OneCycle(std::vector<PolyCycle> comps)
: components(std::move(comps))
{
  if (components.empty())
    throw Error("InvalidCurve", "a 1-cycle needs at least one component");
}

OneCycle::OneCycle(PolyCycle single)
{ components.push_back(std::move(single)); }

double TriangulatedDisk::area() const
{
  double total = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    auto [a, b, c] = triangle(i);
    total += 0.5 * norm(cross(b - a, c - a));
  }
  return total;
}

Direction Direction::from(const Point3 &v)
{
  double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n))
    throw Error("InvalidDirection", "direction must be a finite non-zero vector");
  return Direction{v * (1.0 / n)};
}

RigidMotion RigidMotion::about_axis(const Point3 &axis, double angle, const Point3 &shift)
{
  Point3 k = normalized(axis);
  double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;

  RigidMotion m;
  m.rotation = {t * k.x * k.x + c,       t * k.x * k.y - s * k.z, t * k.x * k.z + s * k.y,
                t * k.x * k.y + s * k.z, t * k.y * k.y + c,       t * k.y * k.z - s * k.x,
                t * k.x * k.z - s * k.y, t * k.y * k.z + s * k.x, t * k.z * k.z + c};
  m.shift = shift;
  return m;
}

Point3 RigidMotion::rotate(const Point3 &v) const
{
  auto const &r = rotation;
  return {r[0] * v.x + r[1] * v.y + r[2] * v.z,
          r[3] * v.x + r[4] * v.y + r[5] * v.z,
          r[6] * v.x + r[7] * v.y + r[8] * v.z};
}

Point3 RigidMotion::apply(const Point3 &p) const
{ return rotate(p) + shift; }

PolyCycle transformed(const PolyCycle &c, const RigidMotion &m)
{
  std::vector<Point3> pts;
  pts.reserve(c.size());
  for (auto const &p : c.vertices())
    pts.push_back(m.apply(p));
  return PolyCycle(std::move(pts), c.label());
}

PolyCycle reversed(const PolyCycle &c)
{
  std::vector<Point3> pts(c.vertices().rbegin(), c.vertices().rend());
  return PolyCycle(std::move(pts), c.label());
}

PolyCycle refined(const PolyCycle &c)
{
  std::vector<Point3> pts;
  pts.reserve(2 * c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto [a, b] = c.edge(i);
    pts.push_back(a);
    pts.push_back(lerp(a, b, 0.5));
  }
  return PolyCycle(std::move(pts), c.label());
}

double cycle_length(const OneCycle &c)
{
  double total = 0.0;
  for (auto const &comp : c.components)
    total += comp.length();
  return total;
}

namespace
{

double clamp01(double v)
{ return std::clamp(v, 0.0, 1.0); }

// Closest points between two segments (Ericson, Real-Time Collision Detection 5.1.9).
double segment_distance_params(const Point3 &p1, const Point3 &q1,
                               const Point3 &p2, const Point3 &q2,
                               double &s, double &t)
{
  Point3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);

  if (a <= 0.0 && e <= 0.0) {
    s = t = 0.0;
    return distance(p1, p2);
  }
  if (a <= 0.0) {
    s = 0.0;
    t = clamp01(f / e);
  } else {
    double c = dot(d1, r);
    if (e <= 0.0) {
      t = 0.0;
      s = clamp01(-c / a);
    } else {
      double b = dot(d1, d2);
      double denom = a * e - b * b;
      s = denom > 0.0 ? clamp01((b * f - c * e) / denom) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = clamp01(-c / a);
      } else if (t > 1.0) {
        t = 1.0;
        s = clamp01((b - c) / a);
      }
    }
  }
  return distance(p1 + d1 * s, p2 + d2 * t);
}

} // namespace

double segment_distance(const Point3 &a0, const Point3 &a1, const Point3 &b0, const Point3 &b1)
{
  double s, t;
  return segment_distance_params(a0, a1, b0, b1, s, t);
}

double min_distance(const PolyCycle &a, const PolyCycle &b)
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [a0, a1] = a.edge(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto [b0, b1] = b.edge(j);
      best = std::min(best, segment_distance(a0, a1, b0, b1));
    }
  }
  return best;
}

NearestOnCycle nearest_on_cycle(const PolyCycle &c, const Point3 &p)
{
  NearestOnCycle best{std::numeric_limits<double>::infinity(), 0, 0.0};
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto [a, b] = c.edge(i);
    Point3 d = b - a;
    double u = clamp01(dot(p - a, d) / dot(d, d));
    double dist = distance(p, a + d * u);
    if (dist < best.distance)
      best = {dist, i, u};
  }
  return best;
}

namespace
{

double signed_solid_angle(const Point3 &p1, const Point3 &p2, const Point3 &p3, const Point3 &p4)
{
  Point3 r13 = p3 - p1, r14 = p4 - p1, r23 = p3 - p2, r24 = p4 - p2;
  Point3 r12 = p2 - p1, r34 = p4 - p3;

  std::array<Point3, 4> n{cross(r13, r14), cross(r14, r24), cross(r24, r23), cross(r23, r13)};
  for (auto &v : n) {
    double len = norm(v);
    if (len < 1e-300)
      return 0.0; // coplanar pair contributes nothing
    v = v * (1.0 / len);
  }

  auto as = [](double v) { return std::asin(std::clamp(v, -1.0, 1.0)); };
  double omega = as(dot(n[0], n[1])) + as(dot(n[1], n[2])) + as(dot(n[2], n[3])) + as(dot(n[3], n[0]));

  double orient = dot(cross(r34, r12), r13);
  return orient > 0.0 ? omega : (orient < 0.0 ? -omega : 0.0);
}

void require_disjoint(const PolyCycle &a, const PolyCycle &b)
{
  if (min_distance(a, b) < kGeomEps)
    throw Error("CurvesIntersect", "curves '" + a.label() + "' and '" + b.label() + "' are not disjoint");
}

struct ProjectionFrame
{
  Point3 e1, e2, up;
};

ProjectionFrame frame_for(const Point3 &d)
{
  Point3 helper = std::abs(d.x) < 0.9 ? Point3{1, 0, 0} : Point3{0, 1, 0};
  Point3 e1 = normalized(cross(helper, d));
  Point3 e2 = cross(d, e1);
  return {e1, e2, d};
}

// Returns false if the projection is not generic for this pair of curves.
bool signed_crossings(const PolyCycle &a, const PolyCycle &b, const Point3 &dir, int &total)
{
  ProjectionFrame f = frame_for(dir);
  total = 0;

  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [a0, a1] = a.edge(i);
    double ax0 = dot(a0, f.e1), ay0 = dot(a0, f.e2);
    double adx = dot(a1, f.e1) - ax0, ady = dot(a1, f.e2) - ay0;
    double alen = std::hypot(adx, ady);

    for (std::size_t j = 0; j < b.size(); ++j) {
      auto [b0, b1] = b.edge(j);
      double bx0 = dot(b0, f.e1), by0 = dot(b0, f.e2);
      double bdx = dot(b1, f.e1) - bx0, bdy = dot(b1, f.e2) - by0;
      double blen = std::hypot(bdx, bdy);

      double denom = adx * bdy - ady * bdx;
      double rx = bx0 - ax0, ry = by0 - ay0;

      if (std::abs(denom) <= kGeomEps * std::max(1.0, alen * blen)) {
        // Parallel in projection: only a problem if the shadows overlap.
        if (segment_distance({ax0, ay0, 0}, {ax0 + adx, ay0 + ady, 0},
                             {bx0, by0, 0}, {bx0 + bdx, by0 + bdy, 0}) < kGeomEps)
          return false;
        continue;
      }

      double s = (rx * bdy - ry * bdx) / denom;
      double t = (rx * ady - ry * adx) / denom;

      double s_tol = alen > 0.0 ? kGeomEps / alen : 1.0;
      double t_tol = blen > 0.0 ? kGeomEps / blen : 1.0;
      bool s_in = s > -s_tol && s < 1.0 + s_tol;
      bool t_in = t > -t_tol && t < 1.0 + t_tol;
      if (!s_in || !t_in)
        continue;
      if (s < s_tol || s > 1.0 - s_tol || t < t_tol || t > 1.0 - t_tol)
        return false; // crossing through a projected vertex

      double ha = dot(lerp(a0, a1, s), f.up);
      double hb = dot(lerp(b0, b1, t), f.up);
      if (std::abs(ha - hb) < kGeomEps)
        return false;

      Point3 ta = a1 - a0, tb = b1 - b0;
      Point3 over = ha > hb ? ta : tb;
      Point3 under = ha > hb ? tb : ta;
      total += dot(cross(over, under), f.up) > 0.0 ? 1 : -1;
    }
  }
  return true;
}

} // namespace

double gauss_linking_sum(const PolyCycle &a, const PolyCycle &b)
{
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [p1, p2] = a.edge(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto [p3, p4] = b.edge(j);
      total += signed_solid_angle(p1, p2, p3, p4);
    }
  }
  return total / (4.0 * std::numbers::pi);
}

Point3 sequence_direction(std::size_t i)
{
  constexpr std::size_t kCount = 1024;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));

  std::size_t k = i % kCount;
  double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(kCount);
  double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  // Small fixed phase keeps the first directions off coordinate planes.
  double phi = 0.3819660112501051 + golden * static_cast<double>(k);
  return {r * std::cos(phi), r * std::sin(phi), z};
}

int crossing_linking_number(const PolyCycle &a, const PolyCycle &b)
{
  require_disjoint(a, b);

  for (std::size_t attempt = 0; attempt < 1024; ++attempt) {
    int total = 0;
    if (!signed_crossings(a, b, sequence_direction(attempt), total))
      continue;
    if (total % 2 != 0)
      throw Error("LinkingMismatch", "odd signed crossing count for closed curves");
    return total / 2;
  }
  throw Error("NonGenericPosition", "no generic projection direction found");
}

int linking_number(const PolyCycle &a, const PolyCycle &b)
{
  int by_crossings = crossing_linking_number(a, b);
  double gauss = gauss_linking_sum(a, b);
  long by_gauss = std::lround(gauss);

  if (by_gauss != by_crossings || std::abs(gauss - static_cast<double>(by_gauss)) > 0.1)
    throw Error("LinkingMismatch",
                "signed crossings give " + std::to_string(by_crossings) +
                " but the Gauss sum is " + std::to_string(gauss));
  return by_crossings;
}

TriangulatedDisk cone_disk(const PolyCycle &boundary, const Point3 &apex)
{
  TriangulatedDisk d{boundary, apex, {}};
  std::size_t n = boundary.size();
  d.triangles.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    auto [a, b] = boundary.edge(i);
    double twice_area = norm(cross(a - apex, b - apex));
    if (twice_area <= kGeomEps * std::max(1.0, distance(a, b)))
      throw Error("DegenerateTriangle", "apex is collinear with boundary edge " + std::to_string(i));
    d.triangles.push_back({n, i, (i + 1) % n});
  }
  return d;
}

TriangulatedDisk translated(const TriangulatedDisk &d, const Point3 &offset)
{
  std::vector<Point3> pts;
  pts.reserve(d.boundary.size());
  for (auto const &p : d.boundary.vertices())
    pts.push_back(p + offset);

  TriangulatedDisk out{PolyCycle(std::move(pts), d.boundary.label()), d.apex + offset, d.triangles};
  return out;
}

namespace
{

enum class Hit { None, Cross, Degenerate };

// Signed in-plane distances from x to the three edge lines, positive inside.
std::array<double, 3> edge_distances(const std::array<Point3, 3> &tri, const Point3 &unit_normal, const Point3 &x)
{
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    Point3 const &v = tri[k];
    Point3 e = tri[(k + 1) % 3] - v;
    out[k] = dot(cross(e, x - v), unit_normal) / norm(e);
  }
  return out;
}

bool near_or_inside(const std::array<double, 3> &d)
{ return d[0] > -kGeomEps && d[1] > -kGeomEps && d[2] > -kGeomEps; }

Hit segment_triangle(const Point3 &p0, const Point3 &p1, const std::array<Point3, 3> &tri)
{
  Point3 n = cross(tri[1] - tri[0], tri[2] - tri[0]);
  double nlen = norm(n);
  Point3 un = n * (1.0 / nlen);

  double d0 = dot(un, p0 - tri[0]);
  double d1 = dot(un, p1 - tri[0]);

  bool on0 = std::abs(d0) < kGeomEps;
  bool on1 = std::abs(d1) < kGeomEps;

  if (on0 && on1) {
    // Segment in the triangle's plane: degenerate if it comes near the triangle.
    for (int k = 0; k < 3; ++k)
      if (segment_distance(p0, p1, tri[k], tri[(k + 1) % 3]) < kGeomEps)
        return Hit::Degenerate;
    if (near_or_inside(edge_distances(tri, un, p0)))
      return Hit::Degenerate;
    return Hit::None;
  }
  if (on0 || on1) {
    Point3 const &p = on0 ? p0 : p1;
    Point3 proj = p - un * (on0 ? d0 : d1);
    return near_or_inside(edge_distances(tri, un, proj)) ? Hit::Degenerate : Hit::None;
  }
  if ((d0 > 0.0) == (d1 > 0.0))
    return Hit::None;

  double s = d0 / (d0 - d1);
  Point3 x = lerp(p0, p1, s);
  auto ed = edge_distances(tri, un, x);
  double lo = std::min({ed[0], ed[1], ed[2]});
  if (lo > kGeomEps)
    return Hit::Cross;
  if (lo < -kGeomEps)
    return Hit::None;
  return Hit::Degenerate;
}

} // namespace

int count_disk_intersections(const OneCycle &sigma, const TriangulatedDisk &disk)
{
  // Bounding-sphere rejection keeps far-away components cheap.
  Point3 centre = disk.apex;
  double radius = 0.0;
  for (auto const &p : disk.boundary.vertices())
    radius = std::max(radius, distance(p, centre));
  radius += kGeomEps;

  std::vector<std::array<Point3, 3>> tris;
  tris.reserve(disk.triangles.size());
  for (std::size_t t = 0; t < disk.triangles.size(); ++t)
    tris.push_back(disk.triangle(t));

  int count = 0;
  for (auto const &comp : sigma.components) {
    for (std::size_t i = 0; i < comp.size(); ++i) {
      auto [p0, p1] = comp.edge(i);
      if (segment_distance(p0, p1, centre, centre) > radius)
        continue;

      for (std::size_t t = 0; t < tris.size(); ++t) {
        switch (segment_triangle(p0, p1, tris[t])) {
        case Hit::Cross:
          ++count;
          break;
        case Hit::Degenerate:
          throw Error("NonGenericPosition",
                      "segment " + std::to_string(i) + " of '" + comp.label() +
                      "' is not transverse to triangle " + std::to_string(t));
        case Hit::None:
          break;
        }
      }
    }
  }
  return count;
}

bool is_generic_direction(const TriangulatedDisk &disk, const Direction &u)
{
  const double min_sin = std::sin(1e-6);
  for (std::size_t t = 0; t < disk.triangles.size(); ++t) {
    auto [a, b, c] = disk.triangle(t);
    Point3 n = normalized(cross(b - a, c - a));
    if (std::abs(dot(n, u.u)) <= min_sin)
      return false;
  }
  return true;
}

Direction generic_direction(const TriangulatedDisk &disk)
{
  for (std::size_t i = 0; i < 1024; ++i) {
    Direction u{sequence_direction(i)};
    if (is_generic_direction(disk, u))
      return u;
  }
  throw Error("NonGenericPosition", "no generic translation direction for disk");
}

TranslateEvidence min_intersections_over_translates(const OneCycle &sigma,
                                                    const TriangulatedDisk &disk,
                                                    const Direction &u,
                                                    double t_max,
                                                    std::size_t samples)
{
  if (samples == 0)
    throw Error("InvalidArgument", "samples must be positive");
  if (!(t_max >= 0.0))
    throw Error("InvalidArgument", "t_max must be non-negative");
  if (!is_generic_direction(disk, u))
    throw Error("NonGenericPosition", "translation direction lies in a triangle plane");

  std::size_t n = t_max == 0.0 ? 1 : samples;

  TranslateEvidence ev;
  ev.min_count = std::numeric_limits<int>::max();
  for (std::size_t j = 0; j < n; ++j) {
    double t = n == 1 ? 0.0 : t_max * static_cast<double>(j) / static_cast<double>(n - 1);
    try {
      int c = count_disk_intersections(sigma, translated(disk, u.u * t));
      ev.min_count = std::min(ev.min_count, c);
      ++ev.samples_used;
    } catch (Error const &e) {
      if (e.kind() != "NonGenericPosition")
        throw;
      ev.skipped_offsets.push_back(t);
    }
  }
  if (ev.samples_used == 0)
    throw Error("NonGenericPosition", "every sampled translate was non-generic");
  return ev;
}

nlohmann::json points_to_json(const std::vector<Point3> &pts)
{
  nlohmann::json arr = nlohmann::json::array();
  for (auto const &p : pts)
    arr.push_back({p.x, p.y, p.z});
  return arr;
}

std::vector<Point3> points_from_json(const nlohmann::json &j)
{
  if (!j.is_array())
    throw Error("InvalidJson", "expected an array of [x,y,z] points");
  std::vector<Point3> pts;
  pts.reserve(j.size());
  for (auto const &p : j) {
    if (!p.is_array() || p.size() != 3)
      throw Error("InvalidJson", "each point must be [x,y,z]");
    pts.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
  }
  return pts;
}

nlohmann::json to_json(const PolyCycle &c)
{
  return {{"label", c.label()}, {"vertices", points_to_json(c.vertices())}};
}

PolyCycle polycycle_from_json(const nlohmann::json &j)
{
  if (!j.is_object() || !j.contains("vertices"))
    throw Error("InvalidJson", "curve object needs a \"vertices\" array");
  return PolyCycle(points_from_json(j.at("vertices")), j.value("label", std::string{}));
}

} // namespace dsl::geom
