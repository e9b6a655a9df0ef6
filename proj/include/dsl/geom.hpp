#ifndef DSL_GEOM_HPP
#define DSL_GEOM_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

// Polygonal curves in R^3: lengths, linking numbers, coned disks and exact
// curve/disk intersection counts.
//
// All predicates are tolerance based. Anything within kGeomEps of a degenerate
// configuration is rejected with an Error rather than resolved by guessing, so
// every count that is returned is an exact integer.

namespace dsl::geom
{

inline constexpr double kGeomEps = 1e-9;

struct Point3
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Point3 &operator+=(const Point3 &o)
  { x += o.x; y += o.y; z += o.z; return *this; }

  Point3 &operator-=(const Point3 &o)
  { x -= o.x; y -= o.y; z -= o.z; return *this; }

  Point3 &operator*=(double s)
  { x *= s; y *= s; z *= s; return *this; }

  friend Point3 operator+(Point3 a, const Point3 &b) { return a += b; }
  friend Point3 operator-(Point3 a, const Point3 &b) { return a -= b; }
  friend Point3 operator*(Point3 a, double s) { return a *= s; }
  friend Point3 operator*(double s, Point3 a) { return a *= s; }
  friend Point3 operator-(const Point3 &a) { return {-a.x, -a.y, -a.z}; }
  friend bool operator==(const Point3 &, const Point3 &) = default;
};

inline double dot(const Point3 &a, const Point3 &b)
{ return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Point3 cross(const Point3 &a, const Point3 &b)
{ return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }

double norm(const Point3 &a);
double distance(const Point3 &a, const Point3 &b);
Point3 normalized(const Point3 &a);
Point3 lerp(const Point3 &a, const Point3 &b, double s);

/// Closed polygon; the last vertex connects back to the first.
class PolyCycle
{
public:
  PolyCycle() = default;

  /// Throws InvalidCurve unless there are >= 3 finite vertices and no
  /// zero-length edge.
  PolyCycle(std::vector<Point3> vertices, std::string label = {});

  std::size_t size() const { return _vertices.size(); }
  const std::vector<Point3> &vertices() const { return _vertices; }
  const Point3 &operator[](std::size_t i) const { return _vertices[i]; }
  const std::string &label() const { return _label; }

  /// Edge i runs from vertex i to vertex i+1 (mod size).
  std::pair<Point3, Point3> edge(std::size_t i) const
  { return {_vertices[i], _vertices[(i + 1) % _vertices.size()]}; }

  double length() const;

private:
  std::vector<Point3> _vertices;
  std::string _label;
};

struct OneCycle
{
  std::vector<PolyCycle> components;

  OneCycle() = default;
  explicit OneCycle(std::vector<PolyCycle> comps);
  explicit OneCycle(PolyCycle single);
};

/// Cone over a closed boundary curve. Vertex indices 0..n-1 refer to the
/// boundary, index n is the apex; triangle i is (apex, v_i, v_{i+1}).
struct TriangulatedDisk
{
  PolyCycle boundary;
  Point3 apex;
  std::vector<std::array<std::size_t, 3>> triangles;

  Point3 vertex(std::size_t i) const
  { return i == boundary.size() ? apex : boundary[i]; }

  std::array<Point3, 3> triangle(std::size_t i) const
  {
    auto const &t = triangles[i];
    return {vertex(t[0]), vertex(t[1]), vertex(t[2])};
  }

  double area() const;
};

struct Direction
{
  Point3 u;

  /// Normalizes; throws InvalidDirection for the zero vector.
  static Direction from(const Point3 &v);
};

/// Proper rigid motion x -> R x + shift.
struct RigidMotion
{
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Point3 shift;

  static RigidMotion about_axis(const Point3 &axis, double angle, const Point3 &shift);

  Point3 apply(const Point3 &p) const;
  Point3 rotate(const Point3 &v) const;
};

PolyCycle transformed(const PolyCycle &c, const RigidMotion &m);
PolyCycle reversed(const PolyCycle &c);

/// Splits every edge at its midpoint.
PolyCycle refined(const PolyCycle &c);

double cycle_length(const OneCycle &c);

double segment_distance(const Point3 &a0, const Point3 &a1, const Point3 &b0, const Point3 &b1);
double min_distance(const PolyCycle &a, const PolyCycle &b);

/// Distance from p to the polygon (as a union of edges); also reports the
/// nearest edge and the parameter along it.
struct NearestOnCycle
{
  double distance;
  std::size_t edge;
  double param;
};
NearestOnCycle nearest_on_cycle(const PolyCycle &c, const Point3 &p);

/// Gauss double integral evaluated exactly per segment pair (signed solid
/// angle formula), divided by 4*pi. Real valued; close to an integer for
/// disjoint closed curves.
double gauss_linking_sum(const PolyCycle &a, const PolyCycle &b);

/// Half the signed crossing count of a and b over a generic projection. The
/// projection direction is the first entry of the fixed direction sequence for
/// which no crossing is within kGeomEps of degenerate.
int crossing_linking_number(const PolyCycle &a, const PolyCycle &b);

/// Linking number by signed crossings, cross-checked against the rounded Gauss
/// sum. Throws CurvesIntersect when the curves come within kGeomEps and
/// LinkingMismatch if the two methods disagree.
int linking_number(const PolyCycle &a, const PolyCycle &b);

/// Throws DegenerateTriangle if the apex is (nearly) collinear with an edge.
TriangulatedDisk cone_disk(const PolyCycle &boundary, const Point3 &apex);

TriangulatedDisk translated(const TriangulatedDisk &d, const Point3 &offset);

/// Number of transversal segment/triangle crossings with multiplicity.
/// Throws NonGenericPosition when a segment lies in a triangle plane near the
/// triangle, touches a triangle edge, or has an endpoint on the disk.
int count_disk_intersections(const OneCycle &sigma, const TriangulatedDisk &disk);

/// i-th entry of the fixed low-discrepancy direction sequence (spherical
/// Fibonacci lattice).
Point3 sequence_direction(std::size_t i);

/// First sequence direction whose angle to every triangle plane of the disk
/// exceeds 1e-6 radians.
Direction generic_direction(const TriangulatedDisk &disk);
bool is_generic_direction(const TriangulatedDisk &disk, const Direction &u);

struct TranslateEvidence
{
  int min_count = 0;
  std::size_t samples_used = 0;
  std::vector<double> skipped_offsets;
};

/// Minimum of count_disk_intersections(sigma, disk + t u) over t sampled evenly
/// in [0, t_max]. Non-generic samples are skipped and recorded; if every sample
/// is non-generic NonGenericPosition is thrown.
TranslateEvidence min_intersections_over_translates(const OneCycle &sigma,
                                                    const TriangulatedDisk &disk,
                                                    const Direction &u,
                                                    double t_max,
                                                    std::size_t samples);

nlohmann::json to_json(const PolyCycle &c);
PolyCycle polycycle_from_json(const nlohmann::json &j);
nlohmann::json points_to_json(const std::vector<Point3> &pts);
std::vector<Point3> points_from_json(const nlohmann::json &j);

} // namespace dsl::geom

#endif // DSL_GEOM_HPP
