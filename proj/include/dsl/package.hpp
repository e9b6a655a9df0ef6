#ifndef DSL_PACKAGE_HPP
#define DSL_PACKAGE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsl/geom.hpp"

// Initial packages (H, H_1..H_m, phi_1..phi_m) with genus-1 handlebodies
// modelled as tubes around polygonal cores. Each phi_i is stored as a pattern
// in tube coordinates (t, a, b): t is the normalised arclength along the host
// core and (a, b) an offset in units of the host radius, expressed in a
// rotation-minimising frame. Composition of embeddings is coordinate transport
// through successive host tubes.

namespace dsl::package
{

using geom::Point3;
using geom::PolyCycle;

struct TubeCoords
{
  double t;
  double a;
  double b;
};

/// Solid tube of constant radius around a closed polygonal core, with a
/// periodic rotation-minimising frame.
class TubeSpec
{
public:
  TubeSpec() = default;

  /// Throws InvalidTube if radius <= 0 or the tube is not embedded (two
  /// non-local core segments closer than 2 * radius).
  TubeSpec(PolyCycle core, double radius);

  const PolyCycle &core() const { return _core; }
  double radius() const { return _radius; }
  double core_length() const { return _length; }

  /// Normalised arclength of each core vertex, increasing from 0.
  const std::vector<double> &breakpoints() const { return _params; }

  Point3 core_point(double t) const;
  void frame(double t, Point3 &tangent, Point3 &normal, Point3 &binormal) const;

  /// Tube coordinates to ambient coordinates. Offsets live in the miter plane
  /// at each core vertex and are interpolated linearly along edges.
  Point3 point(const TubeCoords &c) const;

  /// Approximate inverse of point(): nearest core point plus frame projection.
  /// Exact on straight runs, off by O(offset * turn angle) near vertices.
  TubeCoords coords(const Point3 &p) const;

  double distance_to_core(const Point3 &p) const;

  /// Max distance between core vertices plus the tube's thickness.
  double diameter() const;

  /// Smallest distance between non-local core segments (segments further than
  /// pi * radius apart along the core).
  double self_clearance() const;

private:
  std::size_t locate(double t, double &u) const;
  Point3 offset_at(std::size_t vertex, double a, double b) const;

  PolyCycle _core;
  double _radius = 0.0;
  double _length = 0.0;
  std::vector<double> _params;
  std::vector<Point3> _tangents;
  std::vector<Point3> _normals;
  std::vector<Point3> _inward;
  std::vector<double> _stretch;
};

struct ChildEmbedding
{
  /// Closed pattern curve in host tube coordinates; t is taken modulo 1 and
  /// consecutive samples are joined along the shorter way around.
  std::vector<TubeCoords> pattern;
  double radius_fraction = 0.0;
  bool contractible = true;
};

class InitialPackage
{
public:
  /// Validates the geometry: children embedded, strictly interior to the
  /// parent and pairwise disjoint. Throws InvalidPackage otherwise.
  InitialPackage(std::string id, int genus, TubeSpec parent, std::vector<ChildEmbedding> children);

  const std::string &id() const { return _id; }
  int genus() const { return _genus; }
  const TubeSpec &parent() const { return _parent; }
  const std::vector<ChildEmbedding> &children() const { return _children; }
  std::size_t m() const { return _children.size(); }
  bool contractible_children() const;

private:
  std::string _id;
  int _genus;
  TubeSpec _parent;
  std::vector<ChildEmbedding> _children;
};

/// Address (i_1, ..., i_k) with entries in 1..m.
struct MultiIndex
{
  std::vector<int> indices;

  std::size_t depth() const { return indices.size(); }
  std::string str() const;
  static MultiIndex parse(const std::string &text);

  friend bool operator==(const MultiIndex &, const MultiIndex &) = default;
  friend auto operator<=>(const MultiIndex &, const MultiIndex &) = default;
};

struct LevelRealization
{
  MultiIndex address;
  TubeSpec tube;
};

/// Transports a child pattern into the host tube. The realised core is refined
/// at every host breakpoint so that it follows the host's geometry.
TubeSpec embed(const TubeSpec &host, const ChildEmbedding &child, const std::string &label);

InitialPackage build_whitehead();
InitialPackage build_bing();

/// Throws TooFewTori if m < 3.
InitialPackage build_antoine(int m);

/// "whitehead", "bing" or "antoine<m>"; throws UnknownPackage.
InitialPackage builtin_package(const std::string &id);

/// Level cap on m^k; DSL_LEVEL_CAP overrides the default of 4096.
std::size_t level_cap();

/// Throws InvalidAddress for out-of-range entries.
LevelRealization realize(const InitialPackage &pkg, const MultiIndex &address);

/// All level-k realizations in lexicographic address order, sharing prefixes.
std::vector<LevelRealization> realize_level(const InitialPackage &pkg, std::size_t k);

/// All m^k addresses in lexicographic order; throws LevelTooLarge above the cap.
std::vector<MultiIndex> level_components(const InitialPackage &pkg, std::size_t k);

struct MeridianDisk
{
  PolyCycle meridian;
  geom::TriangulatedDisk disk;
  double t;
};

/// Meridian circle on the parent boundary at t = 1/4 (moved to the middle of
/// the containing core edge), coned to an apex offset from the core.
MeridianDisk meridian_disk(const InitialPackage &pkg);

/// Union of the realised level-k cores. Throws LongitudeCheckFailed if it
/// misses the canonical meridian disk.
geom::OneCycle canonical_longitude(const InitialPackage &pkg, std::size_t k);

/// Applies a rigid motion to the parent core; patterns are unchanged.
InitialPackage transformed(const InitialPackage &pkg, const geom::RigidMotion &motion);

nlohmann::json to_json(const InitialPackage &pkg);
InitialPackage package_from_json(const nlohmann::json &j, const std::string &fallback_id = "custom");

nlohmann::json to_json(const TubeSpec &tube);

/// Tube realised at the address is nested inside the tube at its prefix:
/// every core vertex plus the child radius stays inside the host.
bool nested_inside(const TubeSpec &inner, const TubeSpec &outer);

} // namespace dsl::package

#endif // DSL_PACKAGE_HPP
