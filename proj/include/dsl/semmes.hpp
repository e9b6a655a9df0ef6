#ifndef DSL_SEMMES_HPP
#define DSL_SEMMES_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsl/geom.hpp"
#include "dsl/package.hpp"

// Depth-truncated metric model of a Semmes space: copies of one voxelized
// fundamental shell H \ (H_1 u ... u H_m), the level-k copies scaled by
// lambda^k, glued along ports through the child embeddings. Branches below
// depth K are collapsed to one limit leaf each.

namespace dsl::semmes
{

using geom::Point3;

/// Shape of the fundamental shell in template coordinates.
class ShellGeometry
{
public:
  virtual ~ShellGeometry() = default;

  virtual std::string id() const = 0;
  virtual std::size_t m() const = 0;

  /// Reference length; the default pitch is a quarter of it.
  virtual double scale() const = 0;

  virtual void bounds(Point3 &lo, Point3 &hi) const = 0;

  /// Signed distance to the parent boundary, negative inside.
  virtual double parent_depth(const Point3 &p) const = 0;

  /// Signed distance to the boundary of child i (0-based), negative inside.
  virtual double child_depth(std::size_t i, const Point3 &p) const = 0;

  /// Nearest point on the parent boundary.
  virtual Point3 parent_foot(const Point3 &p) const = 0;

  /// Nearest point on the boundary of child i.
  virtual Point3 child_foot(std::size_t i, const Point3 &p) const = 0;

  /// phi_i: template coordinates to the parent's template coordinates.
  virtual Point3 map_child(std::size_t i, const Point3 &p) const = 0;
};

/// Shell of a tube package; phi_i is tube-coordinate transport.
class TubeShell : public ShellGeometry
{
public:
  explicit TubeShell(package::InitialPackage pkg);

  std::string id() const override { return _pkg.id(); }
  std::size_t m() const override { return _pkg.m(); }
  double scale() const override { return _pkg.parent().radius(); }
  void bounds(Point3 &lo, Point3 &hi) const override;
  double parent_depth(const Point3 &p) const override;
  double child_depth(std::size_t i, const Point3 &p) const override;
  Point3 parent_foot(const Point3 &p) const override;
  Point3 child_foot(std::size_t i, const Point3 &p) const override;
  Point3 map_child(std::size_t i, const Point3 &p) const override;

private:
  package::InitialPackage _pkg;
  std::vector<package::TubeSpec> _children;
};

struct BallChild
{
  Point3 centre;
  double ratio;
};

/// Ball of the given radius about the origin with similarity children
/// p -> centre + ratio * p.
class BallShell : public ShellGeometry
{
public:
  BallShell(std::string id, double radius, std::vector<BallChild> children);

  std::string id() const override { return _id; }
  std::size_t m() const override { return _children.size(); }
  double scale() const override { return _radius; }
  void bounds(Point3 &lo, Point3 &hi) const override;
  double parent_depth(const Point3 &p) const override;
  double child_depth(std::size_t i, const Point3 &p) const override;
  Point3 parent_foot(const Point3 &p) const override;
  Point3 child_foot(std::size_t i, const Point3 &p) const override;
  Point3 map_child(std::size_t i, const Point3 &p) const override;

private:
  std::string _id;
  double _radius;
  std::vector<BallChild> _children;
};

/// Unit ball with two similarity children of ratio 0.4 centred at (+-0.5, 0, 0).
BallShell ball_fixture();

struct ShellGraph
{
  double h = 0.0;
  std::vector<Point3> positions;
  /// Collar voxels lie in one layer outside the parent; only the root copy
  /// uses them.
  std::vector<bool> collar;
  std::vector<std::array<std::int32_t, 6>> neighbours;
  std::vector<std::uint32_t> outer_ports;
  std::vector<std::vector<std::uint32_t>> inner_ports;

  std::size_t size() const { return positions.size(); }
  std::size_t edge_count() const;
};

/// Voxel centres on the lattice h * (Z + 1/2)^3 inside the parent or its
/// collar and outside every child. Throws ShellDisconnected if h is not below
/// the geometry's scale or the non-collar voxels are not 6-connected, and
/// EmptyPorts if a port set is empty.
ShellGraph build_shell_graph(const ShellGeometry &geometry, double h);
ShellGraph build_shell_graph(const package::InitialPackage &pkg, double h);

/// Exact graph diameter (all-pairs BFS) of the shell when it has at most
/// 10000 voxels, otherwise twice an eccentricity (an upper bound). Both with
/// and without the collar; the larger value is returned.
double shell_diameter(const ShellGraph &g);

struct GlueEdge
{
  std::uint32_t child;
  std::uint32_t inner;
  std::uint32_t outer;
  double length;
};

struct Copy
{
  package::MultiIndex address;
  std::size_t level = 0;
  std::int64_t parent = -1;
  /// Which child of the parent this copy is (0-based).
  std::size_t child_index = 0;
  std::vector<std::size_t> children;
};

class HierarchicalMetricSpace
{
public:
  std::string package_id;
  double lambda = 0.0;
  std::size_t depth = 0;
  ShellGraph shell;
  /// Pairs (inner port of child i in the parent copy, outer port of the child
  /// copy) with their length in template units of the parent copy.
  std::vector<GlueEdge> glue;
  /// Largest distance between paired boundary footpoints: the inner port's
  /// foot on the child boundary and phi_i of the outer port's foot.
  double max_pairing_distance = 0.0;
  /// Inner ports (summed over children) left without a partner closer than h.
  std::size_t unpaired_inner_ports = 0;
  double diameter_of_shell = 0.0;
  std::vector<Copy> copies;
  /// Per copy level, lambda^k obtained by repeated multiplication.
  std::vector<double> level_scale;

  std::size_t m() const { return shell.inner_ports.size(); }
  std::size_t vertex_count() const;
  std::size_t leaf_count() const;

  /// Internal edge length of a level-k copy: level_scale[k] * h.
  double edge_length(std::size_t level) const { return level_scale[level] * shell.h; }

  /// 2 * diam(shell) * lambda^K / (1 - lambda).
  double error_bound() const;

  std::int64_t copy_index(const package::MultiIndex &address) const;

  // Lookup tables for the shortest-path routines, indexed by template vertex.
  std::vector<std::vector<std::uint32_t>> inner_glue;
  std::vector<std::vector<std::uint32_t>> outer_glue;
  std::vector<std::vector<std::uint32_t>> inner_of;
  /// First leaf id for each level-K copy, unused for shallower copies.
  std::vector<std::size_t> leaf_base;
  std::vector<std::size_t> leaf_copy;
};

/// lambda in (0,1); total copies sum m^k for k <= K must not exceed the level
/// cap (DepthTooLarge). Every outer port of a child copy is paired with the
/// inner port whose boundary footpoint is nearest to its image, and must be
/// closer than h (GluingFailed otherwise). Inner ports are also paired with
/// their nearest image when that is closer than h; the rest stay unglued.
HierarchicalMetricSpace assemble(const ShellGeometry &geometry, double lambda, std::size_t depth, double h);
HierarchicalMetricSpace assemble(const package::InitialPackage &pkg, double lambda, std::size_t depth);

/// Either a voxel of a copy or a limit point given by an address, which is
/// repeated periodically and truncated to length K + 1.
struct PointRef
{
  bool limit = false;
  package::MultiIndex address;
  std::uint32_t voxel = 0;

  static PointRef voxel_of(package::MultiIndex address, std::uint32_t voxel);
  static PointRef limit_point(package::MultiIndex address);

  std::string str() const;
};

PointRef point_ref_from_json(const nlohmann::json &j);

struct Distance
{
  double value;
  double error_bound;
};

/// Shortest-path distance, always searched from the smaller vertex id so the
/// result is exactly symmetric. Throws InvalidPointRef for refs outside the
/// space and UnreachablePoint if the graph is disconnected.
Distance distance(const HierarchicalMetricSpace &space, const PointRef &a, const PointRef &b);

/// Max over sampled voxel pairs of the level-0 copy, and their images in every
/// level-1 copy, of max(d(phi x, phi y) / (lambda d(x,y)), lambda d(x,y) /
/// d(phi x, phi y)). d(x,y) is taken with the tree cut at depth K - 1 so both
/// sides see the same number of levels below them. Needs depth >= 2.
double verify_self_similarity(const HierarchicalMetricSpace &space, std::size_t sample_pairs, std::uint64_t seed);

/// Graph diameter of the first level-k copy together with its subtree,
/// estimated by repeated farthest-port sweeps over its outer ports.
double component_diameter(const HierarchicalMetricSpace &space, std::size_t k);

/// Farthest-point sweep estimate of the diameter of the whole space.
double total_diameter(const HierarchicalMetricSpace &space);

} // namespace dsl::semmes

#endif // DSL_SEMMES_HPP
