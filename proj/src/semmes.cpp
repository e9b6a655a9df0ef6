#include "dsl/semmes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <random>

#include "dsl/error.hpp"

namespace dsl::semmes
{

TubeShell::TubeShell(package::InitialPackage pkg)
: _pkg(std::move(pkg))
{
  for (auto &lr : package::realize_level(_pkg, 1))
    _children.push_back(std::move(lr.tube));
}

void TubeShell::bounds(Point3 &lo, Point3 &hi) const
{
  double inf = std::numeric_limits<double>::infinity();
  lo = {inf, inf, inf};
  hi = {-inf, -inf, -inf};
  for (auto const &v : _pkg.parent().core().vertices())
  {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  double r = _pkg.parent().radius();
  lo -= Point3{r, r, r};
  hi += Point3{r, r, r};
}

double TubeShell::parent_depth(const Point3 &p) const
{
  return _pkg.parent().distance_to_core(p) - _pkg.parent().radius();
}

double TubeShell::child_depth(std::size_t i, const Point3 &p) const
{
  return _children[i].distance_to_core(p) - _children[i].radius();
}

namespace
{

Point3 tube_foot(const package::TubeSpec &tube, const Point3 &p)
{
  auto near = geom::nearest_on_cycle(tube.core(), p);
  auto [a, b] = tube.core().edge(near.edge);
  Point3 c = geom::lerp(a, b, near.param);
  Point3 d = p - c;
  double len = geom::norm(d);
  if (len < 1e-12 * tube.radius())
  {
    Point3 t, n, bn;
    tube.frame(tube.coords(p).t, t, n, bn);
    return c + n * tube.radius();
  }
  return c + d * (tube.radius() / len);
}

Point3 ball_foot(const Point3 &centre, double radius, const Point3 &p)
{
  Point3 d = p - centre;
  double len = geom::norm(d);
  if (len < 1e-12 * radius)
    return centre + Point3{radius, 0.0, 0.0};
  return centre + d * (radius / len);
}

} // namespace

Point3 TubeShell::parent_foot(const Point3 &p) const
{
  return tube_foot(_pkg.parent(), p);
}

Point3 TubeShell::child_foot(std::size_t i, const Point3 &p) const
{
  return tube_foot(_children[i], p);
}

Point3 TubeShell::map_child(std::size_t i, const Point3 &p) const
{
  return _children[i].point(_pkg.parent().coords(p));
}

BallShell::BallShell(std::string id, double radius, std::vector<BallChild> children)
: _id(std::move(id)), _radius(radius), _children(std::move(children))
{
  if (!(radius > 0.0))
    throw Error("InvalidPackage", "ball radius must be positive");
  if (_children.empty())
    throw Error("InvalidPackage", "ball package needs at least one child");
  for (std::size_t i = 0; i < _children.size(); ++i)
  {
    auto const &c = _children[i];
    if (!(c.ratio > 0.0 && c.ratio < 1.0))
      throw Error("InvalidPackage", "child ratio must lie in (0,1)");
    if (!(geom::norm(c.centre) + c.ratio * radius < radius))
      throw Error("InvalidPackage", "child ball is not interior to the parent");
    for (std::size_t j = 0; j < i; ++j)
      if (!(geom::distance(c.centre, _children[j].centre) > (c.ratio + _children[j].ratio) * radius))
        throw Error("InvalidPackage", "child balls overlap");
  }
}

void BallShell::bounds(Point3 &lo, Point3 &hi) const
{
  lo = {-_radius, -_radius, -_radius};
  hi = {_radius, _radius, _radius};
}

double BallShell::parent_depth(const Point3 &p) const
{
  return geom::norm(p) - _radius;
}

double BallShell::child_depth(std::size_t i, const Point3 &p) const
{
  return geom::distance(p, _children[i].centre) - _children[i].ratio * _radius;
}

BallShell ball_fixture()
{
  return BallShell("ball", 1.0, {{{-0.5, 0.0, 0.0}, 0.4}, {{0.5, 0.0, 0.0}, 0.4}});
}

Point3 BallShell::parent_foot(const Point3 &p) const
{
  return ball_foot({}, _radius, p);
}

Point3 BallShell::child_foot(std::size_t i, const Point3 &p) const
{
  return ball_foot(_children[i].centre, _children[i].ratio * _radius, p);
}

Point3 BallShell::map_child(std::size_t i, const Point3 &p) const
{
  return _children[i].centre + p * _children[i].ratio;
}

std::size_t ShellGraph::edge_count() const
{
  std::size_t twice = 0;
  for (auto const &nb : neighbours)
    for (auto u : nb)
      twice += u >= 0;
  return twice / 2;
}

namespace
{

constexpr std::array<std::array<int, 3>, 6> kSteps{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

// Hop-count BFS; vertices rejected by keep are never entered.
std::vector<int> bfs(const ShellGraph &g, std::uint32_t src, const std::vector<bool> &keep)
{
  std::vector<int> hops(g.size(), -1);
  std::vector<std::uint32_t> queue{src};
  hops[src] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head)
  {
    std::uint32_t v = queue[head];
    for (auto u : g.neighbours[v])
      if (u >= 0 && keep[static_cast<std::size_t>(u)] && hops[static_cast<std::size_t>(u)] < 0)
      {
        hops[static_cast<std::size_t>(u)] = hops[v] + 1;
        queue.push_back(static_cast<std::uint32_t>(u));
      }
  }
  return hops;
}

} // namespace

ShellGraph build_shell_graph(const ShellGeometry &geometry, double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error("InvalidArgument", "pitch h must be positive");
  if (!(h < geometry.scale()))
    throw Error("ShellDisconnected", "pitch h must be below the parent radius to resolve the shell");

  Point3 lo, hi;
  geometry.bounds(lo, hi);
  auto index_lo = [&](double x) { return static_cast<int>(std::floor(x / h - 0.5)) - 1; };
  auto index_hi = [&](double x) { return static_cast<int>(std::ceil(x / h - 0.5)) + 1; };
  int i0 = index_lo(lo.x), i1 = index_hi(hi.x);
  int j0 = index_lo(lo.y), j1 = index_hi(hi.y);
  int k0 = index_lo(lo.z), k1 = index_hi(hi.z);
  std::size_t nx = static_cast<std::size_t>(i1 - i0 + 1), ny = static_cast<std::size_t>(j1 - j0 + 1),
              nz = static_cast<std::size_t>(k1 - k0 + 1);
  auto cell = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(k - k0) * ny + static_cast<std::size_t>(j - j0)) * nx + static_cast<std::size_t>(i - i0);
  };

  // First pass: classify lattice points.
  std::vector<std::int32_t> id(nx * ny * nz, -1);
  ShellGraph g;
  g.h = h;
  std::vector<double> depth;
  for (int k = k0; k <= k1; ++k)
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
      {
        Point3 p{h * (i + 0.5), h * (j + 0.5), h * (k + 0.5)};
        double d = geometry.parent_depth(p);
        if (d >= h)
          continue;
        bool inside_child = false;
        for (std::size_t c = 0; c < geometry.m() && !inside_child; ++c)
          inside_child = geometry.child_depth(c, p) < 0.0;
        if (inside_child)
          continue;
        id[cell(i, j, k)] = static_cast<std::int32_t>(g.positions.size());
        g.positions.push_back(p);
        g.collar.push_back(d >= 0.0);
        depth.push_back(d);
      }

  auto link = [&](ShellGraph &graph) {
    graph.neighbours.assign(graph.positions.size(), {-1, -1, -1, -1, -1, -1});
    for (std::size_t v = 0; v < graph.positions.size(); ++v)
    {
      Point3 const &p = graph.positions[v];
      int i = static_cast<int>(std::lround(p.x / h - 0.5));
      int j = static_cast<int>(std::lround(p.y / h - 0.5));
      int k = static_cast<int>(std::lround(p.z / h - 0.5));
      for (std::size_t s = 0; s < 6; ++s)
      {
        int a = i + kSteps[s][0], b = j + kSteps[s][1], c = k + kSteps[s][2];
        if (a < i0 || a > i1 || b < j0 || b > j1 || c < k0 || c > k1)
          continue;
        graph.neighbours[v][s] = id[cell(a, b, c)];
      }
    }
  };
  link(g);

  std::vector<bool> shell_only(g.size()), all(g.size(), true);
  std::int64_t first = -1;
  for (std::size_t v = 0; v < g.size(); ++v)
  {
    shell_only[v] = !g.collar[v];
    if (shell_only[v] && first < 0)
      first = static_cast<std::int64_t>(v);
  }
  if (first < 0)
    throw Error("ShellDisconnected", "no voxel centre lies in the shell at this pitch");
  auto hops = bfs(g, static_cast<std::uint32_t>(first), shell_only);
  for (std::size_t v = 0; v < g.size(); ++v)
    if (shell_only[v] && hops[v] < 0)
      throw Error("ShellDisconnected", "shell voxels are not 6-connected at pitch " + std::to_string(h));

  // Drop collar voxels that cannot be reached from the shell and renumber.
  auto reach = bfs(g, static_cast<std::uint32_t>(first), all);
  ShellGraph out;
  out.h = h;
  std::vector<double> out_depth;
  std::vector<std::int32_t> renumber(g.size(), -1);
  for (std::size_t v = 0; v < g.size(); ++v)
    if (reach[v] >= 0)
    {
      renumber[v] = static_cast<std::int32_t>(out.positions.size());
      out.positions.push_back(g.positions[v]);
      out.collar.push_back(g.collar[v]);
      out_depth.push_back(depth[v]);
    }
  for (auto &x : id)
    if (x >= 0)
      x = renumber[static_cast<std::size_t>(x)];
  link(out);

  out.inner_ports.assign(geometry.m(), {});
  for (std::size_t v = 0; v < out.size(); ++v)
  {
    if (out.collar[v])
      continue;
    if (out_depth[v] > -h)
      out.outer_ports.push_back(static_cast<std::uint32_t>(v));
    for (std::size_t c = 0; c < geometry.m(); ++c)
      if (geometry.child_depth(c, out.positions[v]) < h)
        out.inner_ports[c].push_back(static_cast<std::uint32_t>(v));
  }
  if (out.outer_ports.empty())
    throw Error("EmptyPorts", "no outer ports at pitch " + std::to_string(h));
  for (std::size_t c = 0; c < geometry.m(); ++c)
    if (out.inner_ports[c].empty())
      throw Error("EmptyPorts", "no inner ports for child " + std::to_string(c + 1));
  return out;
}

ShellGraph build_shell_graph(const package::InitialPackage &pkg, double h)
{
  return build_shell_graph(TubeShell(pkg), h);
}

double shell_diameter(const ShellGraph &g)
{
  double best = 0.0;
  for (bool with_collar : {true, false})
  {
    std::vector<bool> keep(g.size());
    std::vector<std::uint32_t> members;
    for (std::size_t v = 0; v < g.size(); ++v)
    {
      keep[v] = with_collar || !g.collar[v];
      if (keep[v])
        members.push_back(static_cast<std::uint32_t>(v));
    }
    int worst = 0;
    if (members.size() <= 10000)
    {
      for (auto v : members)
      {
        auto hops = bfs(g, v, keep);
        for (auto u : members)
          worst = std::max(worst, hops[u]);
      }
    }
    else
    {
      auto hops = bfs(g, members.front(), keep);
      for (auto u : members)
        worst = std::max(worst, 2 * hops[u]);
    }
    best = std::max(best, worst * g.h);
  }
  return best;
}

std::size_t HierarchicalMetricSpace::vertex_count() const
{
  return copies.size() * shell.size() + leaf_count();
}

std::size_t HierarchicalMetricSpace::leaf_count() const
{
  return leaf_copy.size();
}

double HierarchicalMetricSpace::error_bound() const
{
  return 2.0 * diameter_of_shell * level_scale[depth] / (1.0 - lambda);
}

std::int64_t HierarchicalMetricSpace::copy_index(const package::MultiIndex &address) const
{
  // Copies are stored level by level in lexicographic order.
  if (address.depth() > depth)
    return -1;
  std::size_t idx = 0;
  for (int i : address.indices)
  {
    if (i < 1 || static_cast<std::size_t>(i) > m())
      return -1;
    idx = copies[idx].children[static_cast<std::size_t>(i - 1)];
  }
  return static_cast<std::int64_t>(idx);
}

namespace
{

std::uint32_t nearest(const std::vector<std::uint32_t> &candidates, const std::vector<Point3> &pos, const Point3 &q,
                      double &dist)
{
  std::uint32_t best = candidates.front();
  double bd = std::numeric_limits<double>::infinity();
  for (auto c : candidates)
  {
    Point3 d = pos[c] - q;
    double dd = geom::dot(d, d);
    if (dd < bd)
    {
      bd = dd;
      best = c;
    }
  }
  dist = std::sqrt(bd);
  return best;
}

} // namespace

HierarchicalMetricSpace assemble(const ShellGeometry &geometry, double lambda, std::size_t depth, double h)
{
  if (!(lambda > 0.0 && lambda < 1.0))
    throw Error("InvalidArgument", "lambda must lie in (0,1)");
  std::size_t m = geometry.m();
  std::size_t cap = package::level_cap();
  std::size_t total = 0, level_count = 1;
  for (std::size_t k = 0; k <= depth; ++k)
  {
    total += level_count;
    if (total > cap)
      throw Error("DepthTooLarge", "depth " + std::to_string(depth) + " needs more than " + std::to_string(cap) + " copies");
    if (k < depth)
    {
      if (level_count > cap / m)
        throw Error("DepthTooLarge", "depth " + std::to_string(depth) + " needs more than " + std::to_string(cap) + " copies");
      level_count *= m;
    }
  }

  HierarchicalMetricSpace s;
  s.package_id = geometry.id();
  s.lambda = lambda;
  s.depth = depth;
  s.shell = build_shell_graph(geometry, h);
  auto const &g = s.shell;

  std::vector<Point3> outer_feet(g.size());
  for (auto o : g.outer_ports)
    outer_feet[o] = geometry.parent_foot(g.positions[o]);
  for (std::size_t i = 0; i < m; ++i)
  {
    std::vector<Point3> images(g.size()), image_feet(g.size()), inner_feet(g.size());
    for (auto o : g.outer_ports)
    {
      images[o] = geometry.map_child(i, g.positions[o]);
      image_feet[o] = geometry.map_child(i, outer_feet[o]);
    }
    for (auto p : g.inner_ports[i])
      inner_feet[p] = geometry.child_foot(i, g.positions[p]);

    std::map<std::pair<std::uint32_t, std::uint32_t>, double> pairs;
    for (auto o : g.outer_ports)
    {
      double d;
      auto p = nearest(g.inner_ports[i], inner_feet, image_feet[o], d);
      pairs[{p, o}] = d;
    }
    for (auto p : g.inner_ports[i])
    {
      double d;
      auto o = nearest(g.outer_ports, image_feet, inner_feet[p], d);
      if (d < h)
        pairs.emplace(std::pair{p, o}, d);
      else if (std::none_of(pairs.begin(), pairs.end(), [&](auto const &e) { return e.first.first == p; }))
        ++s.unpaired_inner_ports;
    }
    for (auto const &[key, d] : pairs)
    {
      s.glue.push_back({static_cast<std::uint32_t>(i), key.first, key.second,
                        geom::distance(g.positions[key.first], images[key.second])});
      s.max_pairing_distance = std::max(s.max_pairing_distance, d);
    }
  }
  if (!(s.max_pairing_distance < h))
    throw Error("GluingFailed", "port pairing distance " + std::to_string(s.max_pairing_distance)
                                  + " is not below the pitch " + std::to_string(h));

  s.level_scale.assign(depth + 1, 1.0);
  for (std::size_t k = 1; k <= depth; ++k)
    s.level_scale[k] = s.level_scale[k - 1] * lambda;

  s.copies.push_back({});
  for (std::size_t head = 0; head < s.copies.size(); ++head)
  {
    if (s.copies[head].level == depth)
      continue;
    for (std::size_t i = 0; i < m; ++i)
    {
      Copy c;
      c.address = s.copies[head].address;
      c.address.indices.push_back(static_cast<int>(i + 1));
      c.level = s.copies[head].level + 1;
      c.parent = static_cast<std::int64_t>(head);
      c.child_index = i;
      s.copies[head].children.push_back(s.copies.size());
      s.copies.push_back(std::move(c));
    }
  }

  s.inner_glue.assign(g.size(), {});
  s.outer_glue.assign(g.size(), {});
  s.inner_of.assign(g.size(), {});
  for (std::size_t e = 0; e < s.glue.size(); ++e)
  {
    s.inner_glue[s.glue[e].inner].push_back(static_cast<std::uint32_t>(e));
    s.outer_glue[s.glue[e].outer].push_back(static_cast<std::uint32_t>(e));
  }
  for (std::size_t i = 0; i < m; ++i)
    for (auto p : g.inner_ports[i])
      s.inner_of[p].push_back(static_cast<std::uint32_t>(i));

  s.leaf_base.assign(s.copies.size(), std::numeric_limits<std::size_t>::max());
  std::size_t base = s.copies.size() * g.size();
  for (std::size_t c = 0; c < s.copies.size(); ++c)
    if (s.copies[c].level == depth)
    {
      s.leaf_base[c] = base + s.leaf_copy.size();
      for (std::size_t i = 0; i < m; ++i)
        s.leaf_copy.push_back(c);
    }

  s.diameter_of_shell = shell_diameter(g);
  return s;
}

HierarchicalMetricSpace assemble(const package::InitialPackage &pkg, double lambda, std::size_t depth)
{
  TubeShell shell(pkg);
  return assemble(shell, lambda, depth, shell.scale() / 4.0);
}

namespace
{

using Visit = std::function<void(std::size_t, double)>;

// Enumerates the weighted neighbours of a global vertex id. Copies outside
// the allowed set are never entered.
// Copies deeper than cut are collapsed: only the first outer port of a level
// cut + 1 copy is used, joined at zero length to the parent's inner ports.
void for_each_neighbour(const HierarchicalMetricSpace &s, std::size_t id, const std::vector<bool> *allowed,
                        bool allow_root_collar, std::size_t cut, const Visit &visit)
{
  auto const &g = s.shell;
  std::size_t n = g.size();
  std::size_t voxels = s.copies.size() * n;
  auto ok = [&](std::size_t copy) { return !allowed || (*allowed)[copy]; };

  if (id >= voxels)
  {
    std::size_t leaf = id - voxels;
    std::size_t c = s.leaf_copy[leaf];
    std::size_t i = (id - s.leaf_base[c]);
    for (auto p : g.inner_ports[i])
      visit(c * n + p, 0.0);
    return;
  }

  std::size_t c = id / n, v = id % n;
  Copy const &copy = s.copies[c];
  if (copy.level > cut)
  {
    std::size_t p = static_cast<std::size_t>(copy.parent);
    for (auto q : g.inner_ports[copy.child_index])
      visit(p * n + q, 0.0);
    return;
  }
  double w = s.level_scale[copy.level];
  bool collar_ok = c == 0 && allow_root_collar;
  for (auto u : g.neighbours[v])
    if (u >= 0 && (collar_ok || !g.collar[static_cast<std::size_t>(u)]))
      visit(c * n + static_cast<std::size_t>(u), w * g.h);

  if (copy.level == cut && cut < s.depth)
  {
    for (auto i : s.inner_of[v])
    {
      std::size_t child = copy.children[i];
      if (ok(child))
        visit(child * n + g.outer_ports.front(), 0.0);
    }
  }
  else if (copy.level < s.depth)
  {
    for (auto e : s.inner_glue[v])
    {
      auto const &ge = s.glue[e];
      std::size_t child = copy.children[ge.child];
      if (ok(child))
        visit(child * n + ge.outer, w * ge.length);
    }
  }
  else
  {
    for (auto i : s.inner_of[v])
      visit(s.leaf_base[c] + i, 0.0);
  }

  if (copy.parent >= 0 && ok(static_cast<std::size_t>(copy.parent)))
  {
    std::size_t p = static_cast<std::size_t>(copy.parent);
    double pw = s.level_scale[copy.level - 1];
    for (auto e : s.outer_glue[v])
    {
      auto const &ge = s.glue[e];
      if (ge.child == copy.child_index)
        visit(p * n + ge.inner, pw * ge.length);
    }
  }
}

// Dijkstra with ties broken by vertex id. Stops once target is settled when
// target is given.
std::vector<double> dijkstra(const HierarchicalMetricSpace &s, std::size_t source, std::size_t target,
                             const std::vector<bool> *allowed = nullptr, bool allow_root_collar = true,
                             std::size_t cut = std::numeric_limits<std::size_t>::max())
{
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(s.vertex_count(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty())
  {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v])
      continue;
    if (v == target)
      break;
    for_each_neighbour(s, v, allowed, allow_root_collar, cut, [&](std::size_t u, double w) {
      double nd = d + w;
      if (nd < dist[u])
      {
        dist[u] = nd;
        pq.push({nd, u});
      }
    });
  }
  return dist;
}

std::size_t resolve(const HierarchicalMetricSpace &s, const PointRef &r)
{
  if (r.limit)
  {
    if (r.address.indices.empty())
      throw Error("InvalidPointRef", "limit point needs a non-empty address");
    for (int i : r.address.indices)
      if (i < 1 || static_cast<std::size_t>(i) > s.m())
        throw Error("InvalidPointRef", "address entry " + std::to_string(i) + " out of range");
    package::MultiIndex prefix;
    for (std::size_t k = 0; k < s.depth; ++k)
      prefix.indices.push_back(r.address.indices[k % r.address.depth()]);
    int last = r.address.indices[s.depth % r.address.depth()];
    auto c = s.copy_index(prefix);
    return s.leaf_base[static_cast<std::size_t>(c)] + static_cast<std::size_t>(last - 1);
  }
  auto c = s.copy_index(r.address);
  if (c < 0)
    throw Error("InvalidPointRef", "no copy at address [" + r.address.str() + "]");
  if (r.voxel >= s.shell.size())
    throw Error("InvalidPointRef", "voxel " + std::to_string(r.voxel) + " out of range");
  if (c != 0 && s.shell.collar[r.voxel])
    throw Error("InvalidPointRef", "collar voxels exist only in the root copy");
  return static_cast<std::size_t>(c) * s.shell.size() + r.voxel;
}

} // namespace

PointRef PointRef::voxel_of(package::MultiIndex address, std::uint32_t voxel)
{
  return {false, std::move(address), voxel};
}

PointRef PointRef::limit_point(package::MultiIndex address)
{
  return {true, std::move(address), 0};
}

std::string PointRef::str() const
{
  if (limit)
    return "limit:" + address.str();
  return "voxel:" + address.str() + ":" + std::to_string(voxel);
}

PointRef point_ref_from_json(const nlohmann::json &j)
{
  try
  {
    auto addr = [](const nlohmann::json &a) {
      package::MultiIndex mi;
      for (auto const &x : a)
        mi.indices.push_back(x.get<int>());
      return mi;
    };
    if (j.contains("limit"))
      return PointRef::limit_point(addr(j.at("limit")));
    return PointRef::voxel_of(addr(j.value("address", nlohmann::json::array())), j.at("voxel").get<std::uint32_t>());
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error("InvalidPointRef", std::string("malformed point reference: ") + e.what());
  }
}

Distance distance(const HierarchicalMetricSpace &space, const PointRef &a, const PointRef &b)
{
  std::size_t ia = resolve(space, a), ib = resolve(space, b);
  std::size_t src = std::min(ia, ib), dst = std::max(ia, ib);
  double d = 0.0;
  if (src != dst)
  {
    d = dijkstra(space, src, dst)[dst];
    if (!std::isfinite(d))
      throw Error("UnreachablePoint", a.str() + " and " + b.str() + " are not connected");
  }
  return {d, space.error_bound()};
}

double verify_self_similarity(const HierarchicalMetricSpace &space, std::size_t sample_pairs, std::uint64_t seed)
{
  if (space.depth < 2)
    throw Error("InvalidArgument", "self-similarity check needs depth >= 2");
  std::vector<std::uint32_t> pool;
  for (std::size_t v = 0; v < space.shell.size(); ++v)
    if (!space.shell.collar[v])
      pool.push_back(static_cast<std::uint32_t>(v));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::size_t n = space.shell.size();

  double worst = 1.0;
  for (std::size_t s = 0; s < sample_pairs; ++s)
  {
    std::uint32_t x = pool[pick(rng)], y = pool[pick(rng)];
    if (x == y)
      continue;
    std::size_t lo = std::min(x, y), hi = std::max(x, y);
    double d0 = dijkstra(space, lo, hi, nullptr, true, space.depth - 1)[hi];
    for (std::size_t c : space.copies[0].children)
    {
      double d1 = dijkstra(space, c * n + lo, c * n + hi)[c * n + hi];
      double ratio = d1 / (space.lambda * d0);
      worst = std::max({worst, ratio, 1.0 / ratio});
    }
  }
  return worst;
}

namespace
{

std::vector<bool> subtree(const HierarchicalMetricSpace &s, std::size_t root)
{
  std::vector<bool> in(s.copies.size(), false);
  std::vector<std::size_t> stack{root};
  while (!stack.empty())
  {
    std::size_t c = stack.back();
    stack.pop_back();
    in[c] = true;
    for (auto ch : s.copies[c].children)
      stack.push_back(ch);
  }
  return in;
}

} // namespace

double component_diameter(const HierarchicalMetricSpace &space, std::size_t k)
{
  if (k > space.depth)
    throw Error("InvalidArgument", "level " + std::to_string(k) + " exceeds the depth");
  package::MultiIndex first;
  first.indices.assign(k, 1);
  std::size_t c = static_cast<std::size_t>(space.copy_index(first));
  auto allowed = subtree(space, c);
  std::size_t n = space.shell.size();

  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::size_t src = c * n + space.shell.outer_ports.front();
  double best = 0.0;
  for (int sweep = 0; sweep < 4; ++sweep)
  {
    auto dist = dijkstra(space, src, none, &allowed, false);
    std::size_t far = src;
    for (auto o : space.shell.outer_ports)
      if (dist[c * n + o] > dist[far])
        far = c * n + o;
    if (dist[far] <= best)
      break;
    best = dist[far];
    src = far;
  }
  return best;
}

double total_diameter(const HierarchicalMetricSpace &space)
{
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::size_t src = space.shell.outer_ports.front();
  double best = 0.0;
  for (int sweep = 0; sweep < 4; ++sweep)
  {
    auto dist = dijkstra(space, src, none);
    std::size_t far = src;
    for (std::size_t v = 0; v < dist.size(); ++v)
      if (std::isfinite(dist[v]) && dist[v] > dist[far])
        far = v;
    if (dist[far] <= best)
      break;
    best = dist[far];
    src = far;
  }
  return best;
}

} // namespace dsl::semmes
