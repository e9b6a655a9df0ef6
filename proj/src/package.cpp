#include "dsl/package.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "dsl/error.hpp"

namespace dsl::package
{

using geom::cross;
using geom::dot;
using geom::norm;
using geom::normalized;

namespace
{

double wrap01(double t)
{
  double w = t - std::floor(t);
  return w >= 1.0 ? 0.0 : w;
}

Point3 rotate_about(const Point3 &v, const Point3 &axis, double angle)
{
  double c = std::cos(angle), s = std::sin(angle);
  return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1.0 - c));
}

// Rotation taking unit vector from onto unit vector to with the smallest angle.
Point3 minimal_rotation(const Point3 &v, const Point3 &from, const Point3 &to)
{
  Point3 k = cross(from, to);
  double s = norm(k);
  if (s < 1e-15)
    return v;
  return rotate_about(v, k * (1.0 / s), std::atan2(s, dot(from, to)));
}

Point3 orthonormal_to(const Point3 &d, const Point3 &t)
{
  return normalized(d - t * dot(d, t));
}

} // namespace

TubeSpec::TubeSpec(PolyCycle core, double radius)
: _core(std::move(core)), _radius(radius)
{
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error("InvalidTube", "radius must be positive");
  std::size_t n = _core.size();
  if (n < 3)
    throw Error("InvalidTube", "core needs at least 3 vertices");

  std::vector<Point3> dirs(n);
  std::vector<double> s(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    auto [p, q] = _core.edge(i);
    double len = geom::distance(p, q);
    dirs[i] = (q - p) * (1.0 / len);
    s[i + 1] = s[i] + len;
  }
  _length = s[n];
  _params.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    _params[i] = s[i] / _length;

  _tangents.resize(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    Point3 sum = dirs[(i + n - 1) % n] + dirs[i];
    if (norm(sum) < 1e-9)
      throw Error("FrameDegeneracy", "core reverses direction at vertex " + std::to_string(i));
    _tangents[i] = normalized(sum);
  }

  Point3 centroid;
  for (auto const &v : _core.vertices())
    centroid += v;
  centroid *= 1.0 / static_cast<double>(n);
  Point3 d = centroid - _core[0];
  Point3 const &t0 = _tangents[0];
  if (norm(d - t0 * dot(d, t0)) < 1e-9 * _length)
  {
    // Straight-ish core through its own centroid: fall back to the coordinate
    // axis least aligned with the tangent.
    double ax = std::abs(t0.x), ay = std::abs(t0.y), az = std::abs(t0.z);
    d = ax <= ay && ax <= az ? Point3{1, 0, 0} : (ay <= az ? Point3{0, 1, 0} : Point3{0, 0, 1});
  }

  _normals.resize(n);
  _normals[0] = orthonormal_to(d, t0);
  for (std::size_t i = 0; i + 1 < n; ++i)
    _normals[i + 1] = orthonormal_to(minimal_rotation(_normals[i], _tangents[i], _tangents[i + 1]), _tangents[i + 1]);
  Point3 closing = orthonormal_to(minimal_rotation(_normals[n - 1], _tangents[n - 1], t0), t0);
  double holonomy = std::atan2(dot(cross(_normals[0], closing), t0), dot(_normals[0], closing));
  for (std::size_t i = 1; i < n; ++i)
    _normals[i] = orthonormal_to(rotate_about(_normals[i], _tangents[i], -holonomy * _params[i]), _tangents[i]);

  // Offsets towards the inside of a turn are stretched onto the intersection
  // of the adjacent edges' offset lines; outward offsets stay in the miter
  // plane so they keep their distance from the vertex.
  _inward.assign(n, Point3{});
  _stretch.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    Point3 bend = dirs[i] - dirs[(i + n - 1) % n];
    double len = norm(bend);
    if (len < 1e-12)
      continue;
    _inward[i] = bend * (1.0 / len);
    _stretch[i] = 1.0 / dot(dirs[i], _tangents[i]) - 1.0;
  }

  double clearance = self_clearance();
  if (!(clearance > 2.0 * _radius))
  {
    std::ostringstream msg;
    msg << "tube not embedded: clearance " << clearance << " <= 2 * radius " << 2.0 * _radius;
    throw Error("InvalidTube", msg.str());
  }
}

std::size_t TubeSpec::locate(double t, double &u) const
{
  t = wrap01(t);
  auto it = std::upper_bound(_params.begin(), _params.end(), t);
  std::size_t i = static_cast<std::size_t>(it - _params.begin()) - 1;
  double next = i + 1 < _params.size() ? _params[i + 1] : 1.0;
  u = std::clamp((t - _params[i]) / (next - _params[i]), 0.0, 1.0);
  return i;
}

Point3 TubeSpec::core_point(double t) const
{
  double u;
  std::size_t i = locate(t, u);
  auto [p, q] = _core.edge(i);
  return geom::lerp(p, q, u);
}

void TubeSpec::frame(double t, Point3 &tangent, Point3 &normal, Point3 &binormal) const
{
  double u;
  std::size_t i = locate(t, u);
  std::size_t j = (i + 1) % _core.size();
  tangent = normalized(geom::lerp(_tangents[i], _tangents[j], u));
  normal = orthonormal_to(geom::lerp(_normals[i], _normals[j], u), tangent);
  binormal = cross(tangent, normal);
}

Point3 TubeSpec::offset_at(std::size_t i, double a, double b) const
{
  Point3 w = _normals[i] * a + cross(_tangents[i], _normals[i]) * b;
  double in = dot(w, _inward[i]);
  if (in > 0.0)
    w += _inward[i] * (in * _stretch[i]);
  return _core[i] + w * _radius;
}

Point3 TubeSpec::point(const TubeCoords &c) const
{
  double u;
  std::size_t i = locate(c.t, u);
  return geom::lerp(offset_at(i, c.a, c.b), offset_at((i + 1) % _core.size(), c.a, c.b), u);
}

TubeCoords TubeSpec::coords(const Point3 &p) const
{
  auto near = geom::nearest_on_cycle(_core, p);
  double next = near.edge + 1 < _params.size() ? _params[near.edge + 1] : 1.0;
  double t = wrap01(_params[near.edge] + near.param * (next - _params[near.edge]));
  Point3 tan, n, b;
  frame(t, tan, n, b);
  Point3 d = p - core_point(t);
  return {t, dot(d, n) / _radius, dot(d, b) / _radius};
}

double TubeSpec::distance_to_core(const Point3 &p) const
{
  return geom::nearest_on_cycle(_core, p).distance;
}

double TubeSpec::diameter() const
{
  double best = 0.0;
  auto const &v = _core.vertices();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      best = std::max(best, geom::distance(v[i], v[j]));
  return best + 2.0 * _radius;
}

double TubeSpec::self_clearance() const
{
  std::size_t n = _core.size();
  double local = std::numbers::pi * _radius;
  std::vector<double> len(n);
  for (std::size_t i = 0; i < n; ++i)
    len[i] = geom::distance(_core[i], _core[(i + 1) % n]);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
  {
    double si = _params[i] * _length;
    for (std::size_t j = i + 1; j < n; ++j)
    {
      double sj = _params[j] * _length;
      double gap = std::min(sj - (si + len[i]), _length - (sj + len[j]) + si);
      if (gap <= local)
        continue;
      double lower = geom::distance(_core[i], _core[j]) - len[i] - len[j];
      if (lower >= best)
        continue;
      auto [a0, a1] = _core.edge(i);
      auto [b0, b1] = _core.edge(j);
      best = std::min(best, geom::segment_distance(a0, a1, b0, b1));
    }
  }
  return best;
}

bool nested_inside(const TubeSpec &inner, const TubeSpec &outer)
{
  for (auto const &v : inner.core().vertices())
    if (!(outer.distance_to_core(v) + inner.radius() < outer.radius()))
      return false;
  return true;
}

namespace
{

double turn_angle(const Point3 &a, const Point3 &b, const Point3 &c)
{
  Point3 u = normalized(b - a), v = normalized(c - b);
  return std::atan2(norm(cross(u, v)), dot(u, v));
}

// Drops duplicate and collinear vertices, then removes the straighter end of
// every edge shorter than min_edge. Short edges next to sharp turns would make
// inner offsets run backwards one level further down.
std::vector<Point3> simplify(std::vector<Point3> pts, double tol, double min_edge)
{
  std::vector<Point3> out;
  for (auto const &x : pts)
    if (out.empty() || geom::distance(out.back(), x) > tol)
      out.push_back(x);
  while (out.size() > 1 && geom::distance(out.back(), out.front()) <= tol)
    out.pop_back();

  auto turn = [&](std::size_t i) {
    std::size_t n = out.size();
    return turn_angle(out[(i + n - 1) % n], out[i], out[(i + 1) % n]);
  };
  bool changed = true;
  while (changed && out.size() > 3)
  {
    changed = false;
    for (std::size_t i = 0; i < out.size() && out.size() > 3; ++i)
      if (turn(i) < 1e-9)
      {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    for (std::size_t i = 0; i < out.size() && out.size() > 3; ++i)
    {
      std::size_t j = (i + 1) % out.size();
      if (geom::distance(out[i], out[j]) < min_edge)
      {
        std::size_t drop = turn(i) <= turn(j) ? i : j;
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(drop));
        changed = true;
        break;
      }
    }
  }
  return out;
}

} // namespace

TubeSpec embed(const TubeSpec &host, const ChildEmbedding &child, const std::string &label)
{
  auto const &pat = child.pattern;
  std::size_t np = pat.size();
  if (np < 3)
    throw Error("InvalidPackage", "pattern needs at least 3 samples");

  auto const &bps = host.breakpoints();
  std::vector<Point3> pts;
  std::vector<double> between;
  for (std::size_t j = 0; j < np; ++j)
  {
    TubeCoords const &p = pat[j];
    TubeCoords const &q = pat[(j + 1) % np];
    double t0 = wrap01(p.t);
    double dt = q.t - p.t;
    dt -= std::round(dt);
    pts.push_back(host.point({t0, p.a, p.b}));
    if (dt == 0.0)
      continue;

    // Host breakpoints strictly inside the step, in travel order.
    between.clear();
    double lo = std::min(t0, t0 + dt), hi = std::max(t0, t0 + dt);
    for (double shift : {-1.0, 0.0, 1.0})
      for (double bp : bps)
      {
        double tau = bp + shift;
        if (tau > lo + 1e-12 && tau < hi - 1e-12)
          between.push_back(tau);
      }
    std::sort(between.begin(), between.end());
    if (dt < 0.0)
      std::reverse(between.begin(), between.end());
    for (double tau : between)
    {
      double w = (tau - t0) / dt;
      pts.push_back(host.point({wrap01(tau), p.a + w * (q.a - p.a), p.b + w * (q.b - p.b)}));
    }
  }

  double radius = child.radius_fraction * host.radius();
  return TubeSpec(PolyCycle(simplify(std::move(pts), 1e-12 * host.core_length(), radius), label), radius);
}

std::string MultiIndex::str() const
{
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i)
  {
    if (i)
      out += ',';
    out += std::to_string(indices[i]);
  }
  return out;
}

MultiIndex MultiIndex::parse(const std::string &text)
{
  MultiIndex mi;
  std::string trimmed;
  for (char c : text)
    if (c != '[' && c != ']' && c != ' ')
      trimmed += c;
  if (trimmed.empty())
    return mi;
  std::stringstream ss(trimmed);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    std::size_t used = 0;
    int v = 0;
    try
    {
      v = std::stoi(item, &used);
    }
    catch (const std::exception &)
    {
      used = 0;
    }
    if (item.empty() || used != item.size())
      throw Error("InvalidAddress", "cannot parse address '" + text + "'");
    mi.indices.push_back(v);
  }
  return mi;
}

InitialPackage::InitialPackage(std::string id, int genus, TubeSpec parent, std::vector<ChildEmbedding> children)
: _id(std::move(id)), _genus(genus), _parent(std::move(parent)), _children(std::move(children))
{
  if (genus < 0)
    throw Error("InvalidPackage", "genus must be non-negative");
  if (_children.empty())
    throw Error("InvalidPackage", "package needs at least one child");

  std::vector<TubeSpec> level1;
  for (std::size_t i = 0; i < _children.size(); ++i)
  {
    auto const &c = _children[i];
    std::string which = "child " + std::to_string(i + 1);
    if (!(c.radius_fraction > 0.0 && c.radius_fraction < 1.0))
      throw Error("InvalidPackage", which + ": radius_fraction must lie in (0,1)");
    for (auto const &p : c.pattern)
      if (!std::isfinite(p.t) || !std::isfinite(p.a) || !std::isfinite(p.b) || std::hypot(p.a, p.b) >= 1.0)
        throw Error("InvalidPackage", which + ": pattern offsets must be finite with norm < 1");
    try
    {
      level1.push_back(embed(_parent, c, std::to_string(i + 1)));
    }
    catch (const Error &e)
    {
      throw Error("InvalidPackage", which + ": " + e.what());
    }
    if (!nested_inside(level1.back(), _parent))
      throw Error("InvalidPackage", which + " is not interior to the parent tube");
  }
  for (std::size_t i = 0; i < level1.size(); ++i)
    for (std::size_t j = i + 1; j < level1.size(); ++j)
      if (!(geom::min_distance(level1[i].core(), level1[j].core()) > level1[i].radius() + level1[j].radius()))
        throw Error("InvalidPackage",
                    "children " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " overlap");
}

bool InitialPackage::contractible_children() const
{
  return std::all_of(_children.begin(), _children.end(), [](auto const &c) { return c.contractible; });
}

namespace
{

constexpr double kParentRadius = 0.25;
constexpr double kStrandOffset = 0.55;
constexpr double kClaspOffset = 0.18;
constexpr double kChildFraction = 0.15;
constexpr int kStrandSamples = 27;
constexpr int kCapSamples = 5;

// Axis-aligned rounded square in the xy-plane, sampled uniformly by arclength
// starting at the middle of the bottom side and running counterclockwise.
PolyCycle rounded_square(double half, double corner, std::size_t n)
{
  double straight = 2.0 * (half - corner);
  double arc = std::numbers::pi / 2.0 * corner;
  double side = straight + arc;
  double total = 4.0 * side;
  double inner = half - corner;
  std::vector<Point3> pts;
  for (std::size_t j = 0; j < n; ++j)
  {
    // Shift by half a straight run so that s = 0 is the bottom midpoint.
    double s = std::fmod(static_cast<double>(j) * total / static_cast<double>(n) + straight / 2.0, total);
    int k = static_cast<int>(s / side);
    double r = s - k * side;
    double x, y;
    if (r < straight)
    {
      x = -inner + r;
      y = -half;
    }
    else
    {
      double ang = -std::numbers::pi / 2.0 + (r - straight) / corner;
      x = inner + corner * std::cos(ang);
      y = -inner + corner * std::sin(ang);
    }
    // Rotate the bottom-side template by k quarter turns.
    for (int q = 0; q < k; ++q)
    {
      double nx = -y, ny = x;
      x = nx;
      y = ny;
    }
    pts.push_back({x, y, 0.0});
  }
  return PolyCycle(std::move(pts), "parent");
}

TubeSpec default_parent()
{
  return TubeSpec(rounded_square(1.5, 0.6, 128), kParentRadius);
}

using Offset = std::pair<double, double>;

void add_strand(std::vector<TubeCoords> &out, double t0, double t1, const std::function<Offset(double)> &ab)
{
  for (int i = 0; i < kStrandSamples; ++i)
  {
    double t = t0 + (t1 - t0) * i / (kStrandSamples - 1);
    auto [a, b] = ab(t);
    out.push_back({wrap01(t), a, b});
  }
}

// Straight cap across the tube at fixed t, interior samples only.
void add_cap(std::vector<TubeCoords> &out, double t, Offset from, Offset to)
{
  for (int i = 1; i <= kCapSamples; ++i)
  {
    double w = static_cast<double>(i) / (kCapSamples + 1);
    out.push_back({wrap01(t), from.first + w * (to.first - from.first), from.second + w * (to.second - from.second)});
  }
}

// Ring running forward along one strand and back along the other, joined by
// two caps.
ChildEmbedding ring(double t0, double t1, const std::function<Offset(double)> &fwd,
                    const std::function<Offset(double)> &back)
{
  ChildEmbedding c;
  c.radius_fraction = kChildFraction;
  c.contractible = true;
  add_strand(c.pattern, t0, t1, fwd);
  add_cap(c.pattern, t1, fwd(t1), back(t1));
  add_strand(c.pattern, t1, t0, back);
  add_cap(c.pattern, t0, back(t0), fwd(t0));
  return c;
}

ChildEmbedding straight_ring(double t0, double t1, Offset p, Offset q)
{
  return ring(t0, t1, [p](double) { return p; }, [q](double) { return q; });
}

} // namespace

InitialPackage build_whitehead()
{
  // One ring whose strands start in the a = const plane and rotate a quarter
  // turn while the whole pair drifts, so that each cap passes between the
  // strands at the other end: a single clasp.
  auto twist = [](double t, double sign) -> Offset {
    double s = std::clamp((t - 0.3) / 0.4, 0.0, 1.0);
    double theta = std::numbers::pi / 2.0 * (1.0 - s);
    return {sign * kStrandOffset * std::cos(theta) - kClaspOffset * (1.0 - s),
            sign * kStrandOffset * std::sin(theta) + kClaspOffset * s};
  };
  ChildEmbedding c = ring(
    -0.1, 1.1, [&](double t) { return twist(t, 1.0); }, [&](double t) { return twist(t, -1.0); });
  return InitialPackage("whitehead", 1, default_parent(), {c});
}

InitialPackage build_bing()
{
  // Two flat rings in perpendicular planes whose t-ranges overlap at both ends,
  // so each cap passes between the other ring's strands.
  constexpr double offset = 0.6;
  ChildEmbedding a = straight_ring(-0.08, 0.58, {offset, 0.0}, {-offset, 0.0});
  ChildEmbedding b = straight_ring(0.42, 1.08, {0.0, offset}, {0.0, -offset});
  return InitialPackage("bing", 1, default_parent(), {a, b});
}

InitialPackage build_antoine(int m)
{
  if (m < 3)
    throw Error("TooFewTori", "an Antoine necklace needs at least 3 tori, got " + std::to_string(m));
  std::vector<ChildEmbedding> children;
  double half = 0.6 / m;
  for (int j = 0; j < m; ++j)
  {
    double psi = (j % 2 == 0) ? 0.0 : std::numbers::pi / 2.0;
    if (m % 2 == 1 && j == m - 1)
      psi = std::numbers::pi / 4.0;
    Offset p{kStrandOffset * std::cos(psi), kStrandOffset * std::sin(psi)};
    Offset q{-p.first, -p.second};
    double tc = (j + 0.5) / m;
    children.push_back(straight_ring(tc - half, tc + half, p, q));
  }
  return InitialPackage("antoine" + std::to_string(m), 1, default_parent(), std::move(children));
}

InitialPackage builtin_package(const std::string &id)
{
  if (id == "whitehead")
    return build_whitehead();
  if (id == "bing")
    return build_bing();
  if (id.rfind("antoine", 0) == 0)
  {
    std::string rest = id.substr(7);
    if (rest.empty())
      return build_antoine(8);
    if (std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })
        && rest.size() < 6)
      return build_antoine(std::stoi(rest));
  }
  throw Error("UnknownPackage", "no built-in package named '" + id + "'");
}

std::size_t level_cap()
{
  const char *env = std::getenv("DSL_LEVEL_CAP");
  if (!env || !*env)
    return 4096;
  char *end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || v == 0 || env[0] == '-')
    throw Error("InvalidArgument", std::string("DSL_LEVEL_CAP must be a positive integer, got '") + env + "'");
  return static_cast<std::size_t>(v);
}

namespace
{

std::size_t checked_count(const InitialPackage &pkg, std::size_t k)
{
  std::size_t cap = level_cap();
  std::size_t count = 1;
  for (std::size_t i = 0; i < k; ++i)
  {
    if (count > cap / pkg.m())
      throw Error("LevelTooLarge", std::to_string(pkg.m()) + "^" + std::to_string(k) + " exceeds the level cap "
                                     + std::to_string(cap));
    count *= pkg.m();
  }
  return count;
}

} // namespace

LevelRealization realize(const InitialPackage &pkg, const MultiIndex &address)
{
  for (int i : address.indices)
    if (i < 1 || static_cast<std::size_t>(i) > pkg.m())
      throw Error("InvalidAddress", "entry " + std::to_string(i) + " outside 1.." + std::to_string(pkg.m()));
  TubeSpec tube = pkg.parent();
  MultiIndex prefix;
  for (int i : address.indices)
  {
    prefix.indices.push_back(i);
    tube = embed(tube, pkg.children()[static_cast<std::size_t>(i - 1)], prefix.str());
  }
  return {address, std::move(tube)};
}

std::vector<LevelRealization> realize_level(const InitialPackage &pkg, std::size_t k)
{
  checked_count(pkg, k);
  std::vector<LevelRealization> level{{MultiIndex{}, pkg.parent()}};
  for (std::size_t d = 0; d < k; ++d)
  {
    std::vector<LevelRealization> next;
    next.reserve(level.size() * pkg.m());
    for (auto const &host : level)
      for (std::size_t i = 0; i < pkg.m(); ++i)
      {
        MultiIndex addr = host.address;
        addr.indices.push_back(static_cast<int>(i + 1));
        next.push_back({addr, embed(host.tube, pkg.children()[i], addr.str())});
      }
    level = std::move(next);
  }
  return level;
}

std::vector<MultiIndex> level_components(const InitialPackage &pkg, std::size_t k)
{
  std::size_t count = checked_count(pkg, k);
  std::vector<MultiIndex> out;
  out.reserve(count);
  MultiIndex cur;
  cur.indices.assign(k, 1);
  for (std::size_t n = 0; n < count; ++n)
  {
    out.push_back(cur);
    for (std::size_t pos = k; pos-- > 0;)
    {
      if (static_cast<std::size_t>(cur.indices[pos]) < pkg.m())
      {
        ++cur.indices[pos];
        break;
      }
      cur.indices[pos] = 1;
    }
  }
  return out;
}

MeridianDisk meridian_disk(const InitialPackage &pkg)
{
  TubeSpec const &tube = pkg.parent();
  auto const &bps = tube.breakpoints();
  std::size_t i = static_cast<std::size_t>(std::upper_bound(bps.begin(), bps.end(), 0.25) - bps.begin()) - 1;
  double next = i + 1 < bps.size() ? bps[i + 1] : 1.0;
  double t = 0.5 * (bps[i] + next);

  // Cross-section perpendicular to the edge itself, so the circle sits on the
  // tube boundary exactly.
  auto [e0, e1] = tube.core().edge(i);
  Point3 tan, n, b;
  tube.frame(t, tan, n, b);
  tan = normalized(e1 - e0);
  n = orthonormal_to(n, tan);
  b = cross(tan, n);
  Point3 c = tube.core_point(t);
  double r = tube.radius();
  constexpr std::size_t kSides = 64;
  std::vector<Point3> pts;
  for (std::size_t j = 0; j < kSides; ++j)
  {
    double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / kSides;
    pts.push_back(c + (n * std::cos(phi) + b * std::sin(phi)) * r);
  }
  PolyCycle meridian(std::move(pts), "meridian");
  // Apex off the core so the core crosses a triangle interior, not a spoke.
  Point3 apex = c + (n * 0.1372 + b * 0.0713) * r;
  geom::TriangulatedDisk disk = geom::cone_disk(meridian, apex);
  return {std::move(meridian), std::move(disk), t};
}

geom::OneCycle canonical_longitude(const InitialPackage &pkg, std::size_t k)
{
  std::vector<PolyCycle> comps;
  for (auto &lr : realize_level(pkg, k))
    comps.push_back(lr.tube.core());
  geom::OneCycle sigma(std::move(comps));
  MeridianDisk md = meridian_disk(pkg);
  if (geom::count_disk_intersections(sigma, md.disk) < 1)
    throw Error("LongitudeCheckFailed", "level-" + std::to_string(k) + " cores miss the canonical meridian disk");
  return sigma;
}

InitialPackage transformed(const InitialPackage &pkg, const geom::RigidMotion &motion)
{
  TubeSpec parent(geom::transformed(pkg.parent().core(), motion), pkg.parent().radius());
  return InitialPackage(pkg.id(), pkg.genus(), std::move(parent), pkg.children());
}

nlohmann::json to_json(const InitialPackage &pkg)
{
  nlohmann::json children = nlohmann::json::array();
  for (auto const &c : pkg.children())
  {
    nlohmann::json pat = nlohmann::json::array();
    for (auto const &p : c.pattern)
      pat.push_back({p.t, p.a, p.b});
    children.push_back({{"pattern", pat}, {"radius_fraction", c.radius_fraction}, {"contractible", c.contractible}});
  }
  return {{"id", pkg.id()},
          {"genus", pkg.genus()},
          {"parent", {{"core", geom::points_to_json(pkg.parent().core().vertices())}, {"radius", pkg.parent().radius()}}},
          {"children", children}};
}

InitialPackage package_from_json(const nlohmann::json &j, const std::string &fallback_id)
{
  try
  {
    std::string id = j.contains("id") ? j.at("id").get<std::string>() : fallback_id;
    int genus = j.at("genus").get<int>();
    auto const &pj = j.at("parent");
    TubeSpec parent(PolyCycle(geom::points_from_json(pj.at("core")), "parent"), pj.at("radius").get<double>());
    std::vector<ChildEmbedding> children;
    for (auto const &cj : j.at("children"))
    {
      ChildEmbedding c;
      for (auto const &p : cj.at("pattern"))
      {
        if (!p.is_array() || p.size() != 3)
          throw Error("InvalidPackage", "pattern samples must be [t, a, b]");
        c.pattern.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
      }
      c.radius_fraction = cj.at("radius_fraction").get<double>();
      c.contractible = cj.value("contractible", true);
      children.push_back(std::move(c));
    }
    return InitialPackage(std::move(id), genus, std::move(parent), std::move(children));
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error("InvalidPackage", std::string("malformed descriptor: ") + e.what());
  }
  catch (const Error &e)
  {
    if (e.kind() == "InvalidPackage")
      throw;
    throw Error("InvalidPackage", e.what());
  }
}

nlohmann::json to_json(const TubeSpec &tube)
{
  return {{"label", tube.core().label()},
          {"core", geom::points_to_json(tube.core().vertices())},
          {"radius", tube.radius()}};
}

} // namespace dsl::package
