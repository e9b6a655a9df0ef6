#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <random>

#include "dsl/error.hpp"
#include "dsl/semmes.hpp"

using namespace dsl;
using namespace dsl::semmes;
using package::MultiIndex;

namespace
{

std::string error_kind(const std::function<void()> &f)
{
  try
  {
    f();
  }
  catch (const Error &e)
  {
    return e.kind();
  }
  return "";
}

const HierarchicalMetricSpace &bing_space()
{
  static const HierarchicalMetricSpace s = assemble(package::build_bing(), 0.4, 3);
  return s;
}

// Plain Dijkstra over the bare shell (collar included) with one zero-length
// hub per child standing in for the limit leaves of a depth-0 space.
double bare_shell_distance(const ShellGraph &g, std::size_t a, std::size_t b)
{
  std::size_t n = g.size(), m = g.inner_ports.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n + m);
  for (std::size_t v = 0; v < n; ++v)
    for (auto u : g.neighbours[v])
      if (u >= 0)
        adj[v].push_back({static_cast<std::size_t>(u), g.h});
  for (std::size_t i = 0; i < m; ++i)
    for (auto p : g.inner_ports[i])
    {
      adj[p].push_back({n + i, 0.0});
      adj[n + i].push_back({p, 0.0});
    }
  std::vector<double> dist(n + m, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[a] = 0.0;
  pq.push({0.0, a});
  while (!pq.empty())
  {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v])
      continue;
    for (auto [u, w] : adj[v])
      if (d + w < dist[u])
      {
        dist[u] = d + w;
        pq.push({dist[u], u});
      }
  }
  return dist[b];
}

bool connected_without_collar(const ShellGraph &g)
{
  std::vector<bool> seen(g.size(), false);
  std::size_t start = 0;
  while (g.collar[start])
    ++start;
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty())
  {
    auto v = stack.back();
    stack.pop_back();
    for (auto u : g.neighbours[v])
      if (u >= 0 && !g.collar[u] && !seen[u])
      {
        seen[u] = true;
        stack.push_back(u);
      }
  }
  for (std::size_t v = 0; v < g.size(); ++v)
    if (!g.collar[v] && !seen[v])
      return false;
  return true;
}

PointRef random_voxel(const HierarchicalMetricSpace &s, std::mt19937_64 &rng)
{
  std::uniform_int_distribution<std::size_t> copy(0, s.copies.size() - 1);
  std::uniform_int_distribution<std::uint32_t> voxel(0, static_cast<std::uint32_t>(s.shell.size() - 1));
  for (;;)
  {
    auto const &c = s.copies[copy(rng)];
    auto v = voxel(rng);
    if (c.level == 0 || !s.shell.collar[v])
      return PointRef::voxel_of(c.address, v);
  }
}

} // namespace

TEST_CASE("bing shell graph at a quarter radius")
{
  auto pkg = package::build_bing();
  double h = pkg.parent().radius() / 4;
  auto g = build_shell_graph(pkg, h);
  CHECK(g.inner_ports.size() == 2);
  CHECK(connected_without_collar(g));
  CHECK_FALSE(g.outer_ports.empty());
  for (auto const &ports : g.inner_ports)
    CHECK_FALSE(ports.empty());
  bool unit_edges = true;
  for (std::size_t v = 0; v < g.size(); ++v)
    for (auto u : g.neighbours[v])
      if (u >= 0 && std::abs(geom::distance(g.positions[v], g.positions[u]) - h) > 1e-12)
        unit_edges = false;
  CHECK(unit_edges);
}

TEST_CASE("whitehead shell has one inner port set")
{
  auto pkg = package::build_whitehead();
  auto g = build_shell_graph(pkg, pkg.parent().radius() / 4);
  CHECK(g.inner_ports.size() == 1);
  CHECK(connected_without_collar(g));
}

TEST_CASE("coarse pitch is rejected")
{
  auto pkg = package::build_bing();
  CHECK(error_kind([&] { build_shell_graph(pkg, pkg.parent().radius() * 1.2); }) == "ShellDisconnected");
  CHECK(error_kind([&] { build_shell_graph(ball_fixture(), 1.5); }) == "ShellDisconnected");
}

TEST_CASE("copy counts and truncation leaves")
{
  auto const &s = bing_space();
  CHECK(s.copies.size() == 15);
  CHECK(s.leaf_count() == 16);
  auto k0 = assemble(package::build_bing(), 0.4, 0);
  CHECK(k0.copies.size() == 1);
  CHECK(k0.leaf_count() == 2);
  CHECK(s.copy_index(MultiIndex{{2, 1}}) == 5);
  CHECK(s.copies[5].level == 2);
}

TEST_CASE("edge lengths scale by lambda powers")
{
  auto const &s = bing_space();
  double h = s.shell.h;
  CHECK(s.edge_length(0) == h);
  CHECK(s.edge_length(1) == 0.4 * h);
  CHECK(s.edge_length(2) == (0.4 * 0.4) * h);
  CHECK(s.edge_length(3) == (0.4 * 0.4 * 0.4) * h);
}

TEST_CASE("gluing stays within one pitch")
{
  for (auto const &id : {"bing", "whitehead", "antoine4"})
  {
    auto s = assemble(package::builtin_package(id), 0.4, 1);
    CHECK(s.max_pairing_distance < s.shell.h);
    CHECK_FALSE(s.glue.empty());
  }
  CHECK(bing_space().unpaired_inner_ports == 0);
}

TEST_CASE("assemble argument checks")
{
  auto pkg = package::build_bing();
  CHECK(error_kind([&] { assemble(pkg, 1.0, 1); }) == "InvalidArgument");
  CHECK(error_kind([&] { assemble(pkg, 0.0, 1); }) == "InvalidArgument");
  CHECK(error_kind([&] { assemble(pkg, 0.4, 12); }) == "DepthTooLarge");
}

TEST_CASE("error bound formula")
{
  auto const &s = bing_space();
  CHECK(s.error_bound() == doctest::Approx(2 * s.diameter_of_shell * 0.064 / 0.6).epsilon(1e-12));
}

TEST_CASE("distance to itself is zero")
{
  auto const &s = bing_space();
  auto a = PointRef::voxel_of(MultiIndex{{1, 2}}, s.shell.outer_ports[3]);
  auto d = distance(s, a, a);
  CHECK(d.value == 0.0);
  CHECK(d.error_bound == s.error_bound());
}

TEST_CASE("depth zero distances match a bare shell search")
{
  auto pkg = package::build_bing();
  auto s = assemble(pkg, 0.4, 0);
  auto const &g = s.shell;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, g.outer_ports.size() - 1);
  for (int i = 0; i < 5; ++i)
  {
    auto a = g.outer_ports[pick(rng)], b = g.outer_ports[pick(rng)];
    auto d = distance(s, PointRef::voxel_of({}, a), PointRef::voxel_of({}, b));
    CHECK(d.value == doctest::Approx(bare_shell_distance(g, a, b)).epsilon(1e-12));
  }
}

TEST_CASE("metric axioms on samples")
{
  auto const &s = bing_space();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 12; ++i)
  {
    auto a = random_voxel(s, rng), b = random_voxel(s, rng), c = random_voxel(s, rng);
    double ab = distance(s, a, b).value, ba = distance(s, b, a).value;
    double bc = distance(s, b, c).value, ac = distance(s, a, c).value;
    CHECK(ab == ba);
    CHECK(ab > 0.0);
    CHECK(ac <= ab + bc);
  }
}

TEST_CASE("limit points")
{
  auto const &s = bing_space();
  auto outer = PointRef::voxel_of({}, s.shell.outer_ports.front());
  auto a = distance(s, outer, PointRef::limit_point(MultiIndex{{1}}));
  auto b = distance(s, outer, PointRef::limit_point(MultiIndex{{1, 1, 1, 1}}));
  CHECK(a.value == b.value);
  CHECK(a.value > 0.0);
  CHECK(distance(s, PointRef::limit_point(MultiIndex{{1, 2}}), PointRef::limit_point(MultiIndex{{1, 2, 1, 2}})).value
        == 0.0);
  CHECK(error_kind([&] { distance(s, outer, PointRef::limit_point(MultiIndex{{3}})); }) == "InvalidPointRef");
  CHECK(error_kind([&] { distance(s, outer, PointRef::limit_point({})); }) == "InvalidPointRef");
  CHECK(error_kind([&] { distance(s, outer, PointRef::voxel_of(MultiIndex{{1, 1, 1, 1}}, 0)); })
        == "InvalidPointRef");
  CHECK(error_kind([&] { distance(s, outer, PointRef::voxel_of({}, 1u << 30)); }) == "InvalidPointRef");
}

TEST_CASE("point reference json")
{
  auto r = point_ref_from_json(nlohmann::json::parse(R"({"address":[2,1],"voxel":7})"));
  CHECK_FALSE(r.limit);
  CHECK(r.str() == "voxel:2,1:7");
  auto l = point_ref_from_json(nlohmann::json::parse(R"({"limit":[1,2]})"));
  CHECK(l.limit);
  CHECK(l.str() == "limit:1,2");
  CHECK(error_kind([] { point_ref_from_json(nlohmann::json::parse(R"({"address":[1]})")); }) == "InvalidPointRef");
}

TEST_CASE("deeper truncation stays within the error bound")
{
  auto pkg = package::build_bing();
  auto s4 = assemble(pkg, 0.4, 4);
  auto s5 = assemble(pkg, 0.4, 5);
  auto outer = PointRef::voxel_of({}, s4.shell.outer_ports.front());
  for (auto const &addr : {MultiIndex{{1}}, MultiIndex{{2, 1}}})
  {
    auto leaf = PointRef::limit_point(addr);
    auto d4 = distance(s4, outer, leaf), d5 = distance(s5, outer, leaf);
    CHECK(std::abs(d4.value - d5.value) < d4.error_bound);
  }

  auto s2 = assemble(pkg, 0.4, 2);
  auto const &s3 = bing_space();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 6; ++i)
  {
    auto a = random_voxel(s2, rng), b = random_voxel(s2, rng);
    CHECK(std::abs(distance(s2, a, b).value - distance(s3, a, b).value) <= s2.error_bound());
  }
}

TEST_CASE("ball fixture is self-similar up to mesh error")
{
  auto ball = ball_fixture();
  double h = 0.25;
  auto coarse = assemble(ball, 0.4, 3, h);
  double l_coarse = verify_self_similarity(coarse, 40, 1);
  CHECK(l_coarse >= 1.0);
  CHECK(l_coarse <= 1.0 + 4 * h / coarse.diameter_of_shell);

  auto fine = assemble(ball, 0.4, 3, h / 2);
  double l_fine = verify_self_similarity(fine, 40, 1);
  CHECK(l_fine >= 1.0);
  CHECK(l_fine <= l_coarse * 1.05);
}

TEST_CASE("self-similarity on built-ins")
{
  double l = verify_self_similarity(bing_space(), 10, 2);
  CHECK(l >= 1.0);
  CHECK(std::isfinite(l));
  CHECK(error_kind([] { verify_self_similarity(assemble(package::build_bing(), 0.4, 1), 4, 1); })
        == "InvalidArgument");
}

TEST_CASE("component diameters shrink by about lambda per level")
{
  auto const &s = bing_space();
  std::vector<double> d;
  for (std::size_t k = 0; k <= s.depth; ++k)
    d.push_back(component_diameter(s, k));
  CHECK(d.back() >= 0.0);
  for (std::size_t k = 0; k + 1 < d.size(); ++k)
  {
    CHECK(d[k + 1] < d[k]);
    CHECK(d[k + 1] / d[k] >= 0.2);
    CHECK(d[k + 1] / d[k] <= 0.8);
  }
  CHECK(error_kind([&] { component_diameter(s, 4); }) == "InvalidArgument");
}

TEST_CASE("total diameter is bounded")
{
  auto const &s = bing_space();
  double total = total_diameter(s);
  CHECK(std::isfinite(total));
  CHECK(total <= s.diameter_of_shell * (1 + 2 * 0.4 / 0.6) + 4 * s.shell.h);
}
