#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "curves.hpp"
#include "dsl/error.hpp"
#include "dsl/package.hpp"

using namespace dsl;
using namespace dsl::package;

namespace
{

int oracle_lk(const geom::PolyCycle &a, const geom::PolyCycle &b)
{
  return static_cast<int>(std::lround(testcurves::gauss_midpoint(a, b, 2)));
}

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

} // namespace

TEST_CASE("built-in package sizes")
{
  CHECK(build_whitehead().m() == 1);
  CHECK(build_bing().m() == 2);
  CHECK(build_antoine(8).m() == 8);
  CHECK(build_antoine(3).m() == 3);
  CHECK(build_whitehead().contractible_children());
  CHECK(build_bing().contractible_children());
  CHECK(error_kind([] { build_antoine(2); }) == "TooFewTori");
  CHECK(error_kind([] { builtin_package("trefoil"); }) == "UnknownPackage");
}

TEST_CASE("whitehead child is null-homologous in the parent tube")
{
  auto pkg = build_whitehead();
  auto child = realize(pkg, MultiIndex{{1}}).tube.core();
  CHECK(geom::linking_number(child, pkg.parent().core()) == 0);
  CHECK(oracle_lk(child, pkg.parent().core()) == 0);
}

TEST_CASE("bing components are unlinked from each other and the core")
{
  auto pkg = build_bing();
  auto a = realize(pkg, MultiIndex{{1}}).tube.core();
  auto b = realize(pkg, MultiIndex{{2}}).tube.core();
  // Parallel copy of the core near the boundary, clear of both rings.
  std::vector<geom::Point3> pts;
  for (int i = 0; i < 200; ++i)
    pts.push_back(pkg.parent().point({i / 200.0, 0.3, 0.9}));
  geom::PolyCycle parallel(pts, "parallel");
  CHECK(geom::linking_number(a, b) == 0);
  CHECK(geom::linking_number(a, parallel) == 0);
  CHECK(geom::linking_number(b, parallel) == 0);
  CHECK(oracle_lk(a, b) == 0);
}

TEST_CASE("antoine necklace links consecutive tori only")
{
  for (int m : {3, 4, 5, 8})
  {
    CAPTURE(m);
    auto pkg = build_antoine(m);
    std::vector<geom::PolyCycle> cores;
    for (int i = 1; i <= m; ++i)
      cores.push_back(realize(pkg, MultiIndex{{i}}).tube.core());
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
      {
        CAPTURE(i);
        CAPTURE(j);
        bool consecutive = j == i + 1 || (i == 0 && j == m - 1);
        int lk = geom::linking_number(cores[i], cores[j]);
        CHECK(std::abs(lk) == (consecutive ? 1 : 0));
        CHECK(oracle_lk(cores[i], cores[j]) == lk);
      }
  }
}

TEST_CASE("realize with the empty address returns the parent")
{
  auto pkg = build_bing();
  auto lr = realize(pkg, MultiIndex{});
  CHECK(lr.tube.core().vertices() == pkg.parent().core().vertices());
  CHECK(lr.tube.radius() == pkg.parent().radius());
  CHECK(error_kind([&] { realize(pkg, MultiIndex{{3}}); }) == "InvalidAddress");
  CHECK(error_kind([&] { realize(pkg, MultiIndex{{0}}); }) == "InvalidAddress");
}

TEST_CASE("level components are lexicographic and capped")
{
  auto bing = build_bing();
  auto l2 = level_components(bing, 2);
  REQUIRE(l2.size() == 4);
  CHECK(l2[0].indices == std::vector<int>{1, 1});
  CHECK(l2[1].indices == std::vector<int>{1, 2});
  CHECK(l2[2].indices == std::vector<int>{2, 1});
  CHECK(l2[3].indices == std::vector<int>{2, 2});
  CHECK(level_components(bing, 3).size() == 8);
  CHECK(level_components(bing, 0).size() == 1);
  auto w5 = level_components(build_whitehead(), 5);
  REQUIRE(w5.size() == 1);
  CHECK(w5[0].indices == std::vector<int>{1, 1, 1, 1, 1});
  CHECK(error_kind([&] { level_components(bing, 13); }) == "LevelTooLarge");
  CHECK(level_components(bing, 12).size() == 4096);
}

TEST_CASE("multi-index text form")
{
  CHECK(MultiIndex::parse("1,2,1").indices == std::vector<int>{1, 2, 1});
  CHECK(MultiIndex::parse("[2, 1]").indices == std::vector<int>{2, 1});
  CHECK(MultiIndex::parse("").indices.empty());
  CHECK(MultiIndex{{1, 2}}.str() == "1,2");
  CHECK(error_kind([] { MultiIndex::parse("1,x"); }) == "InvalidAddress");
}

TEST_CASE("nesting, disjointness and diameter decay up to level 4")
{
  for (auto const &pkg : {build_whitehead(), build_bing(), build_antoine(4)})
  {
    CAPTURE(pkg.id());
    std::size_t depth = pkg.m() > 2 ? 3 : 4;
    std::vector<LevelRealization> prev{{MultiIndex{}, pkg.parent()}};
    double prev_diam = pkg.parent().diameter();
    for (std::size_t k = 1; k <= depth; ++k)
    {
      CAPTURE(k);
      auto level = realize_level(pkg, k);
      REQUIRE(level.size() == prev.size() * pkg.m());
      double diam = 0.0;
      for (std::size_t i = 0; i < level.size(); ++i)
      {
        auto const &host = prev[i / pkg.m()];
        CHECK(nested_inside(level[i].tube, host.tube));
        diam = std::max(diam, level[i].tube.diameter());
        if (i % pkg.m() != 0)
        {
          auto const &sib = level[i - 1].tube;
          CHECK(geom::min_distance(sib.core(), level[i].tube.core()) > sib.radius() + level[i].tube.radius());
        }
      }
      CHECK(diam < prev_diam);
      prev_diam = diam;
      prev = std::move(level);
    }
  }
}

TEST_CASE("whitehead level-2 tube is smaller than level 1")
{
  auto pkg = build_whitehead();
  CHECK(realize(pkg, MultiIndex{{1, 1}}).tube.diameter() < realize(pkg, MultiIndex{{1}}).tube.diameter());
}

TEST_CASE("realize_level agrees with realize")
{
  auto pkg = build_bing();
  auto level = realize_level(pkg, 2);
  for (auto const &lr : level)
    CHECK(realize(pkg, lr.address).tube.core().vertices() == lr.tube.core().vertices());
}

TEST_CASE("meridian disk of the parent")
{
  auto pkg = build_bing();
  auto md = meridian_disk(pkg);
  auto const &tube = pkg.parent();
  for (auto const &v : md.meridian.vertices())
    CHECK(std::abs(tube.distance_to_core(v) - tube.radius()) < 1e-9);
  CHECK(geom::count_disk_intersections(geom::OneCycle(tube.core()), md.disk) == 1);
  CHECK(std::abs(geom::linking_number(md.meridian, tube.core())) == 1);
  CHECK(std::abs(oracle_lk(md.meridian, tube.core())) == 1);
  CHECK(md.disk.triangles.size() == md.meridian.size());
}

TEST_CASE("canonical longitudes")
{
  auto bing = build_bing();
  auto md = meridian_disk(bing);
  CHECK(canonical_longitude(bing, 1).components.size() == 2);
  CHECK(geom::count_disk_intersections(canonical_longitude(bing, 1), md.disk) == 2);
  CHECK(geom::count_disk_intersections(canonical_longitude(bing, 2), md.disk) == 4);
  CHECK(geom::count_disk_intersections(canonical_longitude(bing, 3), md.disk) == 8);

  auto wh = build_whitehead();
  auto l0 = canonical_longitude(wh, 0);
  REQUIRE(l0.components.size() == 1);
  CHECK(l0.components[0].vertices() == wh.parent().core().vertices());
  auto wmd = meridian_disk(wh);
  CHECK(geom::count_disk_intersections(canonical_longitude(wh, 1), wmd.disk) == 2);
  CHECK(geom::count_disk_intersections(canonical_longitude(wh, 2), wmd.disk) == 4);
}

TEST_CASE("level k+1 longitude lies in the level-k tubes")
{
  for (auto const &pkg : {build_whitehead(), build_bing()})
    for (std::size_t k = 0; k < 3; ++k)
    {
      auto tubes = realize_level(pkg, k);
      for (auto const &comp : canonical_longitude(pkg, k + 1).components)
        for (auto const &v : comp.vertices())
        {
          bool inside = false;
          for (auto const &lr : tubes)
            inside = inside || lr.tube.distance_to_core(v) < lr.tube.radius();
          CHECK(inside);
        }
    }
}

TEST_CASE("json round trip reproduces realized geometry exactly")
{
  for (auto const &pkg : {build_whitehead(), build_bing(), build_antoine(5)})
  {
    auto back = package_from_json(nlohmann::json::parse(to_json(pkg).dump()));
    CHECK(back.id() == pkg.id());
    CHECK(back.m() == pkg.m());
    for (auto const &lr : realize_level(pkg, 2))
      CHECK(realize(back, lr.address).tube.core().vertices() == lr.tube.core().vertices());
  }
}

TEST_CASE("custom packages are validated")
{
  auto j = to_json(build_bing());
  auto overlap = j;
  overlap["children"][1] = overlap["children"][0];
  CHECK(error_kind([&] { package_from_json(overlap); }) == "InvalidPackage");

  auto outside = j;
  outside["children"][0]["radius_fraction"] = 0.6;
  CHECK(error_kind([&] { package_from_json(outside); }) == "InvalidPackage");

  auto far = j;
  far["children"][0]["pattern"][0] = {0.0, 1.2, 0.0};
  CHECK(error_kind([&] { package_from_json(far); }) == "InvalidPackage");

  auto thin = j;
  thin["parent"]["radius"] = 2.0;
  CHECK(error_kind([&] { package_from_json(thin); }) == "InvalidPackage");

  CHECK(error_kind([] { package_from_json(nlohmann::json{{"genus", 1}}); }) == "InvalidPackage");
}

TEST_CASE("rigid motions carry realized geometry along")
{
  auto pkg = build_bing();
  auto motion = geom::RigidMotion::about_axis({0.3, -1.0, 0.7}, 1.1, {2.0, -0.5, 4.0});
  auto moved = transformed(pkg, motion);
  for (auto const &lr : realize_level(pkg, 2))
  {
    auto const &a = lr.tube.core().vertices();
    auto moved_tube = realize(moved, lr.address).tube;
    auto const &b = moved_tube.core().vertices();
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, geom::distance(motion.apply(a[i]), b[i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("tube offsets keep their distance from the core on straight runs")
{
  auto tube = build_whitehead().parent();
  for (double t : {0.01, 0.25, 0.55, 0.77})
    for (auto [a, b] : {std::pair{0.3, 0.2}, {-0.5, 0.1}, {0.0, -0.6}})
      CHECK(tube.distance_to_core(tube.point({t, a, b})) == doctest::Approx(std::hypot(a, b) * tube.radius()));
}

TEST_CASE("level cap comes from the environment")
{
  auto bing = build_bing();
  ::setenv("DSL_LEVEL_CAP", "8", 1);
  CHECK(level_components(bing, 3).size() == 8);
  CHECK(error_kind([&] { level_components(bing, 4); }) == "LevelTooLarge");
  ::setenv("DSL_LEVEL_CAP", "abc", 1);
  CHECK(error_kind([] { level_cap(); }) == "InvalidArgument");
  ::unsetenv("DSL_LEVEL_CAP");
  CHECK(level_cap() == 4096);
}

TEST_CASE("tube coordinates invert the map on straight runs")
{
  auto tube = build_bing().parent();
  for (double t : {0.01, 0.25, 0.55, 0.77})
    for (auto [a, b] : {std::pair{0.3, 0.2}, {-0.5, 0.1}, {0.0, -0.6}})
    {
      auto c = tube.coords(tube.point({t, a, b}));
      CHECK(c.t == doctest::Approx(t).epsilon(1e-9));
      CHECK(c.a == doctest::Approx(a).epsilon(1e-9));
      CHECK(c.b == doctest::Approx(b).epsilon(1e-9));
    }
}
