// Regenerates the JSON fixtures under fixtures/: small modulus instances,
// a package descriptor, a metric pair list and link fixture curves. Output is deterministic.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "dsl/modulus.hpp"
#include "dsl/package.hpp"
#include "dsl/semmes.hpp"
#include "modulus_oracle.hpp"

using namespace dsl;
using nlohmann::json;

namespace
{

modulus::ModulusProblem unit_path(std::uint32_t j)
{
  modulus::ModulusProblem p;
  p.graph.vertex_count = j + 1;
  modulus::Member m;
  for (std::uint32_t i = 0; i < j; ++i)
  {
    p.graph.edges.push_back({i, i + 1, 1.0, 1.0});
    m.push_back(i);
  }
  p.family = modulus::ExplicitFamily{{m}};
  return p;
}

modulus::ModulusProblem parallel_edges(std::uint32_t n)
{
  modulus::ModulusProblem p;
  p.graph.vertex_count = 2 * n;
  modulus::ExplicitFamily f;
  for (std::uint32_t i = 0; i < n; ++i)
  {
    p.graph.edges.push_back({2 * i, 2 * i + 1, 1.0, 1.0});
    f.members.push_back({i});
  }
  p.family = f;
  return p;
}

void write(const std::filesystem::path &path, const json &j)
{
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  std::cout << "wrote " << path.string() << '\n';
}

} // namespace

int main(int argc, char **argv)
{
  std::filesystem::path dir = argc > 1 ? argv[1] : "fixtures";
  std::filesystem::create_directories(dir);

  json instances = json::array();
  instances.push_back({{"name", "parallel3"}, {"expected", 3.0}, {"problem", modulus::to_json(parallel_edges(3))}});
  for (std::uint32_t j = 2; j <= 4; ++j)
    instances.push_back({{"name", "path" + std::to_string(j)},
                         {"expected", 1.0 / (j * j)},
                         {"problem", modulus::to_json(unit_path(j))}});
  std::mt19937_64 rng(20240501);
  for (int i = 0; i < 40; ++i)
    instances.push_back({{"name", "random" + std::to_string(i)}, {"problem", modulus::to_json(oracle::random_instance(rng))}});
  write(dir / "modulus_small.json", {{"instances", instances}});

  auto bing = package::build_bing();
  auto desc = package::to_json(bing);
  desc["id"] = "bing-descriptor";
  write(dir / "bing_descriptor.json", desc);

  auto shell = semmes::build_shell_graph(bing, bing.parent().radius() / 4);
  json pairs = json::array();
  pairs.push_back({{"a", {{"address", json::array()}, {"voxel", shell.outer_ports.front()}}},
                   {"b", {{"address", json::array()}, {"voxel", shell.outer_ports.back()}}}});
  pairs.push_back({{"a", {{"address", json::array()}, {"voxel", shell.outer_ports.front()}}}, {"b", {{"limit", {1}}}}});
  pairs.push_back({{"a", {{"address", {1}}, {"voxel", shell.inner_ports[1].front()}}}, {"b", {{"limit", {2, 1}}}}});
  pairs.push_back({{"a", {{"limit", {1, 2}}}}, {"b", {{"limit", {2, 1}}}}});
  write(dir / "bing_pairs.json", pairs);

  // curve pairs {"label", "vertices"}
  auto curves = dir / "curves";
  std::filesystem::create_directories(curves);
  auto ring = [](geom::Point3 c, geom::Point3 e1, geom::Point3 e2, const std::string &label) {
    std::vector<geom::Point3> pts;
    for (int i = 0; i < 64; ++i)
    {
      double a = 2.0 * std::numbers::pi * i / 64.0;
      pts.push_back(c + e1 * std::cos(a) + e2 * std::sin(a));
    }
    return geom::PolyCycle(pts, label);
  };
  write(curves / "hopf_a.json", geom::to_json(ring({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, "hopf_a")));
  write(curves / "hopf_b.json", geom::to_json(ring({1, 0, 0}, {1, 0, 0}, {0, 0, 1}, "hopf_b")));
  write(curves / "unlink_a.json", geom::to_json(geom::PolyCycle({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, "unlink_a")));
  write(curves / "unlink_b.json",
        geom::to_json(geom::PolyCycle({{0, 0, 2}, {1, 0, 2}, {1, 1, 2}, {0, 1, 2}}, "unlink_b")));

  // Whitehead link: the clasped child core and a meridian of the host tube
  auto wh = package::build_whitehead();
  auto core = package::realize(wh, package::MultiIndex{{1}}).tube.core();
  write(curves / "whitehead_a.json", geom::to_json(geom::PolyCycle(core.vertices(), "whitehead_a")));
  write(curves / "whitehead_b.json",
        geom::to_json(geom::PolyCycle(package::meridian_disk(wh).meridian.vertices(), "whitehead_b")));

  write(curves / "torus_core.json", geom::to_json(geom::PolyCycle(bing.parent().core().vertices(), "torus_core")));
  write(curves / "torus_meridian.json",
        geom::to_json(geom::PolyCycle(package::meridian_disk(bing).meridian.vertices(), "torus_meridian")));
}
