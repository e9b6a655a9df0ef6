#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "dsl/error.hpp"
#include "dsl/modulus.hpp"
#include "modulus_oracle.hpp"

using namespace dsl;
using namespace dsl::modulus;

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

ModulusProblem unit_path(std::uint32_t j)
{
  ModulusProblem p;
  p.graph.vertex_count = j + 1;
  Member m;
  for (std::uint32_t i = 0; i < j; ++i)
  {
    p.graph.edges.push_back({i, i + 1, 1.0, 1.0});
    m.push_back(i);
  }
  p.family = ExplicitFamily{{m}};
  return p;
}

ModulusProblem ring(std::uint32_t n)
{
  ModulusProblem p;
  p.graph.vertex_count = n;
  for (std::uint32_t i = 0; i < n; ++i)
    p.graph.edges.push_back({i, (i + 1) % n, 1.0, 1.0});
  GatedCycleFamily::Component c;
  for (std::uint32_t g = 0; g < 4; ++g)
    c.gates.push_back({g * n / 4});
  p.family = GatedCycleFamily{{c}};
  return p;
}

ModulusProblem subfamily(const ModulusProblem &p, const std::vector<Member> &members)
{
  ModulusProblem q = p;
  q.family = ExplicitFamily{members};
  return q;
}

const std::vector<Member> &members_of(const ModulusProblem &p)
{
  return std::get<ExplicitFamily>(p.family).members;
}

} // namespace

TEST_CASE("disjoint single edges")
{
  ModulusProblem p;
  p.graph.vertex_count = 6;
  for (std::uint32_t i = 0; i < 3; ++i)
    p.graph.edges.push_back({2 * i, 2 * i + 1, 1.0, 1.0});
  p.family = ExplicitFamily{{{0}, {1}, {2}}};
  auto est = discrete_modulus(p);
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(3.0).epsilon(1e-9));
  for (double r : est.density)
    CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single path of unit edges")
{
  for (std::uint32_t j = 2; j <= 4; ++j)
  {
    auto p = unit_path(j);
    auto est = discrete_modulus(p);
    double expected = 1.0 / (j * j);
    CHECK(std::abs(est.value - expected) <= 1e-3 * expected);
    for (double r : est.density)
      CHECK(r == doctest::Approx(1.0 / j).epsilon(1e-6));
  }
}

TEST_CASE("path optimum matches a symmetric grid search")
{
  // rho_i = x for the two end edges, y elsewhere; scanned on a grid
  for (std::uint32_t j = 3; j <= 4; ++j)
  {
    double best = 1e9;
    for (int a = 1; a < 2000; ++a)
    {
      double x = a / 2000.0 / 2.0;
      double y = (1.0 - 2.0 * x) / (j - 2.0);
      if (y < 0)
        continue;
      best = std::min(best, 2 * x * x * x + (j - 2.0) * y * y * y);
    }
    auto est = discrete_modulus(unit_path(j));
    CHECK(std::abs(est.value - best) <= 1e-3 * best);
  }
}

TEST_CASE("errors")
{
  ModulusProblem p = unit_path(2);
  p.family = ExplicitFamily{};
  CHECK(error_kind([&] { discrete_modulus(p); }) == "EmptyFamily");
  p = unit_path(2);
  p.graph.edges[0].length = 0.0;
  CHECK(error_kind([&] { discrete_modulus(p); }) == "InvalidProblem");
  p = unit_path(2);
  p.family = ExplicitFamily{{{0, 7}}};
  CHECK(error_kind([&] { discrete_modulus(p); }) == "InvalidProblem");
  p = unit_path(2);
  p.family = ExplicitFamily{{{}}};
  CHECK(error_kind([&] { discrete_modulus(p); }) == "InvalidProblem");
  CHECK(error_kind([] { problem_from_json(nlohmann::json::parse(R"({"vertices":2})")); }) == "InvalidProblem");
}

TEST_CASE("not converged carries the best estimate")
{
  ModulusProblem p;
  std::uint32_t w = 6;
  p.graph.vertex_count = w * w;
  for (std::uint32_t y = 0; y < w; ++y)
    for (std::uint32_t x = 0; x < w; ++x)
    {
      std::uint32_t v = y * w + x;
      if (x + 1 < w)
        p.graph.edges.push_back({v, v + 1, 1.0, 1.0});
      if (y + 1 < w)
        p.graph.edges.push_back({v, v + w, 1.0, 1.0});
    }
  ConnectionFamily cf;
  for (std::uint32_t y = 0; y < w; ++y)
  {
    cf.sources.push_back(y * w);
    cf.targets.push_back(y * w + w - 1);
  }
  p.family = cf;
  Options o;
  o.max_iterations = 2;
  bool thrown = false;
  try
  {
    discrete_modulus(p, o);
  }
  catch (const NotConverged &e)
  {
    thrown = true;
    CHECK(e.kind() == "NotConverged");
    CHECK(std::isfinite(e.best().value));
    CHECK(e.best().iterations == 2);
  }
  CHECK(thrown);

  auto est = discrete_modulus(p);
  CHECK(est.converged);
  CHECK(est.value - est.lower_bound <= 1e-3 * est.value);
  // w straight rows are disjoint members, each of w - 1 unit edges
  CHECK(est.value >= w / std::pow(w - 1.0, 2.0) * (1 - 1e-3));
}

TEST_CASE("admissibility check")
{
  auto p = unit_path(3);
  std::vector<double> zero(3, 0.0);
  CHECK(admissibility_check(p.graph, zero, p.family) == 0.0);
  std::vector<double> flat(3, 1.0 / 3.0);
  CHECK(admissibility_check(p.graph, flat, p.family) == doctest::Approx(1.0).epsilon(1e-15));
  auto est = discrete_modulus(p);
  CHECK(admissibility_check(p.graph, est.density, p.family) >= 1.0 - 1e-4);
}

TEST_CASE("gated cycles on a ring")
{
  for (std::uint32_t n : {8u, 12u})
  {
    auto p = ring(n);
    auto sm = shortest_member(p.graph, std::vector<double>(n, 1.0), p.family);
    CHECK(sm.length == doctest::Approx(n));
    auto est = discrete_modulus(p);
    CHECK(est.value == doctest::Approx(1.0 / (n * n)).epsilon(1e-3));
  }
}

TEST_CASE("certificates are sound on random instances")
{
  std::mt19937_64 rng(17);
  for (int i = 0; i < 30; ++i)
  {
    auto p = oracle::random_instance(rng);
    auto est = discrete_modulus(p);
    CHECK(est.converged);
    CHECK(admissibility_check(p.graph, est.density, p.family) >= 1.0 - 1e-4);
    CHECK(energy(p.graph, est.density) == est.value);
    CHECK(est.lower_bound <= est.value);
  }
}

TEST_CASE("brute-force oracle agrees on the small fixtures")
{
  std::ifstream in(std::string(DSL_FIXTURE_DIR) + "/modulus_small.json");
  REQUIRE(in);
  auto j = nlohmann::json::parse(in);
  std::size_t count = 0;
  for (auto const &inst : j.at("instances"))
  {
    auto p = problem_from_json(inst.at("problem"));
    REQUIRE(p.graph.edges.size() <= 8);
    double solver = discrete_modulus(p).value;
    double brute = oracle::brute_force_modulus(p);
    CHECK(std::abs(solver - brute) <= 1e-3 * brute);
    if (inst.contains("expected"))
      CHECK(std::abs(solver - inst.at("expected").get<double>()) <= 1e-3 * solver);
    ++count;
  }
  CHECK(count >= 40);
}

TEST_CASE("monotonicity under subfamilies")
{
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i)
  {
    auto p = oracle::random_instance(rng, 8, 4);
    auto const &all = members_of(p);
    std::vector<Member> part;
    std::bernoulli_distribution keep(0.5);
    for (auto const &m : all)
      if (keep(rng))
        part.push_back(m);
    if (part.empty())
      part.push_back(all.front());
    double full = discrete_modulus(p).value;
    double sub = discrete_modulus(subfamily(p, part)).value;
    CHECK(sub <= full * (1 + 2e-3));
  }
}

TEST_CASE("subadditivity")
{
  std::mt19937_64 rng(29);
  for (int i = 0; i < 50; ++i)
  {
    auto p = oracle::random_instance(rng, 8, 4);
    auto const &all = members_of(p);
    std::vector<Member> a, b;
    std::bernoulli_distribution side(0.5);
    for (auto const &m : all)
      (side(rng) ? a : b).push_back(m);
    if (a.empty() || b.empty())
      continue;
    double whole = discrete_modulus(p).value;
    double sum = discrete_modulus(subfamily(p, a)).value + discrete_modulus(subfamily(p, b)).value;
    CHECK(whole <= sum * (1 + 3e-3));
  }
}

TEST_CASE("calibrated scaling leaves the modulus unchanged")
{
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i)
  {
    auto p = oracle::random_instance(rng);
    auto q = p;
    double s = 0.37;
    for (auto &e : q.graph.edges)
    {
      e.length *= s;
      e.volume *= s * s * s;
    }
    CHECK(discrete_modulus(q).value == doctest::Approx(discrete_modulus(p).value).epsilon(1e-9));
  }
}

TEST_CASE("json round trip")
{
  auto p = ring(8);
  auto q = problem_from_json(to_json(p));
  CHECK(to_json(q) == to_json(p));
  auto r = unit_path(3);
  CHECK(to_json(problem_from_json(to_json(r))) == to_json(r));
}

TEST_CASE("longitude families")
{
  auto bing = package::build_bing();
  auto space = semmes::assemble(bing, 0.4, 2);
  auto lp = longitude_family_problem(space, bing, 1, LongitudeMode::explicit_cores);
  CHECK(lp.components == 2);
  auto const &members = members_of(lp.problem);
  REQUIRE(members.size() == 1);
  // each component lies in one level-1 copy
  std::size_t template_edges = 0;
  for (auto const &e : lp.problem.graph.edges)
    if (e.u < space.shell.size() && e.v < space.shell.size())
      ++template_edges;
  std::map<std::size_t, std::size_t> counts;
  for (auto e : members.front())
    ++counts[e / template_edges];
  CHECK(counts.size() == 2);
  CHECK(counts.count(1) == 1);
  CHECK(counts.count(2) == 1);
  CHECK(counts[1] == counts[2]);

  CHECK(std::abs(lp.snapped_length / lp.curve_length - 1.0) <= 0.1);

  auto wh = package::build_whitehead();
  auto wspace = semmes::assemble(wh, 0.4, 1);
  CHECK(longitude_family_problem(wspace, wh, 0, LongitudeMode::explicit_cores).components == 1);
  CHECK(error_kind([&] { longitude_family_problem(wspace, wh, 2, LongitudeMode::explicit_cores); })
        == "InvalidArgument");
  CHECK(error_kind([] { longitude_mode_from_string("sideways"); }) == "InvalidArgument");
}

TEST_CASE("snapped longitude has the expected closed form")
{
  // one member of N edges of length l = lambda^k h and volume l^3 gives 1/N^2
  auto bing = package::build_bing();
  auto space = semmes::assemble(bing, 0.4, 1);
  auto lp = longitude_family_problem(space, bing, 1, LongitudeMode::explicit_cores);
  double n = static_cast<double>(members_of(lp.problem).front().size());
  CHECK(discrete_modulus(lp.problem).value == doctest::Approx(1.0 / (n * n)).epsilon(1e-9));
}

TEST_CASE("scaling experiment on bing")
{
  auto table = scaling_experiment(package::build_bing(), 0.4, 2, LongitudeMode::explicit_cores);
  REQUIRE(table.rows.size() == 3);
  for (std::size_t k = 1; k < table.rows.size(); ++k)
  {
    CHECK(table.rows[k].modulus <= table.rows[k - 1].modulus);
    CHECK(table.rows[k].ratio >= 0.1);
    CHECK(table.rows[k].ratio <= 1.0);
  }
  CHECK(table.rows.back().modulus >= 0.5 * std::pow(2.0, -4.0) * table.rows.front().modulus);
  CHECK(table.fitted_ratio >= 0.05);
  CHECK(table.fitted_ratio <= 1.0);

  std::ostringstream csv;
  write_csv(csv, table);
  CHECK(csv.str().rfind("k,modulus,ratio,iterations,converged\n", 0) == 0);
}

TEST_CASE("scaling experiment on whitehead stays in its envelope")
{
  auto table = scaling_experiment(package::build_whitehead(), 0.4, 2, LongitudeMode::explicit_cores);
  for (auto const &row : table.rows)
  {
    CHECK(row.modulus >= 0.2 * table.rows.front().modulus);
    CHECK(row.modulus <= 1.0 * table.rows.front().modulus * (1 + 1e-9));
  }
}
