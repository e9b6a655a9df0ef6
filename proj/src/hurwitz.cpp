#include "dsl/hurwitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace dsl::hurwitz
{

using nlohmann::json;

bool Permutation::is_bijection() const
{
  std::vector<bool> seen(images.size(), false);
  for (int v : images)
  {
    if (v < 1 || static_cast<std::size_t>(v) > images.size() || seen[static_cast<std::size_t>(v - 1)])
      return false;
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
  return true;
}

Permutation Permutation::identity(std::size_t n)
{
  Permutation p;
  p.images.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    p.images[i] = static_cast<int>(i + 1);
  return p;
}

Permutation Permutation::cycle(std::size_t n, const std::vector<int> &elements)
{
  Permutation p = identity(n);
  for (std::size_t i = 0; i < elements.size(); ++i)
    p.images[static_cast<std::size_t>(elements[i] - 1)] = elements[(i + 1) % elements.size()];
  return p;
}

Permutation Permutation::inverse() const
{
  Permutation p;
  p.images.resize(images.size());
  for (std::size_t i = 0; i < images.size(); ++i)
    p.images[static_cast<std::size_t>(images[i] - 1)] = static_cast<int>(i + 1);
  return p;
}

namespace
{

std::vector<std::vector<int>> cycles(const Permutation &p)
{
  std::vector<std::vector<int>> out;
  std::vector<bool> seen(p.degree(), false);
  for (std::size_t s = 0; s < p.degree(); ++s)
  {
    if (seen[s])
      continue;
    std::vector<int> c;
    for (std::size_t i = s; !seen[i]; i = static_cast<std::size_t>(p.images[i] - 1))
    {
      seen[i] = true;
      c.push_back(static_cast<int>(i + 1));
    }
    out.push_back(std::move(c));
  }
  return out;
}

} // namespace

std::vector<int> Permutation::cycle_type() const
{
  std::vector<int> t;
  for (auto const &c : cycles(*this))
    t.push_back(static_cast<int>(c.size()));
  std::sort(t.rbegin(), t.rend());
  return t;
}

std::size_t Permutation::cycle_count() const
{ return cycles(*this).size(); }

std::string Permutation::str() const
{
  std::string s;
  for (auto const &c : cycles(*this))
  {
    if (c.size() < 2)
      continue;
    s += "(";
    for (std::size_t i = 0; i < c.size(); ++i)
      s += (i ? " " : "") + std::to_string(c[i]);
    s += ")";
  }
  return s.empty() ? "()" : s;
}

Permutation then(const Permutation &a, const Permutation &b)
{
  Permutation p;
  p.images.resize(a.degree());
  for (std::size_t i = 0; i < a.degree(); ++i)
    p.images[i] = b.images[static_cast<std::size_t>(a.images[i] - 1)];
  return p;
}

BranchData build_branch_data(int genus, int n)
{
  if (n < 2)
    throw Error("DegreeTooSmall", "branch data needs degree >= 2, got " + std::to_string(n));
  if (genus < 0)
    throw Error("InvalidArgument", "genus must be >= 0, got " + std::to_string(genus));
  auto deg = static_cast<std::size_t>(n);
  std::vector<int> all(deg);
  for (std::size_t i = 0; i < deg; ++i)
    all[i] = static_cast<int>(i + 1);
  BranchData data;
  data.degree = deg;
  data.permutations.push_back(Permutation::cycle(deg, all));
  data.permutations.push_back(data.permutations[0].inverse());
  for (int i = 0; i < 2 * genus; ++i)
    data.permutations.push_back(Permutation::cycle(deg, {1, 2}));
  return data;
}

bool BranchReport::ok() const
{
  return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.passed; });
}

std::vector<std::string> BranchReport::failed() const
{
  std::vector<std::string> out;
  for (auto const &c : checks)
    if (!c.passed)
      out.push_back(c.name);
  return out;
}

BranchReport verify_branch_data(const BranchData &data)
{
  BranchReport r;
  std::string bad;
  for (std::size_t i = 0; i < data.permutations.size() && bad.empty(); ++i)
    if (data.permutations[i].degree() != data.degree || !data.permutations[i].is_bijection())
      bad = "rho(x_" + std::to_string(i + 1) + ") is not a permutation of 1.." + std::to_string(data.degree);
  if (data.degree == 0)
    bad = "degree is 0";
  bool perms_ok = bad.empty();
  r.checks.push_back({"permutations", perms_ok, bad});
  r.checks.push_back({"branch_count", !data.permutations.empty(),
                      data.permutations.empty() ? "no branch points" : ""});
  if (!perms_ok)
  {
    r.checks.push_back({"product", false, "skipped: malformed permutations"});
    r.checks.push_back({"transitive", false, "skipped: malformed permutations"});
    return r;
  }
  for (auto const &p : data.permutations)
    r.local_degrees.push_back(p.cycle_type());

  Permutation prod = Permutation::identity(data.degree);
  for (auto const &p : data.permutations)
    prod = then(prod, p);
  bool unit = prod == Permutation::identity(data.degree);
  r.checks.push_back({"product", unit, unit ? "" : "product is " + prod.str()});

  // orbit of 1 under the generated group
  std::vector<bool> reached(data.degree, false);
  std::vector<std::size_t> stack{0};
  reached[0] = true;
  std::size_t count = 1;
  while (!stack.empty())
  {
    auto at = stack.back();
    stack.pop_back();
    for (auto const &p : data.permutations)
    {
      auto next = static_cast<std::size_t>(p.images[at] - 1);
      if (!reached[next])
      {
        reached[next] = true;
        ++count;
        stack.push_back(next);
      }
    }
  }
  bool transitive = count == data.degree;
  r.checks.push_back({"transitive", transitive,
                      transitive ? "" : "orbit of 1 has " + std::to_string(count) + " of "
                                          + std::to_string(data.degree) + " points"});
  return r;
}

CoverEuler euler_characteristic_of_cover(const BranchData &data)
{
  auto report = verify_branch_data(data);
  for (auto const &c : report.checks)
    if ((c.name == "permutations" || c.name == "branch_count") && !c.passed)
      throw Error("InvalidBranchData", c.detail);
  long long chi = static_cast<long long>(data.degree) * (2 - static_cast<long long>(data.branch_count()));
  for (auto const &p : data.permutations)
    chi += static_cast<long long>(p.cycle_count());
  if (chi % 2 != 0)
    throw Error("OddEuler", "Euler characteristic " + std::to_string(chi) + " is odd");
  return {static_cast<int>(chi), static_cast<int>((2 - chi) / 2)};
}

namespace
{

std::string idx(int a, int b)
{ return std::to_string(a) + "," + std::to_string(b); }

} // namespace

ExtensionPlan extension_plan(int p, int n, const std::vector<int> &boundary_degrees)
{
  if (n == 2)
    throw Error("DegreeTwoObstruction",
                "degree-2 boundary covers need not extend (Fox: no 2-fold branched cover T^3 -> S^3)");
  if (n < 3)
    throw Error("DegreeTooSmall", "extension needs degree >= 3, got " + std::to_string(n));
  if (p < 2)
    throw Error("InvalidArgument", "need p >= 2 boundary components, got " + std::to_string(p));
  if (boundary_degrees.size() != static_cast<std::size_t>(p))
    throw Error("InvalidArgument", "expected " + std::to_string(p) + " boundary degrees, got "
                                     + std::to_string(boundary_degrees.size()));
  for (std::size_t j = 0; j < boundary_degrees.size(); ++j)
    if (boundary_degrees[j] != n)
      throw Error("DegreeMismatch", "boundary M_" + std::to_string(j) + " has degree "
                                      + std::to_string(boundary_degrees[j]) + ", expected " + std::to_string(n));

  ExtensionPlan plan;
  plan.p = p;
  plan.degree = n;
  plan.boundary_degrees = boundary_degrees;
  if (p == 2)
  {
    plan.records.push_back("p = 2: phi_0 and phi_1 extend to W -> W' by the Berstein-Edmonds theorem");
    return plan;
  }
  for (int j = 1; j <= p - 2; ++j)
  {
    std::string v = "V_" + std::to_string(j);
    plan.targets.push_back({j, v, "E_" + std::to_string(j), "E'_" + std::to_string(j + 1)});
    for (int i = 1; i <= n; ++i)
    {
      std::string u = "U_{" + idx(j, i) + "}";
      std::string d = "D_{" + idx(j, i) + "}";
      std::string dp = "D'_{" + idx(j + 1, i) + "}";
      plan.tubes.push_back({j, i, u, d, dp, j, j + 1});
      std::string map = "beta_" + std::to_string(j) + " o alpha_{" + idx(j, i) + "}^-1";
      plan.compatibility.push_back({u, v, d, j, map + " | " + d + " = phi_" + std::to_string(j) + " | " + d});
      plan.compatibility.push_back(
        {u, v, dp, j + 1, map + " | " + dp + " = phi_" + std::to_string(j + 1) + " | " + dp});
    }
  }
  plan.records.push_back("E_j, E'_j on dB_j (j = 1.." + std::to_string(p - 1)
                         + ") contain no branch values; D_{j,i}, D'_{j,i} are their n preimages");
  plan.records.push_back("Phi = phi_j on M_j and beta_j o alpha_{j,i}^-1 on U_{j,i}");
  plan.records.push_back("W \\ Q -> W' \\ Q' has two 2-sphere boundary components over S^2 x [0,1]; "
                         "extend by the Berstein-Edmonds theorem");
  return plan;
}

ExtensionPlan extension_plan(int p, int n, const std::vector<BranchData> &boundary_data)
{
  std::vector<int> degrees;
  for (auto const &d : boundary_data)
    degrees.push_back(static_cast<int>(d.degree));
  return extension_plan(p, n, degrees);
}

std::vector<std::string> validate_plan(const ExtensionPlan &plan)
{
  std::vector<std::string> fail;
  int p = plan.p, n = plan.degree;
  if (p < 2)
    fail.push_back("p < 2");
  if (n < 3)
    fail.push_back("degree < 3");
  if (plan.boundary_degrees.size() != static_cast<std::size_t>(std::max(p, 0)))
    fail.push_back("boundary degree count differs from p");
  for (int d : plan.boundary_degrees)
    if (d != n)
    {
      fail.push_back("boundary degree differs from plan degree");
      break;
    }
  std::size_t expect = p >= 3 ? static_cast<std::size_t>(p - 2) * static_cast<std::size_t>(std::max(n, 0)) : 0;
  if (plan.tubes.size() != expect)
    fail.push_back("tube count " + std::to_string(plan.tubes.size()) + " != " + std::to_string(expect));
  if (plan.targets.size() != (p >= 3 ? static_cast<std::size_t>(p - 2) : 0))
    fail.push_back("target tube count differs from p - 2");
  if (plan.compatibility.size() != 2 * plan.tubes.size())
    fail.push_back("expected two compatibility records per tube");
  if (p == 2 && plan.records.empty())
    fail.push_back("missing base-case record");

  std::set<std::string> labels, disks;
  for (auto const &t : plan.tubes)
  {
    if (!labels.insert(t.label).second)
      fail.push_back("duplicate tube label " + t.label);
    if (!disks.insert(t.source_disk).second || !disks.insert(t.target_disk).second)
      fail.push_back("disk used twice by " + t.label);
    if (t.target_boundary != t.source_boundary + 1 || t.j < 1 || t.j > p - 2 || t.i < 1 || t.i > n)
      fail.push_back("tube " + t.label + " has bad indices");
  }
  for (auto const &t : plan.targets)
    if (!labels.insert(t.label).second)
      fail.push_back("duplicate tube label " + t.label);

  // each junction M_j -> M_{j+1} carries n tubes
  for (int j = 1; j <= p - 2; ++j)
  {
    auto c = std::count_if(plan.tubes.begin(), plan.tubes.end(), [&](const SourceTube &t) {
      return t.source_boundary == j && t.target_boundary == j + 1;
    });
    if (c != n)
      fail.push_back("junction M_" + std::to_string(j) + " -> M_" + std::to_string(j + 1) + " has "
                     + std::to_string(c) + " tubes");
  }
  return fail;
}

std::string to_string(Feasibility f)
{
  switch (f)
  {
  case Feasibility::feasible:
    return "feasible";
  case Feasibility::infeasible:
    return "infeasible";
  default:
    return "unknown";
  }
}

namespace
{

Feasibility feasibility_from_string(const std::string &s)
{
  if (s == "feasible")
    return Feasibility::feasible;
  if (s == "infeasible")
    return Feasibility::infeasible;
  if (s == "unknown")
    return Feasibility::unknown;
  throw Error("InvalidPlan", "unknown feasibility '" + s + "'");
}

double min_separation(const std::vector<package::Point3> &pts)
{
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b)
      best = std::min(best, geom::distance(pts[a], pts[b]));
  return best;
}

} // namespace

BallPacking pack_balls(std::size_t m, double radius)
{
  if (m == 0 || !(radius > 0.0) || !(radius < 1.0))
    throw Error("InvalidArgument", "need m >= 1 and radius in (0,1)");
  BallPacking out;
  out.m = m;
  out.radius = radius;
  double R = 1.0 - radius;

  std::vector<package::Point3> ring, fib;
  for (std::size_t i = 0; i < m; ++i)
  {
    double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
    ring.push_back({R * std::cos(a), R * std::sin(a), 0.0});
    double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(m);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double b = static_cast<double>(i) * std::numbers::pi * (3.0 - std::sqrt(5.0));
    fib.push_back({R * r * std::cos(b), R * r * std::sin(b), R * z});
  }
  double sr = min_separation(ring), sf = min_separation(fib);
  if (sf > sr)
  {
    out.centers = fib;
    out.min_separation = sf;
  }
  else
  {
    out.centers = ring;
    out.min_separation = sr;
  }
  if (static_cast<double>(m) * radius * radius * radius > 1.0)
    out.feasibility = Feasibility::infeasible;
  else if (out.min_separation > 2.0 * radius)
    out.feasibility = Feasibility::feasible;
  else
    out.feasibility = Feasibility::unknown;
  return out;
}

HrPlan heinonen_rickman_plan(const package::InitialPackage &pkg, int n, double lambda,
                             std::optional<std::size_t> max_level)
{
  if (n < 3)
    throw Error("DegreeTooSmall", "BLD extension needs degree >= 3, got " + std::to_string(n));
  if (!(lambda > 0.0 && lambda < 1.0))
    throw Error("InvalidArgument", "lambda must lie in (0,1)");
  auto m = pkg.m();
  if (static_cast<double>(m) * lambda * lambda * lambda > 1.0)
    throw Error("LambdaInfeasible", std::to_string(m) + " disjoint balls of radius " + std::to_string(lambda)
                                      + " exceed the unit ball's volume");
  HrPlan plan;
  plan.package_id = pkg.id();
  plan.lambda = lambda;
  plan.degree = n;
  plan.boundary_data = build_branch_data(pkg.genus(), n);
  plan.target = pack_balls(m, lambda);

  std::size_t cap = package::level_cap();
  std::size_t count = 1;
  for (std::size_t k = 0; !max_level || k <= *max_level; ++k)
  {
    if (count > cap)
      break;
    for (auto const &addr : package::level_components(pkg, k))
      plan.levels.push_back({k, addr.str(), std::pow(lambda, static_cast<double>(k))});
    if (count > cap / m)
      break;
    count *= m;
  }
  plan.shell = extension_plan(static_cast<int>(m) + 1, n, std::vector<int>(m + 1, n));
  plan.shell.records.push_back("shell L_0 \\ int L_1: outer sphere M_0 and " + std::to_string(m)
                               + " inner spheres around the target balls");
  return plan;
}

json to_json(const Permutation &perm)
{ return perm.images; }

json to_json(const BranchData &data)
{
  json perms = json::array();
  json cyc = json::array();
  for (auto const &p : data.permutations)
  {
    perms.push_back(to_json(p));
    cyc.push_back(p.str());
  }
  return {{"degree", data.degree},
          {"branch_count", data.branch_count()},
          {"permutations", perms},
          {"cycles", cyc}};
}

json to_json(const BranchReport &report)
{
  json checks = json::array();
  for (auto const &c : report.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return {{"ok", report.ok()}, {"checks", checks}, {"local_degrees", report.local_degrees}};
}

json to_json(const ExtensionPlan &plan)
{
  json tubes = json::array(), targets = json::array(), compat = json::array();
  for (auto const &t : plan.tubes)
    tubes.push_back({{"j", t.j},
                     {"i", t.i},
                     {"label", t.label},
                     {"source_disk", t.source_disk},
                     {"target_disk", t.target_disk},
                     {"source_boundary", t.source_boundary},
                     {"target_boundary", t.target_boundary}});
  for (auto const &t : plan.targets)
    targets.push_back({{"j", t.j}, {"label", t.label}, {"source_disk", t.source_disk}, {"target_disk", t.target_disk}});
  for (auto const &c : plan.compatibility)
    compat.push_back({{"tube", c.tube},
                      {"target", c.target},
                      {"disk", c.disk},
                      {"boundary", c.boundary},
                      {"equation", c.equation}});
  return {{"p", plan.p},
          {"degree", plan.degree},
          {"boundary_degrees", plan.boundary_degrees},
          {"tubes", tubes},
          {"targets", targets},
          {"compatibility", compat},
          {"records", plan.records}};
}

json to_json(const BallPacking &packing)
{
  json centers = json::array();
  for (auto const &c : packing.centers)
    centers.push_back({c.x, c.y, c.z});
  json sep = std::isfinite(packing.min_separation) ? json(packing.min_separation) : json(nullptr);
  return {{"m", packing.m},
          {"radius", packing.radius},
          {"centers", centers},
          {"min_separation", sep},
          {"feasibility", to_string(packing.feasibility)}};
}

json to_json(const HrPlan &plan)
{
  json levels = json::array();
  for (auto const &l : plan.levels)
    levels.push_back({{"level", l.level}, {"address", l.address}, {"scale", l.scale}});
  return {{"package_id", plan.package_id},
          {"lambda", plan.lambda},
          {"degree", plan.degree},
          {"boundary_data", to_json(plan.boundary_data)},
          {"target", to_json(plan.target)},
          {"levels", levels},
          {"shell", to_json(plan.shell)}};
}

BranchData branch_data_from_json(const json &j)
{
  try
  {
    BranchData data;
    data.degree = j.at("degree").get<std::size_t>();
    for (auto const &p : j.at("permutations"))
      data.permutations.push_back(Permutation{p.get<std::vector<int>>()});
    if (j.contains("branch_count") && j.at("branch_count").get<std::size_t>() != data.branch_count())
      throw Error("InvalidBranchData", "branch_count disagrees with the permutation list");
    return data;
  }
  catch (const json::exception &e)
  {
    throw Error("InvalidBranchData", e.what());
  }
}

ExtensionPlan extension_plan_from_json(const json &j)
{
  try
  {
    ExtensionPlan plan;
    plan.p = j.at("p").get<int>();
    plan.degree = j.at("degree").get<int>();
    plan.boundary_degrees = j.at("boundary_degrees").get<std::vector<int>>();
    for (auto const &t : j.at("tubes"))
      plan.tubes.push_back({t.at("j").get<int>(), t.at("i").get<int>(), t.at("label").get<std::string>(),
                            t.at("source_disk").get<std::string>(), t.at("target_disk").get<std::string>(),
                            t.at("source_boundary").get<int>(), t.at("target_boundary").get<int>()});
    for (auto const &t : j.at("targets"))
      plan.targets.push_back({t.at("j").get<int>(), t.at("label").get<std::string>(),
                              t.at("source_disk").get<std::string>(), t.at("target_disk").get<std::string>()});
    for (auto const &c : j.at("compatibility"))
      plan.compatibility.push_back({c.at("tube").get<std::string>(), c.at("target").get<std::string>(),
                                    c.at("disk").get<std::string>(), c.at("boundary").get<int>(),
                                    c.at("equation").get<std::string>()});
    plan.records = j.at("records").get<std::vector<std::string>>();
    return plan;
  }
  catch (const json::exception &e)
  {
    throw Error("InvalidPlan", e.what());
  }
}

HrPlan hr_plan_from_json(const json &j)
{
  try
  {
    HrPlan plan;
    plan.package_id = j.at("package_id").get<std::string>();
    plan.lambda = j.at("lambda").get<double>();
    plan.degree = j.at("degree").get<int>();
    plan.boundary_data = branch_data_from_json(j.at("boundary_data"));
    auto const &t = j.at("target");
    plan.target.m = t.at("m").get<std::size_t>();
    plan.target.radius = t.at("radius").get<double>();
    for (auto const &c : t.at("centers"))
      plan.target.centers.push_back({c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()});
    plan.target.min_separation = t.at("min_separation").is_null() ? std::numeric_limits<double>::infinity()
                                                                    : t.at("min_separation").get<double>();
    plan.target.feasibility = feasibility_from_string(t.at("feasibility").get<std::string>());
    for (auto const &l : j.at("levels"))
      plan.levels.push_back(
        {l.at("level").get<std::size_t>(), l.at("address").get<std::string>(), l.at("scale").get<double>()});
    plan.shell = extension_plan_from_json(j.at("shell"));
    return plan;
  }
  catch (const json::exception &e)
  {
    throw Error("InvalidPlan", e.what());
  }
  catch (const Error &e)
  {
    if (e.kind() == "InvalidBranchData")
      throw Error("InvalidPlan", e.what());
    throw;
  }
}

} // namespace dsl::hurwitz
