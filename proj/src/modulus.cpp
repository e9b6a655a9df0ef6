#include "dsl/modulus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace dsl::modulus
{

NotConverged::NotConverged(std::size_t iterations, ModulusEstimate best)
: Error("NotConverged", "no convergence after " + std::to_string(iterations) + " sweeps, best value "
                          + std::to_string(best.value)),
  _best(std::move(best))
{}

namespace
{

using geom::Point3;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Csr
{
  std::vector<std::size_t> start;
  std::vector<std::uint32_t> to;
  std::vector<std::uint32_t> edge;
};

Csr make_csr(const Graph &g)
{
  Csr c;
  c.start.assign(g.vertex_count + 1, 0);
  for (auto const &e : g.edges)
  {
    ++c.start[e.u + 1];
    ++c.start[e.v + 1];
  }
  for (std::size_t v = 0; v < g.vertex_count; ++v)
    c.start[v + 1] += c.start[v];
  c.to.resize(c.start.back());
  c.edge.resize(c.start.back());
  std::vector<std::size_t> fill(c.start.begin(), c.start.end() - 1);
  for (std::uint32_t i = 0; i < g.edges.size(); ++i)
  {
    auto const &e = g.edges[i];
    c.to[fill[e.u]] = e.v;
    c.edge[fill[e.u]++] = i;
    c.to[fill[e.v]] = e.u;
    c.edge[fill[e.v]++] = i;
  }
  return c;
}

double member_length(const Graph &g, const std::vector<double> &rho, const Member &m)
{
  double s = 0.0;
  for (auto e : m)
    s += g.edges[e].length * rho[e];
  return s;
}

// Layered Dijkstra: states (layer, vertex); entering layer j + 1 is free at a
// vertex flagged in gate_of[j + 1]. Returns the walk's edges in order.
ShortestMember layered_search(const Graph &g, const Csr &csr, const std::vector<double> &rho,
                              const std::vector<std::vector<bool>> &layer_gate, const std::vector<bool> &start,
                              const std::vector<bool> &allowed)
{
  std::size_t n = g.vertex_count, layers = layer_gate.size() + 1;
  std::vector<double> dist(layers * n, kInf);
  std::vector<std::int64_t> prev_state(layers * n, -1);
  std::vector<std::int64_t> prev_edge(layers * n, -1);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  auto ok = [&](std::size_t v) { return allowed.empty() || allowed[v]; };

  for (std::size_t v = 0; v < n; ++v)
    if (start[v] && ok(v))
    {
      dist[v] = 0.0;
      pq.push({0.0, v});
    }
  std::int64_t goal = -1;
  while (!pq.empty())
  {
    auto [d, s] = pq.top();
    pq.pop();
    if (d > dist[s])
      continue;
    std::size_t layer = s / n, v = s % n;
    if (layer + 1 == layers)
    {
      goal = static_cast<std::int64_t>(s);
      break;
    }
    if (layer_gate[layer][v])
    {
      std::size_t t = s + n;
      if (d < dist[t])
      {
        dist[t] = d;
        prev_state[t] = static_cast<std::int64_t>(s);
        prev_edge[t] = -1;
        pq.push({d, t});
      }
    }
    for (std::size_t k = csr.start[v]; k < csr.start[v + 1]; ++k)
    {
      std::size_t u = csr.to[k];
      if (!ok(u))
        continue;
      std::uint32_t e = csr.edge[k];
      double nd = d + g.edges[e].length * rho[e];
      std::size_t t = layer * n + u;
      if (nd < dist[t])
      {
        dist[t] = nd;
        prev_state[t] = static_cast<std::int64_t>(s);
        prev_edge[t] = e;
        pq.push({nd, t});
      }
    }
  }
  if (goal < 0)
    throw Error("EmptyFamily", "no walk satisfies the family constraints");
  Member walk;
  for (std::int64_t s = goal; prev_state[static_cast<std::size_t>(s)] >= 0; s = prev_state[static_cast<std::size_t>(s)])
    if (prev_edge[static_cast<std::size_t>(s)] >= 0)
      walk.push_back(static_cast<std::uint32_t>(prev_edge[static_cast<std::size_t>(s)]));
  std::reverse(walk.begin(), walk.end());
  return {dist[static_cast<std::size_t>(goal)], walk};
}

std::vector<bool> flags(std::size_t n, const std::vector<std::uint32_t> &ids)
{
  std::vector<bool> f(n, false);
  for (auto v : ids)
    f[v] = true;
  return f;
}

ShortestMember shortest(const Graph &g, const Csr &csr, const std::vector<double> &rho, const Family &family)
{
  if (auto const *ex = std::get_if<ExplicitFamily>(&family))
  {
    ShortestMember best{kInf, {}};
    for (auto const &m : ex->members)
    {
      double len = member_length(g, rho, m);
      if (len < best.length)
        best = {len, m};
    }
    return best;
  }
  if (auto const *cf = std::get_if<ConnectionFamily>(&family))
    return layered_search(g, csr, rho, {flags(g.vertex_count, cf->targets)}, flags(g.vertex_count, cf->sources), {});

  auto const &gc = std::get<GatedCycleFamily>(family);
  ShortestMember total{0.0, {}};
  for (auto const &comp : gc.components)
  {
    std::vector<std::vector<bool>> layer_gate;
    for (std::size_t j = 1; j < comp.gates.size(); ++j)
      layer_gate.push_back(flags(g.vertex_count, comp.gates[j]));
    auto first = flags(g.vertex_count, comp.gates[0]);
    layer_gate.push_back(first);
    auto part = layered_search(g, csr, rho, layer_gate, first, comp.allowed);
    total.length += part.length;
    total.member.insert(total.member.end(), part.member.begin(), part.member.end());
  }
  return total;
}

// One constraint sum_e a_e rho_e >= 1 with duplicate edges merged.
struct Row
{
  std::vector<std::uint32_t> edge;
  std::vector<double> coeff;
};

Row make_row(const Graph &g, Member m)
{
  std::sort(m.begin(), m.end());
  Row r;
  for (auto e : m)
  {
    if (!r.edge.empty() && r.edge.back() == e)
      r.coeff.back() += g.edges[e].length;
    else
    {
      r.edge.push_back(e);
      r.coeff.push_back(g.edges[e].length);
    }
  }
  return r;
}

// Dual of min sum v rho^3 s.t. A rho >= 1: for multipliers mu >= 0 the
// minimiser is rho_e = sqrt(F_e / (3 v_e)) with F = A^T mu, and the dual value
// is sum(mu) - 2 sum v rho^3.
class DualState
{
public:
  explicit DualState(const Graph &g)
  : _g(g), _flow(g.edges.size(), 0.0), rho(g.edges.size(), 0.0)
  {}

  std::vector<Row> rows;
  std::vector<double> mu;

  void add(Row r)
  {
    rows.push_back(std::move(r));
    mu.push_back(0.0);
  }

  // Exact maximisation of the dual along coordinate i.
  void step(std::size_t i)
  {
    Row const &r = rows[i];
    std::size_t len = r.edge.size();
    _base.resize(len);
    _scale.resize(len);
    for (std::size_t k = 0; k < len; ++k)
    {
      auto e = r.edge[k];
      _base[k] = std::max(0.0, _flow[e] - r.coeff[k] * mu[i]);
      _scale[k] = 1.0 / (3.0 * _g.edges[e].volume);
    }
    auto phi = [&](double t, double &deriv) {
      double s = 0.0;
      deriv = 0.0;
      for (std::size_t k = 0; k < len; ++k)
      {
        double f = _base[k] + r.coeff[k] * t;
        double root = std::sqrt(f * _scale[k]);
        s += r.coeff[k] * root;
        if (root > 0.0)
          deriv += r.coeff[k] * r.coeff[k] * _scale[k] / (2.0 * root);
      }
      return s;
    };
    double d;
    double t = 0.0;
    if (phi(0.0, d) < 1.0)
    {
      double c = 0.0;
      for (std::size_t k = 0; k < len; ++k)
        c += r.coeff[k] * std::sqrt(r.coeff[k] * _scale[k]);
      double lo = 0.0, hi = 1.0 / (c * c);
      t = hi;
      for (int it = 0; it < 200; ++it)
      {
        double v = phi(t, d) - 1.0;
        if (v < 0.0)
          lo = t;
        else
          hi = t;
        if (std::abs(v) <= 1e-15 || hi - lo <= 1e-16 * hi)
          break;
        double next = d > 0.0 ? t - v / d : 0.5 * (lo + hi);
        t = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
      }
    }
    mu[i] = t;
    for (std::size_t k = 0; k < len; ++k)
    {
      auto e = r.edge[k];
      _flow[e] = _base[k] + r.coeff[k] * t;
      rho[e] = std::sqrt(_flow[e] * _scale[k]);
    }
  }

  double dual_value() const
  {
    double s = 0.0;
    for (double m : mu)
      s += m;
    return s - 2.0 * energy(_g, rho);
  }

  double min_row_length() const
  {
    double best = kInf;
    for (auto const &r : rows)
    {
      double s = 0.0;
      for (std::size_t k = 0; k < r.edge.size(); ++k)
        s += r.coeff[k] * rho[r.edge[k]];
      best = std::min(best, s);
    }
    return best;
  }

private:
  const Graph &_g;
  std::vector<double> _flow;
  std::vector<double> _base;
  std::vector<double> _scale;

public:
  std::vector<double> rho;
};

std::vector<double> scaled(const std::vector<double> &rho, double length)
{
  std::vector<double> out(rho.size());
  for (std::size_t e = 0; e < rho.size(); ++e)
    out[e] = rho[e] / length;
  return out;
}

} // namespace

void validate(const ModulusProblem &p)
{
  auto const &g = p.graph;
  for (auto const &e : g.edges)
  {
    if (e.u >= g.vertex_count || e.v >= g.vertex_count)
      throw Error("InvalidProblem", "edge endpoint out of range");
    if (!(e.length > 0.0) || !(e.volume > 0.0))
      throw Error("InvalidProblem", "edge lengths and volumes must be positive");
  }
  auto check_vertices = [&](const std::vector<std::uint32_t> &ids) {
    if (ids.empty())
      throw Error("EmptyFamily", "empty vertex set");
    for (auto v : ids)
      if (v >= g.vertex_count)
        throw Error("InvalidProblem", "vertex " + std::to_string(v) + " out of range");
  };
  if (auto const *ex = std::get_if<ExplicitFamily>(&p.family))
  {
    if (ex->members.empty())
      throw Error("EmptyFamily", "explicit family has no members");
    for (auto const &m : ex->members)
    {
      if (m.empty())
        throw Error("InvalidProblem", "family member without edges");
      for (auto e : m)
        if (e >= g.edges.size())
          throw Error("InvalidProblem", "edge index " + std::to_string(e) + " out of range");
    }
  }
  else if (auto const *cf = std::get_if<ConnectionFamily>(&p.family))
  {
    check_vertices(cf->sources);
    check_vertices(cf->targets);
    for (auto v : cf->sources)
      if (std::find(cf->targets.begin(), cf->targets.end(), v) != cf->targets.end())
        throw Error("InvalidProblem", "source and target sets overlap");
  }
  else
  {
    auto const &gc = std::get<GatedCycleFamily>(p.family);
    if (gc.components.empty())
      throw Error("EmptyFamily", "gated family has no components");
    for (auto const &c : gc.components)
    {
      if (c.gates.size() < 2)
        throw Error("InvalidProblem", "a gated cycle needs at least two gates");
      for (auto const &gate : c.gates)
        check_vertices(gate);
      if (!c.allowed.empty() && c.allowed.size() != g.vertex_count)
        throw Error("InvalidProblem", "allowed mask has the wrong size");
    }
  }
}

nlohmann::json to_json(const ModulusProblem &problem)
{
  nlohmann::json edges = nlohmann::json::array();
  for (auto const &e : problem.graph.edges)
    edges.push_back({e.u, e.v, e.length, e.volume});
  nlohmann::json family;
  if (auto const *ex = std::get_if<ExplicitFamily>(&problem.family))
    family = {{"type", "explicit"}, {"members", ex->members}};
  else if (auto const *cf = std::get_if<ConnectionFamily>(&problem.family))
    family = {{"type", "connection"}, {"sources", cf->sources}, {"targets", cf->targets}};
  else
  {
    nlohmann::json comps = nlohmann::json::array();
    for (auto const &c : std::get<GatedCycleFamily>(problem.family).components)
    {
      nlohmann::json jc = {{"gates", c.gates}};
      if (!c.allowed.empty())
      {
        std::vector<std::uint32_t> ids;
        for (std::uint32_t v = 0; v < c.allowed.size(); ++v)
          if (c.allowed[v])
            ids.push_back(v);
        jc["allowed"] = ids;
      }
      comps.push_back(jc);
    }
    family = {{"type", "gated"}, {"components", comps}};
  }
  return {{"vertices", problem.graph.vertex_count}, {"edges", edges}, {"family", family}};
}

ModulusProblem problem_from_json(const nlohmann::json &j)
{
  try
  {
    ModulusProblem p;
    p.graph.vertex_count = j.at("vertices").get<std::size_t>();
    for (auto const &e : j.at("edges"))
      p.graph.edges.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>(), e.at(2).get<double>(),
                               e.at(3).get<double>()});
    auto const &f = j.at("family");
    auto type = f.at("type").get<std::string>();
    if (type == "explicit")
      p.family = ExplicitFamily{f.at("members").get<std::vector<Member>>()};
    else if (type == "connection")
      p.family = ConnectionFamily{f.at("sources").get<std::vector<std::uint32_t>>(),
                                  f.at("targets").get<std::vector<std::uint32_t>>()};
    else if (type == "gated")
    {
      GatedCycleFamily gc;
      for (auto const &jc : f.at("components"))
      {
        GatedCycleFamily::Component c;
        c.gates = jc.at("gates").get<std::vector<std::vector<std::uint32_t>>>();
        if (jc.contains("allowed"))
        {
          c.allowed.assign(p.graph.vertex_count, false);
          for (auto v : jc.at("allowed").get<std::vector<std::uint32_t>>())
          {
            if (v >= p.graph.vertex_count)
              throw Error("InvalidProblem", "allowed vertex out of range");
            c.allowed[v] = true;
          }
        }
        gc.components.push_back(std::move(c));
      }
      p.family = std::move(gc);
    }
    else
      throw Error("InvalidProblem", "unknown family type '" + type + "'");
    return p;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error("InvalidProblem", std::string("malformed problem: ") + e.what());
  }
}

double energy(const Graph &graph, const std::vector<double> &rho)
{
  double s = 0.0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e)
    s += graph.edges[e].volume * rho[e] * rho[e] * rho[e];
  return s;
}

ShortestMember shortest_member(const Graph &graph, const std::vector<double> &rho, const Family &family)
{
  return shortest(graph, make_csr(graph), rho, family);
}

double admissibility_check(const Graph &graph, const std::vector<double> &rho, const Family &family)
{
  return shortest_member(graph, rho, family).length;
}

ModulusEstimate discrete_modulus(const ModulusProblem &problem, const Options &options)
{
  validate(problem);
  auto const &g = problem.graph;
  Csr csr = make_csr(g);
  DualState state(g);
  std::set<Member> seen;

  auto add_member = [&](Member m) {
    Member key = m;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second)
      return false;
    state.add(make_row(g, std::move(m)));
    return true;
  };

  std::vector<double> ones(g.edges.size(), 1.0);
  auto first = shortest(g, csr, ones, problem.family);
  if (!(first.length > 0.0))
    throw Error("InvalidProblem", "a family member has zero length");
  add_member(first.member);

  ModulusEstimate best;
  best.value = kInf;
  // While the oracle keeps finding new members one sweep per member is
  // enough; the working set is only solved accurately once it stops growing.
  double inner_tol = options.epsilon / 4.0;
  bool grew = false;
  std::size_t sweeps = 0;

  for (;;)
  {
    for (;;)
    {
      for (std::size_t i = 0; i < state.rows.size(); ++i)
        state.step(i);
      ++sweeps;
      if (grew)
        break;
      double m = state.min_row_length();
      double upper = energy(g, state.rho) / (m * m * m);
      double lower = state.dual_value();
      if (upper - lower <= inner_tol * upper)
        break;
      if (sweeps >= options.max_iterations)
        break;
    }

    auto sm = shortest(g, csr, state.rho, problem.family);
    double lower = state.dual_value();
    if (sm.length > 0.0)
    {
      auto rho = scaled(state.rho, sm.length);
      double value = energy(g, rho);
      if (value < best.value)
      {
        best.value = value;
        best.density = std::move(rho);
        best.lower_bound = lower;
        best.members_used = state.rows.size();
      }
      best.lower_bound = std::max(best.lower_bound, lower);
      if (best.value - best.lower_bound <= options.epsilon * best.value)
        break;
    }
    if (sweeps >= options.max_iterations)
    {
      best.iterations = sweeps;
      if (best.density.empty())
      {
        best.density = state.rho;
        best.value = energy(g, best.density);
        best.lower_bound = std::min(lower, best.value);
        best.members_used = state.rows.size();
      }
      best.feasibility_gap = std::max(0.0, 1.0 - shortest(g, csr, best.density, problem.family).length);
      throw NotConverged(sweeps, best);
    }
    grew = sm.length < 1.0 - options.epsilon_adm && add_member(sm.member);
    if (!grew)
      inner_tol /= 2.0;
  }

  best.iterations = sweeps;
  best.members_used = state.rows.size();
  best.value = energy(g, best.density);
  double adm = shortest(g, csr, best.density, problem.family).length;
  best.feasibility_gap = std::max(0.0, 1.0 - adm);
  best.lower_bound = std::min(best.lower_bound, best.value);
  best.converged = best.feasibility_gap <= options.epsilon_adm;
  return best;
}

namespace
{

// Template voxel edges (v < u, both outside the collar) and, per voxel and
// neighbour slot, the index of its edge.
struct TemplateEdges
{
  std::vector<std::pair<std::uint32_t, std::uint32_t>> list;
  std::vector<std::array<std::int32_t, 6>> slot;
};

TemplateEdges template_edges(const semmes::ShellGraph &g)
{
  TemplateEdges t;
  t.slot.assign(g.size(), {-1, -1, -1, -1, -1, -1});
  for (std::uint32_t v = 0; v < g.size(); ++v)
  {
    if (g.collar[v])
      continue;
    for (int d = 0; d < 6; ++d)
    {
      auto u = g.neighbours[v][d];
      if (u > static_cast<std::int32_t>(v) && !g.collar[static_cast<std::size_t>(u)])
      {
        auto idx = static_cast<std::int32_t>(t.list.size());
        t.list.push_back({v, static_cast<std::uint32_t>(u)});
        t.slot[v][d] = idx;
        for (int b = 0; b < 6; ++b)
          if (g.neighbours[static_cast<std::size_t>(u)][b] == static_cast<std::int32_t>(v))
            t.slot[static_cast<std::size_t>(u)][b] = idx;
      }
    }
  }
  return t;
}

std::vector<std::size_t> level_copies(const semmes::HierarchicalMetricSpace &s, std::size_t k)
{
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < s.copies.size(); ++c)
    if (s.copies[c].level == k)
      out.push_back(c);
  return out;
}

// Closed voxel walk following the template core, without backtracking.
std::vector<std::uint32_t> snap_core(const semmes::ShellGraph &g, const geom::PolyCycle &core)
{
  std::vector<std::uint32_t> pool;
  for (std::uint32_t v = 0; v < g.size(); ++v)
    if (!g.collar[v])
      pool.push_back(v);

  std::vector<std::uint32_t> seq;
  auto const &vs = core.vertices();
  for (std::size_t i = 0; i < vs.size(); ++i)
  {
    auto [a, b] = core.edge(i);
    auto steps = static_cast<std::size_t>(std::ceil(geom::distance(a, b) / (0.25 * g.h))) + 1;
    for (std::size_t j = 0; j < steps; ++j)
    {
      Point3 p = geom::lerp(a, b, static_cast<double>(j) / static_cast<double>(steps));
      std::uint32_t best = pool.front();
      double bd = kInf;
      for (auto v : pool)
      {
        double d = geom::distance(g.positions[v], p);
        if (d < bd)
        {
          bd = d;
          best = v;
        }
      }
      if (bd > g.h)
        throw Error("MappingFailed", "core point is " + std::to_string(bd) + " from the nearest voxel");
      if (seq.empty() || seq.back() != best)
        seq.push_back(best);
    }
  }
  if (seq.size() > 1 && seq.front() == seq.back())
    seq.pop_back();

  auto bfs_path = [&](std::uint32_t from, std::uint32_t to) {
    std::vector<std::int64_t> prev(g.size(), -2);
    std::queue<std::uint32_t> q;
    q.push(from);
    prev[from] = -1;
    while (!q.empty() && prev[to] == -2)
    {
      auto v = q.front();
      q.pop();
      for (auto u : g.neighbours[v])
        if (u >= 0 && !g.collar[static_cast<std::size_t>(u)] && prev[static_cast<std::size_t>(u)] == -2)
        {
          prev[static_cast<std::size_t>(u)] = v;
          q.push(static_cast<std::uint32_t>(u));
        }
    }
    if (prev[to] == -2)
      throw Error("MappingFailed", "snapped core points are not connected in the shell");
    std::vector<std::uint32_t> path;
    for (std::int64_t v = to; v != from; v = prev[static_cast<std::size_t>(v)])
      path.push_back(static_cast<std::uint32_t>(v));
    std::reverse(path.begin(), path.end());
    return path;
  };

  std::vector<std::uint32_t> walk{seq.front()};
  for (std::size_t i = 1; i <= seq.size(); ++i)
  {
    auto next = seq[i % seq.size()];
    for (auto v : bfs_path(walk.back(), next))
    {
      if (walk.size() >= 2 && walk[walk.size() - 2] == v)
        walk.pop_back();
      else
        walk.push_back(v);
    }
  }
  // walk ends where it started; drop the repeated endpoint and any spur
  // across the seam.
  walk.pop_back();
  while (walk.size() > 2 && walk[1] == walk.back())
  {
    walk.erase(walk.begin());
    walk.pop_back();
  }
  return walk;
}

} // namespace

Graph space_graph(const semmes::HierarchicalMetricSpace &space)
{
  auto const &sh = space.shell;
  auto te = template_edges(sh);
  Graph g;
  g.vertex_count = space.copies.size() * sh.size();
  g.edges.reserve(space.copies.size() * te.list.size() + space.glue.size() * space.copies.size());
  for (std::size_t c = 0; c < space.copies.size(); ++c)
  {
    double l = space.edge_length(space.copies[c].level);
    auto base = static_cast<std::uint32_t>(c * sh.size());
    for (auto [v, u] : te.list)
      g.edges.push_back({base + v, base + u, l, l * l * l});
  }
  for (std::size_t c = 0; c < space.copies.size(); ++c)
  {
    auto const &copy = space.copies[c];
    if (copy.level >= space.depth)
      continue;
    for (auto const &ge : space.glue)
    {
      double l = space.level_scale[copy.level] * ge.length;
      if (!(l > 0.0))
        continue;
      auto child = copy.children[ge.child];
      g.edges.push_back({static_cast<std::uint32_t>(c * sh.size() + ge.inner),
                         static_cast<std::uint32_t>(child * sh.size() + ge.outer), l, l * l * l});
    }
  }
  return g;
}

std::string to_string(LongitudeMode mode)
{
  return mode == LongitudeMode::explicit_cores ? "explicit" : "implicit";
}

LongitudeMode longitude_mode_from_string(const std::string &text)
{
  if (text == "explicit")
    return LongitudeMode::explicit_cores;
  if (text == "implicit")
    return LongitudeMode::implicit_gates;
  throw Error("InvalidArgument", "unknown longitude mode '" + text + "'");
}

LongitudeProblem longitude_family_problem(const semmes::HierarchicalMetricSpace &space,
                                          const package::InitialPackage &pkg, std::size_t k, LongitudeMode mode)
{
  if (k > space.depth)
    throw Error("InvalidArgument", "level " + std::to_string(k) + " exceeds the depth " + std::to_string(space.depth));
  auto const &sh = space.shell;
  std::size_t n = sh.size();
  auto copies = level_copies(space, k);

  LongitudeProblem out;
  out.problem.graph = space_graph(space);
  out.components = copies.size();
  out.curve_length = pkg.parent().core_length();

  auto walk = snap_core(sh, pkg.parent().core());
  out.snapped_length = static_cast<double>(walk.size()) * sh.h;

  if (mode == LongitudeMode::explicit_cores)
  {
    auto te = template_edges(sh);
    Member member;
    for (auto c : copies)
    {
      auto base = static_cast<std::uint32_t>(c * te.list.size());
      for (std::size_t i = 0; i < walk.size(); ++i)
      {
        auto v = walk[i], u = walk[(i + 1) % walk.size()];
        std::int32_t idx = -1;
        for (int d = 0; d < 6; ++d)
          if (sh.neighbours[v][d] == static_cast<std::int32_t>(u))
            idx = te.slot[v][d];
        if (idx < 0)
          throw Error("MappingFailed", "snapped walk leaves the voxel graph");
        member.push_back(base + static_cast<std::uint32_t>(idx));
      }
    }
    out.problem.family = ExplicitFamily{{member}};
    return out;
  }

  // Four cross-sections of the template tube at t = 0, 1/4, 1/2, 3/4.
  auto const &parent = pkg.parent();
  double half = 0.5 * sh.h * (1.0 + 1e-9);
  std::vector<std::vector<std::uint32_t>> gates(4);
  for (std::uint32_t v = 0; v < n; ++v)
  {
    if (sh.collar[v])
      continue;
    double t = parent.coords(sh.positions[v]).t;
    for (std::size_t j = 0; j < 4; ++j)
    {
      double dt = std::remainder(t - 0.25 * static_cast<double>(j), 1.0);
      if (std::abs(dt) * parent.core_length() <= half)
        gates[j].push_back(v);
    }
  }

  GatedCycleFamily family;
  for (auto c : copies)
  {
    GatedCycleFamily::Component comp;
    for (auto const &gate : gates)
    {
      std::vector<std::uint32_t> ids;
      for (auto v : gate)
        ids.push_back(static_cast<std::uint32_t>(c * n + v));
      comp.gates.push_back(std::move(ids));
    }
    comp.allowed.assign(space.copies.size() * n, false);
    std::vector<std::size_t> stack{c};
    while (!stack.empty())
    {
      auto d = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v)
        comp.allowed[d * n + v] = !sh.collar[v];
      for (auto ch : space.copies[d].children)
        stack.push_back(ch);
    }
    family.components.push_back(std::move(comp));
  }
  out.problem.family = std::move(family);
  return out;
}

ScalingTable scaling_experiment(const package::InitialPackage &pkg, double lambda, std::size_t k_max,
                                LongitudeMode mode, const Options &options)
{
  auto space = semmes::assemble(pkg, lambda, k_max);
  ScalingTable table;
  table.package_id = pkg.id();
  table.mode = mode;
  for (std::size_t k = 0; k <= k_max; ++k)
  {
    auto lp = longitude_family_problem(space, pkg, k, mode);
    ModulusEstimate est;
    try
    {
      est = discrete_modulus(lp.problem, options);
    }
    catch (const NotConverged &e)
    {
      est = e.best();
    }
    double ratio = table.rows.empty() ? std::numeric_limits<double>::quiet_NaN() : est.value / table.rows.back().modulus;
    table.rows.push_back({k, est.value, ratio, est.iterations, est.converged});
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, count = static_cast<double>(table.rows.size());
  for (auto const &r : table.rows)
  {
    double x = static_cast<double>(r.k), y = std::log(r.modulus);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (table.rows.size() >= 2)
  {
    double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    table.fitted_ratio = std::exp(slope);
    table.fitted_constant = std::exp((sy - slope * sx) / count);
    table.decay_exponent =
      pkg.m() > 1 ? -slope / std::log(static_cast<double>(pkg.m())) : std::numeric_limits<double>::quiet_NaN();
  }
  else
  {
    table.fitted_ratio = 1.0;
    table.fitted_constant = table.rows.front().modulus;
    table.decay_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return table;
}

void write_csv(std::ostream &out, const ScalingTable &table)
{
  out << "k,modulus,ratio,iterations,converged\n";
  out << std::setprecision(10);
  for (auto const &r : table.rows)
  {
    out << r.k << ',' << r.modulus << ',';
    if (!std::isnan(r.ratio))
      out << r.ratio;
    out << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

} // namespace dsl::modulus
