#ifndef DSL_TESTS_MODULUS_ORACLE_HPP
#define DSL_TESTS_MODULUS_ORACLE_HPP

// Random small explicit modulus instances and a brute-force optimiser used as
// an independent oracle: f(rho) = energy(rho) / (min member length)^3 is
// scale-invariant, so it is minimised over the simplex on the edges the
// family uses, first on a dense grid and then by pattern search.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "dsl/modulus.hpp"

namespace oracle
{

using dsl::modulus::ExplicitFamily;
using dsl::modulus::Member;
using dsl::modulus::ModulusProblem;

inline ModulusProblem random_instance(std::mt19937_64 &rng, std::size_t max_edges = 8, std::size_t max_members = 4)
{
  std::uniform_int_distribution<std::size_t> nv(3, 6), ne(2, max_edges), nm(1, max_members), walk(1, 4);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  ModulusProblem p;
  p.graph.vertex_count = nv(rng);
  std::uniform_int_distribution<std::uint32_t> vert(0, static_cast<std::uint32_t>(p.graph.vertex_count - 1));
  std::size_t edges = ne(rng);
  while (p.graph.edges.size() < edges)
  {
    auto u = vert(rng), v = vert(rng);
    if (u != v)
      p.graph.edges.push_back({u, v, weight(rng), weight(rng)});
  }
  ExplicitFamily fam;
  std::size_t members = nm(rng);
  std::uniform_int_distribution<std::size_t> pick_edge(0, edges - 1);
  while (fam.members.size() < members)
  {
    // random walk along incident edges
    Member m;
    auto e = static_cast<std::uint32_t>(pick_edge(rng));
    std::uint32_t at = p.graph.edges[e].v;
    m.push_back(e);
    std::size_t len = walk(rng);
    while (m.size() < len)
    {
      std::vector<std::uint32_t> inc;
      for (std::uint32_t i = 0; i < edges; ++i)
        if (p.graph.edges[i].u == at || p.graph.edges[i].v == at)
          inc.push_back(i);
      std::uniform_int_distribution<std::size_t> pick(0, inc.size() - 1);
      auto next = inc[pick(rng)];
      at = p.graph.edges[next].u == at ? p.graph.edges[next].v : p.graph.edges[next].u;
      m.push_back(next);
    }
    fam.members.push_back(m);
  }
  p.family = fam;
  return p;
}

inline double brute_force_modulus(const ModulusProblem &p, std::uint64_t seed = 1)
{
  auto const &members = std::get<ExplicitFamily>(p.family).members;
  std::vector<std::uint32_t> used;
  for (auto const &m : members)
    used.insert(used.end(), m.begin(), m.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::size_t d = used.size();
  std::vector<int> slot(p.graph.edges.size(), -1);
  for (std::size_t i = 0; i < d; ++i)
    slot[used[i]] = static_cast<int>(i);

  auto f = [&](const std::vector<double> &x) {
    double energy = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      energy += p.graph.edges[used[i]].volume * x[i] * x[i] * x[i];
    double shortest = std::numeric_limits<double>::infinity();
    for (auto const &m : members)
    {
      double len = 0.0;
      for (auto e : m)
        len += p.graph.edges[e].length * x[static_cast<std::size_t>(slot[e])];
      shortest = std::min(shortest, len);
    }
    if (!(shortest > 0.0))
      return std::numeric_limits<double>::infinity();
    return energy / (shortest * shortest * shortest);
  };

  int res = d <= 4 ? 24 : d <= 6 ? 12 : 8;
  std::vector<std::pair<double, std::vector<double>>> grid;
  std::vector<int> parts(d, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == d)
    {
      parts[i] = left;
      std::vector<double> x(d);
      for (std::size_t k = 0; k < d; ++k)
        x[k] = static_cast<double>(parts[k]) / res;
      double v = f(x);
      if (std::isfinite(v))
        grid.push_back({v, x});
      return;
    }
    for (int a = 0; a <= left; ++a)
    {
      parts[i] = a;
      rec(i + 1, left - a);
    }
  };
  rec(0, res);
  std::sort(grid.begin(), grid.end(), [](auto const &a, auto const &b) { return a.first < b.first; });

  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < d; ++i)
  {
    std::vector<double> e(d, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    e[i] = -1.0;
    dirs.push_back(e);
    for (std::size_t j = 0; j < d; ++j)
      if (j != i)
      {
        std::vector<double> w(d, 0.0);
        w[i] = 1.0;
        w[j] = -1.0;
        dirs.push_back(w);
      }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < std::min<std::size_t>(4, grid.size()); ++s)
  {
    auto x = grid[s].second;
    double fx = grid[s].first;
    for (double step = 1.0 / res; step > 1e-11;)
    {
      bool moved = false;
      auto attempt = [&](const std::vector<double> &dir) {
        std::vector<double> y(d);
        for (std::size_t k = 0; k < d; ++k)
          y[k] = std::max(0.0, x[k] + step * dir[k]);
        double fy = f(y);
        if (fy < fx * (1.0 - 1e-15))
        {
          x = y;
          fx = fy;
          moved = true;
        }
      };
      for (auto const &dir : dirs)
        attempt(dir);
      if (!moved)
        for (int r = 0; r < 1024 && !moved; ++r)
        {
          std::vector<double> dir(d);
          for (auto &c : dir)
            c = gauss(rng);
          attempt(dir);
        }
      if (!moved)
        step *= 0.5;
    }
    best = std::min(best, fx);
  }
  return best;
}

} // namespace oracle

#endif // DSL_TESTS_MODULUS_ORACLE_HPP
