#ifndef DSL_MODULUS_HPP
#define DSL_MODULUS_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dsl/error.hpp"
#include "dsl/package.hpp"
#include "dsl/semmes.hpp"

// Discrete 3-modulus: minimise sum_e v(e) rho(e)^3 over rho >= 0 subject to
// sum_{e in gamma} l(e) rho(e) >= 1 for every member gamma of a curve family.

namespace dsl::modulus
{

struct Edge
{
  std::uint32_t u;
  std::uint32_t v;
  double length;
  double volume;
};

struct Graph
{
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;
};

/// Edge indices of one family member; an index listed twice counts twice.
using Member = std::vector<std::uint32_t>;

struct ExplicitFamily
{
  std::vector<Member> members;
};

/// All edge paths from a vertex of sources to a vertex of targets.
struct ConnectionFamily
{
  std::vector<std::uint32_t> sources;
  std::vector<std::uint32_t> targets;
};

/// Members are unions of one closed walk per component. A component's walk
/// starts in gates[0], passes gates[1], ..., gates[g-1] in order and returns
/// to gates[0]; it may only use vertices flagged in allowed (all if empty).
struct GatedCycleFamily
{
  struct Component
  {
    std::vector<std::vector<std::uint32_t>> gates;
    std::vector<bool> allowed;
  };
  std::vector<Component> components;
};

using Family = std::variant<ExplicitFamily, ConnectionFamily, GatedCycleFamily>;

struct ModulusProblem
{
  Graph graph;
  Family family;
};

struct Options
{
  double epsilon = 1e-3;
  double epsilon_adm = 1e-4;
  std::size_t max_iterations = 100000;
};

struct ModulusEstimate
{
  double value = 0.0;
  std::vector<double> density;
  double feasibility_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Dual lower bound on the optimum.
  double lower_bound = 0.0;
  /// Members in the final working set.
  std::size_t members_used = 0;
};

class NotConverged : public Error
{
public:
  NotConverged(std::size_t iterations, ModulusEstimate best);
  const ModulusEstimate &best() const { return _best; }

private:
  ModulusEstimate _best;
};

/// Throws InvalidProblem for non-positive lengths or volumes, bad indices or
/// empty members, and EmptyFamily for an empty family.
void validate(const ModulusProblem &problem);

/// {"vertices": n, "edges": [[u, v, length, volume], ...], "family": {...}}
/// with family {"type": "explicit", "members": [[e, ...], ...]},
/// {"type": "connection", "sources": [...], "targets": [...]} or
/// {"type": "gated", "components": [{"gates": [[...], ...], "allowed": [...]}]}.
nlohmann::json to_json(const ModulusProblem &problem);

/// Throws InvalidProblem for malformed input (structure only; see validate).
ModulusProblem problem_from_json(const nlohmann::json &j);

/// sum_e v(e) rho(e)^3.
double energy(const Graph &graph, const std::vector<double> &rho);

struct ShortestMember
{
  double length;
  Member member;
};

/// Member of least rho-length: exact scan for explicit families, Dijkstra
/// for implicit ones (ties broken by lower vertex id).
ShortestMember shortest_member(const Graph &graph, const std::vector<double> &rho, const Family &family);

/// Minimum rho-length over the family.
double admissibility_check(const Graph &graph, const std::vector<double> &rho, const Family &family);

/// Dual coordinate ascent with constraint generation. The returned density
/// is the working solution scaled to be admissible, so value is an upper
/// bound; converged means (value - lower_bound) <= epsilon * value.
/// Throws NotConverged after max_iterations sweeps.
ModulusEstimate discrete_modulus(const ModulusProblem &problem, const Options &options = {});

/// Voxel edges of every copy and the glue edges, with l = lambda^k h (glue:
/// lambda^k times the glue length) and v = l^3. Collar voxels and limit leaves
/// are left out; vertex ids match the space's voxel ids.
Graph space_graph(const semmes::HierarchicalMetricSpace &space);

enum class LongitudeMode
{
  explicit_cores,
  implicit_gates
};

std::string to_string(LongitudeMode mode);
LongitudeMode longitude_mode_from_string(const std::string &text);

struct LongitudeProblem
{
  ModulusProblem problem;
  /// Closed curves per member, one per level-k copy.
  std::size_t components = 0;
  /// Template core snapped to the voxel graph, and the core's own length.
  double snapped_length = 0.0;
  double curve_length = 0.0;
};

/// Explicit mode: one member, the union of the parent core snapped into every
/// level-k copy. Implicit mode: one component per level-k copy whose walk
/// passes four core cross-sections of that copy in order, within its subtree.
/// Throws MappingFailed if the core cannot be snapped within h, and
/// InvalidArgument if k exceeds the depth.
LongitudeProblem longitude_family_problem(const semmes::HierarchicalMetricSpace &space,
                                          const package::InitialPackage &pkg, std::size_t k, LongitudeMode mode);

struct ScalingRow
{
  std::size_t k;
  double modulus;
  double ratio;
  std::size_t iterations;
  bool converged;
};

struct ScalingTable
{
  std::string package_id;
  LongitudeMode mode;
  std::vector<ScalingRow> rows;
  /// Least-squares fit modulus ~ C * q^k.
  double fitted_ratio = 0.0;
  double fitted_constant = 0.0;
  /// -log(q) / log(m); 2 matches the m^{-2k} lower-bound shape.
  double decay_exponent = 0.0;
};

/// Assembles the space with depth k_max at the default pitch and solves the
/// longitude problem for k = 0..k_max.
ScalingTable scaling_experiment(const package::InitialPackage &pkg, double lambda, std::size_t k_max,
                                LongitudeMode mode, const Options &options = {});

/// CSV with columns k, modulus, ratio, iterations, converged.
void write_csv(std::ostream &out, const ScalingTable &table);

} // namespace dsl::modulus

#endif // DSL_MODULUS_HPP
