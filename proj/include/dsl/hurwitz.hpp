#ifndef DSL_HURWITZ_HPP
#define DSL_HURWITZ_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsl/error.hpp"
#include "dsl/package.hpp"

// Permutation branch data for degree-n branched covers of the 2-sphere, and
// combinatorial plans for extending boundary covers over 3-manifolds.

namespace dsl::hurwitz
{

/// images[i - 1] is the image of i; entries are 1-based.
struct Permutation
{
  std::vector<int> images;

  std::size_t degree() const { return images.size(); }
  bool is_bijection() const;

  static Permutation identity(std::size_t n);
  /// Cycle (c_1 c_2 ... c_r) acting on {1..n}.
  static Permutation cycle(std::size_t n, const std::vector<int> &elements);
  Permutation inverse() const;

  /// Cycle lengths including fixed points, sorted in decreasing order.
  std::vector<int> cycle_type() const;
  std::size_t cycle_count() const;
  /// Disjoint cycle notation without fixed points; "()" for the identity.
  std::string str() const;

  friend bool operator==(const Permutation &, const Permutation &) = default;
};

/// a then b: i -> b(a(i)).
Permutation then(const Permutation &a, const Permutation &b);

struct BranchData
{
  std::size_t degree = 0;
  /// rho(x_1) .. rho(x_k); the branch count k is permutations.size().
  std::vector<Permutation> permutations;

  std::size_t branch_count() const { return permutations.size(); }
  friend bool operator==(const BranchData &, const BranchData &) = default;
};

/// rho(x_1) = (1 2 ... n), rho(x_2) its inverse, rho(x_3) = ... = rho(x_k) = (1 2)
/// with k = 2 + 2g. Throws DegreeTooSmall if n < 2 and InvalidArgument if g < 0.
BranchData build_branch_data(int genus, int n);

struct Check
{
  std::string name;
  bool passed;
  std::string detail;
};

struct BranchReport
{
  /// "permutations", "branch_count", "product", "transitive", in that order.
  std::vector<Check> checks;
  /// Cycle type of each permutation (local degrees over that branch point).
  std::vector<std::vector<int>> local_degrees;

  bool ok() const;
  std::vector<std::string> failed() const;
};

/// Never throws. The product is taken left to right: rho(x_1) acts first.
BranchReport verify_branch_data(const BranchData &data);

struct CoverEuler
{
  int chi;
  int genus;
};

/// chi = n (2 - k) + sum of cycle counts. Throws InvalidBranchData for
/// malformed permutations or k = 0 and OddEuler when chi is odd.
CoverEuler euler_characteristic_of_cover(const BranchData &data);

struct SourceTube
{
  int j;
  int i;
  std::string label;
  std::string source_disk;
  std::string target_disk;
  int source_boundary;
  int target_boundary;
  friend bool operator==(const SourceTube &, const SourceTube &) = default;
};

struct TargetTube
{
  int j;
  std::string label;
  std::string source_disk;
  std::string target_disk;
  friend bool operator==(const TargetTube &, const TargetTube &) = default;
};

/// One gluing equation: the tube map beta_j o alpha_{j,i}^{-1} restricted to
/// disk must agree with the boundary cover phi_boundary there.
struct Compatibility
{
  std::string tube;
  std::string target;
  std::string disk;
  int boundary;
  std::string equation;
  friend bool operator==(const Compatibility &, const Compatibility &) = default;
};

/// Boundary components are M_0 .. M_{p-1}.
struct ExtensionPlan
{
  int p = 0;
  int degree = 0;
  std::vector<int> boundary_degrees;
  std::vector<SourceTube> tubes;
  std::vector<TargetTube> targets;
  std::vector<Compatibility> compatibility;
  /// Statements deferred to the Berstein-Edmonds theorem.
  std::vector<std::string> records;
  friend bool operator==(const ExtensionPlan &, const ExtensionPlan &) = default;
};

/// Checks in order: DegreeTwoObstruction (n = 2), DegreeTooSmall (n < 3),
/// InvalidArgument (p < 2 or boundary count != p), DegreeMismatch.
ExtensionPlan extension_plan(int p, int n, const std::vector<int> &boundary_degrees);
ExtensionPlan extension_plan(int p, int n, const std::vector<BranchData> &boundary_data);

/// Structural failures of a plan; empty when it is well formed.
std::vector<std::string> validate_plan(const ExtensionPlan &plan);

enum class Feasibility
{
  feasible,
  infeasible,
  unknown
};

std::string to_string(Feasibility f);

struct BallPacking
{
  std::size_t m = 0;
  double radius = 0.0;
  std::vector<package::Point3> centers;
  /// Smallest distance between two centres (infinite for m = 1).
  double min_separation = 0.0;
  Feasibility feasibility = Feasibility::unknown;
  friend bool operator==(const BallPacking &, const BallPacking &) = default;
};

/// m balls of radius r with centres on the sphere of radius 1 - r, placed on
/// an equatorial ring or a Fibonacci lattice, whichever separates them more.
/// Infeasible when m r^3 > 1, feasible when the placement is disjoint.
BallPacking pack_balls(std::size_t m, double radius);

struct LevelRecord
{
  std::size_t level;
  std::string address;
  double scale;
  friend bool operator==(const LevelRecord &, const LevelRecord &) = default;
};

struct HrPlan
{
  std::string package_id;
  double lambda = 0.0;
  int degree = 0;
  BranchData boundary_data;
  BallPacking target;
  std::vector<LevelRecord> levels;
  ExtensionPlan shell;
  friend bool operator==(const HrPlan &, const HrPlan &) = default;
};

/// Throws DegreeTooSmall (n < 3), InvalidArgument (lambda outside (0,1)) and
/// LambdaInfeasible (m lambda^3 > 1). Level records run through every level
/// within the level cap, or up to max_level when given.
HrPlan heinonen_rickman_plan(const package::InitialPackage &pkg, int n, double lambda,
                             std::optional<std::size_t> max_level = std::nullopt);

nlohmann::json to_json(const Permutation &perm);
nlohmann::json to_json(const BranchData &data);
nlohmann::json to_json(const BranchReport &report);
nlohmann::json to_json(const ExtensionPlan &plan);
nlohmann::json to_json(const BallPacking &packing);
nlohmann::json to_json(const HrPlan &plan);

/// Throw InvalidBranchData / InvalidPlan on malformed input.
BranchData branch_data_from_json(const nlohmann::json &j);
ExtensionPlan extension_plan_from_json(const nlohmann::json &j);
HrPlan hr_plan_from_json(const nlohmann::json &j);

} // namespace dsl::hurwitz

#endif // DSL_HURWITZ_HPP
