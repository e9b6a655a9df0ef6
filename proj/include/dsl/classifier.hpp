#ifndef DSL_CLASSIFIER_HPP
#define DSL_CLASSIFIER_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsl/circulation.hpp"
#include "dsl/error.hpp"
#include "dsl/package.hpp"

// Ellipticity verdicts for decomposition spaces from the package size m, the
// order of circulation omega and contractibility of the children.

namespace dsl::classifier
{

struct ClassifierInput
{
  std::size_t m = 1;
  std::optional<double> omega;
  bool contractible_children = true;
  double lambda = 0.5;
  std::string package_id;
  /// "registry", "user" or empty.
  std::string omega_source;

  friend bool operator==(const ClassifierInput &, const ClassifierInput &) = default;
};

enum class VerdictKind
{
  QRNonElliptic,
  OmitsLimitSet,
  NoBLDFromR3,
  Inconclusive
};

std::string to_string(VerdictKind kind);
/// Throws InvalidArgument.
VerdictKind verdict_kind_from_string(const std::string &text);

struct Step
{
  std::string claim;
  std::string citation;
  bool holds;
  friend bool operator==(const Step &, const Step &) = default;
};

struct Verdict
{
  ClassifierInput input;
  /// In enum order; {Inconclusive} alone when a hypothesis fails.
  std::vector<VerdictKind> kinds;
  std::vector<Step> rationale;
  /// omega - m^(2/3).
  double numeric_margin = 0.0;

  bool has(VerdictKind kind) const;
  friend bool operator==(const Verdict &, const Verdict &) = default;
};

/// omega^3 > m^2, decided exactly on the binary value of omega.
bool circulation_exceeds(double omega, std::size_t m);

/// User omega wins over the registry entry; neither leaves omega empty.
ClassifierInput input_for_package(const package::InitialPackage &pkg, double lambda,
                                  std::optional<double> user_omega = std::nullopt,
                                  const circulation::Registry &registry = circulation::Registry::builtin());

/// Throws MissingOmega when omega is absent and InvalidInput for m = 0,
/// omega <= 0 or lambda outside (0,1).
Verdict classify(const ClassifierInput &input);

enum class ReportFormat
{
  json,
  text
};

std::string report(const Verdict &verdict, ReportFormat format);

nlohmann::json to_json(const Verdict &verdict);
/// Throws InvalidReport.
Verdict verdict_from_json(const nlohmann::json &j);

} // namespace dsl::classifier

#endif // DSL_CLASSIFIER_HPP
