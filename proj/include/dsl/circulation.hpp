#ifndef DSL_CIRCULATION_HPP
#define DSL_CIRCULATION_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsl/geom.hpp"
#include "dsl/package.hpp"

// Circulation evidence and proven circulation bounds.
//
// An empirical count is the number of times one particular longitude meets one
// particular spanning disk. It only bounds the circulation from above for that
// pair, so it is never used as a proof of a lower bound; the classifier reads
// omega from the registry (or from the user) instead.

namespace dsl::circulation
{

enum class LongitudeSource { canonical, user_supplied };
enum class DiskSource { canonical_meridian, user_supplied };

std::string to_string(LongitudeSource s);
std::string to_string(DiskSource s);

struct CirculationEvidence
{
  std::string package_id;
  std::size_t level = 0;
  int intersection_count = 0;
  LongitudeSource longitude_source = LongitudeSource::canonical;
  DiskSource disk_source = DiskSource::canonical_meridian;
};

struct CirculationBound
{
  std::string package_id;
  double omega = 1.0;
  double C = 1.0;
  std::string provenance;
};

/// Exact intersection count of sigma with the disk at level k. Missing
/// arguments are replaced by the canonical longitude and meridian disk. A
/// user-supplied sigma must meet the canonical meridian disk, otherwise
/// InvalidLongitude is thrown.
CirculationEvidence empirical_circulation(const package::InitialPackage &pkg, std::size_t k,
                                          const std::optional<geom::OneCycle> &sigma = std::nullopt,
                                          const std::optional<geom::TriangulatedDisk> &disk = std::nullopt);

class Registry
{
public:
  /// Whitehead and Bing with omega = 2, C = 1.
  static Registry builtin();

  /// Throws InvalidBound if omega < 1 or C <= 0 or the id is empty. Replaces
  /// an existing entry with the same id.
  void add(CirculationBound bound);

  /// Accepts one bound object or an array of them.
  void load_json(const nlohmann::json &j);

  std::optional<CirculationBound> lookup(const std::string &package_id) const;
  const std::vector<CirculationBound> &entries() const { return _entries; }

private:
  std::vector<CirculationBound> _entries;
};

std::optional<CirculationBound> registry_lookup(const std::string &package_id);

nlohmann::json to_json(const CirculationEvidence &e);
nlohmann::json to_json(const CirculationBound &b);
CirculationBound bound_from_json(const nlohmann::json &j);

} // namespace dsl::circulation

#endif // DSL_CIRCULATION_HPP
