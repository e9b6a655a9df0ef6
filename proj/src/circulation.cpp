#include "dsl/circulation.hpp"

#include <algorithm>
#include <cmath>

#include "dsl/error.hpp"

namespace dsl::circulation
{

std::string to_string(LongitudeSource s)
{
  return s == LongitudeSource::canonical ? "canonical" : "user_supplied";
}

std::string to_string(DiskSource s)
{
  return s == DiskSource::canonical_meridian ? "canonical_meridian" : "user_supplied";
}

CirculationEvidence empirical_circulation(const package::InitialPackage &pkg, std::size_t k,
                                          const std::optional<geom::OneCycle> &sigma,
                                          const std::optional<geom::TriangulatedDisk> &disk)
{
  CirculationEvidence ev;
  ev.package_id = pkg.id();
  ev.level = k;
  auto canonical = package::meridian_disk(pkg);

  geom::OneCycle curve;
  if (sigma)
  {
    if (geom::count_disk_intersections(*sigma, canonical.disk) < 1)
      throw Error("InvalidLongitude", "supplied cycle misses the canonical meridian disk");
    curve = *sigma;
    ev.longitude_source = LongitudeSource::user_supplied;
  }
  else
  {
    curve = package::canonical_longitude(pkg, k);
  }

  if (disk)
  {
    ev.intersection_count = geom::count_disk_intersections(curve, *disk);
    ev.disk_source = DiskSource::user_supplied;
  }
  else
  {
    ev.intersection_count = geom::count_disk_intersections(curve, canonical.disk);
  }
  return ev;
}

Registry Registry::builtin()
{
  Registry r;
  const std::string cite = "Freedman-Skora lemma: the Bing double and the Whitehead continuum have circulation at least 2";
  r.add({"whitehead", 2.0, 1.0, cite});
  r.add({"bing", 2.0, 1.0, cite});
  return r;
}

void Registry::add(CirculationBound bound)
{
  if (bound.package_id.empty())
    throw Error("InvalidBound", "package_id must be non-empty");
  if (!(bound.omega >= 1.0) || !std::isfinite(bound.omega))
    throw Error("InvalidBound", "omega must be a finite real >= 1");
  if (!(bound.C > 0.0) || !std::isfinite(bound.C))
    throw Error("InvalidBound", "C must be a finite positive real");
  auto it = std::find_if(_entries.begin(), _entries.end(),
                         [&](auto const &e) { return e.package_id == bound.package_id; });
  if (it != _entries.end())
    *it = std::move(bound);
  else
    _entries.push_back(std::move(bound));
}

void Registry::load_json(const nlohmann::json &j)
{
  if (j.is_array())
  {
    for (auto const &item : j)
      add(bound_from_json(item));
  }
  else
  {
    add(bound_from_json(j));
  }
}

std::optional<CirculationBound> Registry::lookup(const std::string &package_id) const
{
  for (auto const &e : _entries)
    if (e.package_id == package_id)
      return e;
  return std::nullopt;
}

std::optional<CirculationBound> registry_lookup(const std::string &package_id)
{
  static const Registry registry = Registry::builtin();
  return registry.lookup(package_id);
}

nlohmann::json to_json(const CirculationEvidence &e)
{
  return {{"package_id", e.package_id},
          {"level", e.level},
          {"intersection_count", e.intersection_count},
          {"longitude_source", to_string(e.longitude_source)},
          {"disk_source", to_string(e.disk_source)}};
}

nlohmann::json to_json(const CirculationBound &b)
{
  return {{"package_id", b.package_id}, {"omega", b.omega}, {"C", b.C}, {"provenance", b.provenance}};
}

CirculationBound bound_from_json(const nlohmann::json &j)
{
  try
  {
    CirculationBound b;
    b.package_id = j.at("package_id").get<std::string>();
    b.omega = j.at("omega").get<double>();
    b.C = j.value("C", 1.0);
    b.provenance = j.value("provenance", std::string("user supplied"));
    return b;
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error("InvalidBound", std::string("malformed bound: ") + e.what());
  }
}

} // namespace dsl::circulation
