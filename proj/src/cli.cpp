#include "dsl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsl/circulation.hpp"
#include "dsl/classifier.hpp"
#include "dsl/error.hpp"
#include "dsl/hurwitz.hpp"
#include "dsl/modulus.hpp"
#include "dsl/semmes.hpp"

namespace dsl::cli
{

using nlohmann::json;

namespace
{

json read_json(const std::string &path, const std::string &kind)
{
  std::ifstream in(path);
  if (!in)
    throw Error(kind, "cannot open '" + path + "'");
  try
  {
    return json::parse(in);
  }
  catch (const json::exception &e)
  {
    throw Error(kind, "'" + path + "' is not valid JSON: " + e.what());
  }
}

// stdout when path is empty
void emit(const std::string &path, const std::string &text, std::ostream &out)
{
  if (path.empty())
  {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw Error("IOError", "cannot write '" + path + "'");
  file << text;
  if (!file)
    throw Error("IOError", "failed writing '" + path + "'");
}

std::string g17(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

circulation::Registry registry_with(const std::string &extra)
{
  auto reg = circulation::Registry::builtin();
  if (!extra.empty())
    reg.load_json(read_json(extra, "InvalidBound"));
  return reg;
}

std::vector<std::pair<semmes::PointRef, semmes::PointRef>> sample_pairs(const semmes::HierarchicalMetricSpace &space,
                                                                        std::size_t count, std::uint64_t seed)
{
  std::vector<std::uint32_t> voxels;
  for (std::uint32_t v = 0; v < space.shell.positions.size(); ++v)
    if (!space.shell.collar[v])
      voxels.push_back(v);
  std::mt19937_64 rng(seed);
  auto pick = [&] {
    auto const &copy = space.copies[rng() % space.copies.size()];
    return semmes::PointRef::voxel_of(copy.address, voxels[rng() % voxels.size()]);
  };
  std::vector<std::pair<semmes::PointRef, semmes::PointRef>> out;
  for (std::size_t i = 0; i < count; ++i)
  {
    auto a = pick();
    auto b = pick();
    out.emplace_back(a, b);
  }
  return out;
}

struct Settings
{
  std::uint64_t seed = 0;

  std::string pkg;
  std::string out;
  std::string address;
  std::string pairs;
  std::string mode = "explicit";
  std::string registry;
  double lambda = 0.4;
  std::size_t depth = 3;
  std::size_t modulus_depth = 2;
  std::optional<double> h;
  std::size_t samples = 8;
  double epsilon = 1e-3;
  std::size_t max_iterations = 100000;
  std::size_t k = 3;
  int genus = 1;
  int degree = 3;
  int p = 3;
  std::vector<int> boundary_degrees;
  std::optional<std::size_t> max_level;
  std::optional<double> omega;
  bool as_json = false;
};

} // namespace

package::InitialPackage load_package(const std::string &source)
{
  std::error_code ec;
  if (std::filesystem::is_regular_file(source, ec))
    return package::package_from_json(read_json(source, "InvalidPackage"),
                                      std::filesystem::path(source).stem().string());
  return package::builtin_package(source);
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  Settings s;
  CLI::App app{"Decomposition spaces: packages, Semmes metrics, modulus, branch data and ellipticity verdicts", "dsl"};
  app.require_subcommand(1);
  app.add_option("--seed", s.seed, "Seed for every random choice")->capture_default_str();

  auto *pkg_cmd = app.add_subcommand("package", "Validate or realise an initial package");
  pkg_cmd->require_subcommand(1);
  auto *validate = pkg_cmd->add_subcommand("validate", "Check a package and print its summary");
  validate->add_option("package", s.pkg, "Descriptor file or built-in id")->required();
  auto *realize = pkg_cmd->add_subcommand("realize", "Write the tube at an address as JSON");
  realize->add_option("package", s.pkg, "Descriptor file or built-in id")->required();
  realize->add_option("--address", s.address, "Address such as 1,2,1 (empty for the parent)");
  realize->add_option("--out", s.out, "Output file (stdout if omitted)");

  auto *metric = app.add_subcommand("metric", "Semmes distances between point references");
  metric->add_option("package", s.pkg, "Descriptor file or built-in id")->required();
  metric->add_option("--lambda", s.lambda, "Similarity ratio in (0,1)")->capture_default_str();
  metric->add_option("--depth", s.depth, "Depth K")->capture_default_str();
  metric->add_option("--mesh", s.h, "Voxel pitch h (default: radius / 4)");
  metric->add_option("--pairs", s.pairs, "JSON array of {a, b} point references");
  metric->add_option("--samples", s.samples, "Random voxel pairs when --pairs is omitted")->capture_default_str();
  metric->add_option("--out", s.out, "CSV output (stdout if omitted)");

  auto *mod = app.add_subcommand("modulus", "Longitude-family modulus for k = 0..depth");
  mod->add_option("package", s.pkg, "Descriptor file or built-in id")->required();
  mod->add_option("--lambda", s.lambda, "Similarity ratio in (0,1)")->capture_default_str();
  mod->add_option("--depth", s.modulus_depth, "Largest level k")->capture_default_str();
  mod->add_option("--mode", s.mode, "explicit or implicit")->capture_default_str();
  mod->add_option("--epsilon", s.epsilon, "Relative optimality gap")->capture_default_str();
  mod->add_option("--max-iterations", s.max_iterations, "Sweep limit per solve")->capture_default_str();
  mod->add_option("--out", s.out, "CSV output (stdout if omitted)");

  auto *circ = app.add_subcommand("circulation", "Intersection count of the canonical longitude and meridian disk");
  circ->add_option("package", s.pkg, "Descriptor file or built-in id")->required();
  circ->add_option("--k", s.k, "Level")->capture_default_str();
  circ->add_option("--registry", s.registry, "Extra registry entries (JSON)");
  circ->add_option("--out", s.out, "JSON output (stdout if omitted)");

  auto *hur = app.add_subcommand("hurwitz", "Branch data for a genus-g surface covering the sphere");
  hur->add_option("--genus", s.genus, "Genus g >= 0")->required();
  hur->add_option("--degree", s.degree, "Degree n >= 2")->required();
  hur->add_option("--out", s.out, "JSON output (stdout if omitted)");

  auto *plan = app.add_subcommand("plan", "Extension plans");
  plan->require_subcommand(1);
  auto *ext = plan->add_subcommand("extension", "Tube plan for p boundary components");
  ext->add_option("--p", s.p, "Boundary component count")->required();
  ext->add_option("--degree", s.degree, "Degree n")->required();
  ext->add_option("--boundary-degrees", s.boundary_degrees, "Degree of each boundary cover (default: all n)")
    ->delimiter(',');
  ext->add_option("--out", s.out, "JSON output (stdout if omitted)");
  auto *hr = plan->add_subcommand("hr", "Branched-cover plan onto the ball package");
  hr->add_option("package", s.pkg, "Descriptor file or built-in id")->required();
  hr->add_option("--degree", s.degree, "Degree n >= 3")->required();
  hr->add_option("--lambda", s.lambda, "Ball radius in (0,1)")->capture_default_str();
  hr->add_option("--max-level", s.max_level, "Last level with similarity records");
  hr->add_option("--out", s.out, "JSON output (stdout if omitted)");

  auto *cls = app.add_subcommand("classify", "Ellipticity verdict for a package");
  cls->add_option("--package", s.pkg, "Descriptor file or built-in id")->required();
  cls->add_option("--lambda", s.lambda, "Similarity ratio in (0,1)")->capture_default_str();
  cls->add_option("--omega", s.omega, "Order of circulation (overrides the registry)");
  cls->add_option("--registry", s.registry, "Extra registry entries (JSON)");
  cls->add_flag("--json", s.as_json, "JSON report");
  cls->add_option("--out", s.out, "Report file (stdout if omitted)");

  std::vector<const char *> argv{"dsl"};
  for (auto const &a : args)
    argv.push_back(a.c_str());
  try
  {
    app.parse(static_cast<int>(argv.size()), argv.data());
  }
  catch (const CLI::CallForHelp &)
  {
    out << app.help();
    return 0;
  }
  catch (const CLI::CallForAllHelp &)
  {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  }
  catch (const CLI::ParseError &e)
  {
    err << "usage error: " << e.what() << "\n";
    const CLI::App *active = &app;
    for (auto *sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub;
         sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front())
      active = sub;
    err << active->help();
    return 2;
  }

  try
  {
    if (validate->parsed())
    {
      auto pkg = load_package(s.pkg);
      json j = {{"id", pkg.id()},
                {"genus", pkg.genus()},
                {"m", pkg.m()},
                {"contractible_children", pkg.contractible_children()},
                {"parent_radius", pkg.parent().radius()},
                {"parent_core_length", pkg.parent().core_length()},
                {"valid", true}};
      emit("", j.dump(2) + "\n", out);
    }
    else if (realize->parsed())
    {
      auto pkg = load_package(s.pkg);
      auto r = package::realize(pkg, package::MultiIndex::parse(s.address));
      json j = package::to_json(r.tube);
      j["address"] = r.address.indices;
      emit(s.out, j.dump(2) + "\n", out);
    }
    else if (metric->parsed())
    {
      auto pkg = load_package(s.pkg);
      auto space = s.h ? semmes::assemble(semmes::TubeShell(pkg), s.lambda, s.depth, *s.h)
                       : semmes::assemble(pkg, s.lambda, s.depth);
      std::vector<std::pair<semmes::PointRef, semmes::PointRef>> pairs;
      if (!s.pairs.empty())
      {
        auto j = read_json(s.pairs, "InvalidPointRef");
        if (!j.is_array())
          throw Error("InvalidPointRef", "pairs file must hold an array of {a, b} objects");
        for (auto const &item : j)
        {
          if (!item.is_object() || !item.contains("a") || !item.contains("b"))
            throw Error("InvalidPointRef", "each pair needs fields a and b");
          pairs.emplace_back(semmes::point_ref_from_json(item.at("a")), semmes::point_ref_from_json(item.at("b")));
        }
      }
      else
        pairs = sample_pairs(space, s.samples, s.seed);
      std::string csv = "ref_a,ref_b,distance,error_bound\n";
      for (auto const &[a, b] : pairs)
      {
        auto d = semmes::distance(space, a, b);
        csv += "\"" + a.str() + "\",\"" + b.str() + "\"," + g17(d.value) + "," + g17(d.error_bound) + "\n";
      }
      emit(s.out, csv, out);
    }
    else if (mod->parsed())
    {
      auto pkg = load_package(s.pkg);
      modulus::Options opt;
      opt.epsilon = s.epsilon;
      opt.max_iterations = s.max_iterations;
      auto table = modulus::scaling_experiment(pkg, s.lambda, s.modulus_depth,
                                               modulus::longitude_mode_from_string(s.mode), opt);
      std::ostringstream csv;
      modulus::write_csv(csv, table);
      emit(s.out, csv.str(), out);
      if (!s.out.empty())
        out << "fitted_ratio " << g17(table.fitted_ratio) << " decay_exponent " << g17(table.decay_exponent) << "\n";
    }
    else if (circ->parsed())
    {
      auto pkg = load_package(s.pkg);
      auto reg = registry_with(s.registry);
      auto ev = circulation::empirical_circulation(pkg, s.k);
      auto bound = reg.lookup(pkg.id());
      json j = {{"evidence", circulation::to_json(ev)},
                {"registry_bound", bound ? circulation::to_json(*bound) : json(nullptr)}};
      emit(s.out, j.dump(2) + "\n", out);
    }
    else if (hur->parsed())
    {
      auto data = hurwitz::build_branch_data(s.genus, s.degree);
      auto report = hurwitz::verify_branch_data(data);
      auto euler = hurwitz::euler_characteristic_of_cover(data);
      json j = {{"branch_data", hurwitz::to_json(data)},
                {"report", hurwitz::to_json(report)},
                {"euler_characteristic", euler.chi},
                {"genus", euler.genus}};
      emit(s.out, j.dump(2) + "\n", out);
    }
    else if (ext->parsed())
    {
      auto degrees = s.boundary_degrees;
      if (degrees.empty() && s.p >= 0)
        degrees.assign(static_cast<std::size_t>(s.p), s.degree);
      auto p = hurwitz::extension_plan(s.p, s.degree, degrees);
      emit(s.out, hurwitz::to_json(p).dump(2) + "\n", out);
    }
    else if (hr->parsed())
    {
      auto pkg = load_package(s.pkg);
      auto p = hurwitz::heinonen_rickman_plan(pkg, s.degree, s.lambda, s.max_level);
      emit(s.out, hurwitz::to_json(p).dump(2) + "\n", out);
    }
    else if (cls->parsed())
    {
      auto pkg = load_package(s.pkg);
      auto reg = registry_with(s.registry);
      auto verdict = classifier::classify(classifier::input_for_package(pkg, s.lambda, s.omega, reg));
      emit(s.out, classifier::report(verdict, s.as_json ? classifier::ReportFormat::json : classifier::ReportFormat::text),
           out);
    }
  }
  catch (const Error &e)
  {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  catch (const std::exception &e)
  {
    err << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args, out, err);
}

} // namespace dsl::cli
