#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "dsl/classifier.hpp"
#include "dsl/error.hpp"
#include "dsl/package.hpp"

using namespace dsl;
using namespace dsl::classifier;

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

ClassifierInput input(std::size_t m, double omega, bool contractible = true)
{
  ClassifierInput in;
  in.m = m;
  in.omega = omega;
  in.contractible_children = contractible;
  in.lambda = 0.4;
  return in;
}

} // namespace

TEST_CASE("bing verdict")
{
  auto in = input_for_package(package::build_bing(), 0.4);
  CHECK(in.m == 2);
  CHECK(in.omega == 2.0);
  CHECK(in.omega_source == "registry");
  auto v = classify(in);
  CHECK(v.kinds == std::vector<VerdictKind>{VerdictKind::QRNonElliptic, VerdictKind::OmitsLimitSet,
                                            VerdictKind::NoBLDFromR3});
  CHECK(v.numeric_margin == doctest::Approx(2.0 - std::cbrt(4.0)).epsilon(1e-14));
  CHECK(v.numeric_margin == doctest::Approx(0.4126).epsilon(1e-3));
  auto text = report(v, ReportFormat::json);
  CHECK(text.find("Theorem 5.2") != std::string::npos);
}

TEST_CASE("whitehead verdict")
{
  auto v = classify(input_for_package(package::build_whitehead(), 0.4));
  CHECK(v.input.m == 1);
  CHECK(v.kinds == std::vector<VerdictKind>{VerdictKind::OmitsLimitSet, VerdictKind::NoBLDFromR3});
  CHECK_FALSE(v.has(VerdictKind::QRNonElliptic));
  CHECK(v.numeric_margin == 1.0);
  // quasiregular ellipticity stays open for m = 1
  bool open = false;
  for (auto const &s : v.rationale)
    open = open || (!s.holds && s.claim.find("not decided") != std::string::npos);
  CHECK(open);
}

TEST_CASE("inconclusive and missing omega")
{
  auto v = classify(input(2, 1.5));
  CHECK(v.kinds == std::vector<VerdictKind>{VerdictKind::Inconclusive});
  CHECK(v.numeric_margin < 0.0);
  auto text = report(v, ReportFormat::text);
  CHECK(text.find("failed: omega^3 > m^2") != std::string::npos);
  CHECK(report(v, ReportFormat::json).find("omega^3 > m^2") != std::string::npos);

  auto nc = classify(input(2, 5.0, false));
  CHECK(nc.kinds == std::vector<VerdictKind>{VerdictKind::Inconclusive});
  CHECK_FALSE(nc.rationale[0].holds);

  auto antoine = input_for_package(package::build_antoine(3), 0.3);
  CHECK_FALSE(antoine.omega.has_value());
  CHECK(error_kind([&] { classify(antoine); }) == "MissingOmega");
  CHECK(classify(input_for_package(package::build_antoine(3), 0.3, 3.0)).has(VerdictKind::QRNonElliptic));

  CHECK(error_kind([] { classify(input(0, 2.0)); }) == "InvalidInput");
  CHECK(error_kind([] { classify(input(2, -1.0)); }) == "InvalidInput");
  auto bad = input(2, 2.0);
  bad.lambda = 1.0;
  CHECK(error_kind([&] { classify(bad); }) == "InvalidInput");
}

TEST_CASE("exact threshold comparison")
{
  CHECK(circulation_exceeds(2.0, 2));
  CHECK_FALSE(circulation_exceeds(1.0, 1));
  CHECK(circulation_exceeds(std::nextafter(1.0, 2.0), 1));
  // perfect cubes: m^(2/3) is an integer
  CHECK_FALSE(circulation_exceeds(4.0, 8));
  CHECK(circulation_exceeds(std::nextafter(4.0, 5.0), 8));
  CHECK_FALSE(circulation_exceeds(9.0, 27));
  CHECK_FALSE(circulation_exceeds(std::nextafter(9.0, 0.0), 27));
  CHECK(circulation_exceeds(std::nextafter(9.0, 10.0), 27));
  CHECK(circulation_exceeds(1e-300, 0) == true);
  CHECK_FALSE(circulation_exceeds(1e-300, 1));
  CHECK(circulation_exceeds(1e300, 1000000));

  // neighbours of cbrt(m^2) against an extended-precision cube
  for (std::size_t m = 2; m <= 200; ++m)
  {
    double c = std::cbrt(static_cast<double>(m * m));
    for (double w : {std::nextafter(c, 0.0), c, std::nextafter(c, 1e9)})
    {
      long double lw = w;
      bool expect = lw * lw * lw > static_cast<long double>(m * m);
      CHECK(circulation_exceeds(w, m) == expect);
    }
  }
}

TEST_CASE("inconclusive below the threshold for any other fields")
{
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> frac(0.01, 1.0);
  for (int t = 0; t < 300; ++t)
  {
    std::size_t m = 1 + rng() % 20;
    double w = std::cbrt(static_cast<double>(m * m)) * frac(rng);
    if (circulation_exceeds(w, m))
      continue;
    auto in = input(m, w, rng() % 2 == 0);
    in.lambda = 0.05 + 0.9 * frac(rng);
    CHECK(classify(in).kinds == std::vector<VerdictKind>{VerdictKind::Inconclusive});
  }
}

TEST_CASE("monotone in omega")
{
  for (std::size_t m = 1; m <= 6; ++m)
    for (bool contractible : {true, false})
    {
      std::vector<VerdictKind> previous;
      for (double w = 0.25; w <= 6.0; w += 0.125)
      {
        auto v = classify(input(m, w, contractible));
        for (auto k : previous)
          if (k != VerdictKind::Inconclusive)
            CHECK(v.has(k));
        if (!v.has(VerdictKind::Inconclusive))
          CHECK(v.numeric_margin > 0.0);
        previous = v.kinds;
      }
    }
}

TEST_CASE("report round trip")
{
  std::vector<Verdict> verdicts{classify(input_for_package(package::build_bing(), 0.4)),
                                classify(input_for_package(package::build_whitehead(), 0.3)), classify(input(2, 1.5)),
                                classify(input(3, 2.5, false))};
  for (auto const &v : verdicts)
  {
    auto j = nlohmann::json::parse(report(v, ReportFormat::json));
    CHECK(verdict_from_json(j) == v);
    for (auto const &s : j.at("rationale"))
      CHECK_FALSE(s.at("citation").get<std::string>().empty());
  }
  CHECK(error_kind([] { verdict_from_json(nlohmann::json{{"kinds", {"Nope"}}}); }) == "InvalidReport");
}
