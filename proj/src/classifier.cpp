#include "dsl/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace dsl::classifier
{

using nlohmann::json;

namespace
{

const char *const cite_hypotheses = "Theorem 5.2 (hypotheses)";
const char *const cite_qr = "Theorem 5.2";
const char *const cite_omits = "Theorem 5.4";
const char *const cite_bld = "Theorem 1.2 (argument)";

// little-endian base 2^32
using Big = std::vector<std::uint32_t>;

Big big(std::uint64_t v)
{
  Big b;
  while (v)
  {
    b.push_back(static_cast<std::uint32_t>(v));
    v >>= 32;
  }
  return b;
}

Big mul(const Big &a, const Big &b)
{
  Big c(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    std::uint64_t carry = 0;
    for (std::size_t j = 0; j < b.size(); ++j)
    {
      std::uint64_t t = static_cast<std::uint64_t>(a[i]) * b[j] + c[i + j] + carry;
      c[i + j] = static_cast<std::uint32_t>(t);
      carry = t >> 32;
    }
    c[i + b.size()] = static_cast<std::uint32_t>(carry);
  }
  while (!c.empty() && c.back() == 0)
    c.pop_back();
  return c;
}

Big shl(const Big &a, std::size_t bits)
{
  if (a.empty())
    return a;
  Big c(bits / 32, 0);
  unsigned s = bits % 32;
  std::uint32_t carry = 0;
  for (auto limb : a)
  {
    c.push_back((limb << s) | carry);
    carry = s ? limb >> (32 - s) : 0;
  }
  if (carry)
    c.push_back(carry);
  return c;
}

int cmp(const Big &a, const Big &b)
{
  if (a.size() != b.size())
    return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i])
      return a[i] < b[i] ? -1 : 1;
  return 0;
}

std::string num(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void validate(const ClassifierInput &in)
{
  if (in.m == 0)
    throw Error("InvalidInput", "m must be >= 1");
  if (in.omega && !(*in.omega > 0.0 && std::isfinite(*in.omega)))
    throw Error("InvalidInput", "omega must be positive and finite");
  if (!(in.lambda > 0.0 && in.lambda < 1.0))
    throw Error("InvalidInput", "lambda must lie in (0,1)");
}

} // namespace

std::string to_string(VerdictKind kind)
{
  switch (kind)
  {
  case VerdictKind::QRNonElliptic:
    return "QRNonElliptic";
  case VerdictKind::OmitsLimitSet:
    return "OmitsLimitSet";
  case VerdictKind::NoBLDFromR3:
    return "NoBLDFromR3";
  default:
    return "Inconclusive";
  }
}

VerdictKind verdict_kind_from_string(const std::string &text)
{
  for (auto k : {VerdictKind::QRNonElliptic, VerdictKind::OmitsLimitSet, VerdictKind::NoBLDFromR3,
                 VerdictKind::Inconclusive})
    if (to_string(k) == text)
      return k;
  throw Error("InvalidArgument", "unknown verdict kind '" + text + "'");
}

bool Verdict::has(VerdictKind kind) const
{ return std::find(kinds.begin(), kinds.end(), kind) != kinds.end(); }

bool circulation_exceeds(double omega, std::size_t m)
{
  if (!(omega > 0.0))
    return false;
  if (!std::isfinite(omega))
    return true;
  // omega = M 2^E exactly
  int e = 0;
  double f = std::frexp(omega, &e);
  auto M = static_cast<std::uint64_t>(std::ldexp(f, 53));
  long long E = static_cast<long long>(e) - 53;
  Big lhs = mul(mul(big(M), big(M)), big(M));
  Big rhs = mul(big(m), big(m));
  if (E >= 0)
    lhs = shl(lhs, static_cast<std::size_t>(3 * E));
  else
    rhs = shl(rhs, static_cast<std::size_t>(-3 * E));
  return cmp(lhs, rhs) > 0;
}

ClassifierInput input_for_package(const package::InitialPackage &pkg, double lambda, std::optional<double> user_omega,
                                  const circulation::Registry &registry)
{
  ClassifierInput in;
  in.m = pkg.m();
  in.contractible_children = pkg.contractible_children();
  in.lambda = lambda;
  in.package_id = pkg.id();
  if (user_omega)
  {
    in.omega = user_omega;
    in.omega_source = "user";
  }
  else if (auto b = registry.lookup(pkg.id()))
  {
    in.omega = b->omega;
    in.omega_source = "registry";
  }
  return in;
}

Verdict classify(const ClassifierInput &input)
{
  validate(input);
  if (!input.omega)
    throw Error("MissingOmega", "no order of circulation known for '"
                                  + (input.package_id.empty() ? std::string("input") : input.package_id)
                                  + "'; supply one");
  Verdict v;
  v.input = input;
  double omega = *input.omega;
  auto md = static_cast<double>(input.m);
  double threshold = std::cbrt(md * md);
  v.numeric_margin = omega - threshold;

  bool contractible = input.contractible_children;
  v.rationale.push_back({contractible ? "every child H_i is contractible in H"
                                      : "children are not all contractible in H",
                         cite_hypotheses, contractible});
  bool exceeds = circulation_exceeds(omega, input.m);
  std::string ineq = "omega^3 > m^2 with omega = " + num(omega) + ", m = " + std::to_string(input.m) + ": "
                     + num(omega * omega * omega) + (exceeds ? " > " : " <= ") + num(md * md)
                     + " (m^(2/3) = " + num(threshold) + ")";
  v.rationale.push_back({exceeds ? ineq : "failed: " + ineq, cite_hypotheses, exceeds});
  if (!contractible || !exceeds)
  {
    v.kinds = {VerdictKind::Inconclusive};
    return v;
  }

  v.rationale.push_back({"every non-constant quasiregular map R^3 -> S^3/G omits the projected limit set", cite_omits,
                         true});
  v.kinds.push_back(VerdictKind::OmitsLimitSet);
  if (input.m >= 2)
  {
    v.rationale.push_back({"m = " + std::to_string(input.m)
                             + " >= 2: the projected limit set is a Cantor set, so its complement has infinitely "
                               "many ends and a Picard-type bound on ends forces every quasiregular map to be "
                               "constant",
                           cite_qr, true});
    v.kinds.insert(v.kinds.begin(), VerdictKind::QRNonElliptic);
  }
  else
    v.rationale.push_back({"m = 1: the projected limit set is a single point; quasiregular ellipticity is not "
                           "decided",
                           cite_omits, false});
  v.rationale.push_back({"the target is compact and quasiconvex in the Semmes metric, so a BLD map from R^3 would be "
                         "onto, contradicting the omitted set",
                         cite_bld, true});
  v.kinds.push_back(VerdictKind::NoBLDFromR3);
  return v;
}

json to_json(const Verdict &verdict)
{
  auto const &in = verdict.input;
  json input = {{"m", in.m},
                {"omega", in.omega ? json(*in.omega) : json(nullptr)},
                {"contractible_children", in.contractible_children},
                {"lambda", in.lambda},
                {"package_id", in.package_id},
                {"omega_source", in.omega_source}};
  json kinds = json::array();
  for (auto k : verdict.kinds)
    kinds.push_back(to_string(k));
  json steps = json::array();
  for (auto const &s : verdict.rationale)
    steps.push_back({{"claim", s.claim}, {"citation", s.citation}, {"holds", s.holds}});
  return {{"input", input}, {"kinds", kinds}, {"numeric_margin", verdict.numeric_margin}, {"rationale", steps}};
}

Verdict verdict_from_json(const json &j)
{
  try
  {
    Verdict v;
    auto const &in = j.at("input");
    v.input.m = in.at("m").get<std::size_t>();
    if (!in.at("omega").is_null())
      v.input.omega = in.at("omega").get<double>();
    v.input.contractible_children = in.at("contractible_children").get<bool>();
    v.input.lambda = in.at("lambda").get<double>();
    v.input.package_id = in.at("package_id").get<std::string>();
    v.input.omega_source = in.at("omega_source").get<std::string>();
    for (auto const &k : j.at("kinds"))
      v.kinds.push_back(verdict_kind_from_string(k.get<std::string>()));
    v.numeric_margin = j.at("numeric_margin").get<double>();
    for (auto const &s : j.at("rationale"))
      v.rationale.push_back({s.at("claim").get<std::string>(), s.at("citation").get<std::string>(),
                             s.at("holds").get<bool>()});
    return v;
  }
  catch (const json::exception &e)
  {
    throw Error("InvalidReport", e.what());
  }
  catch (const Error &e)
  {
    throw Error("InvalidReport", e.what());
  }
}

std::string report(const Verdict &verdict, ReportFormat format)
{
  if (format == ReportFormat::json)
    return to_json(verdict).dump(2) + "\n";
  std::string out;
  auto const &in = verdict.input;
  out += "package: " + (in.package_id.empty() ? std::string("-") : in.package_id) + "\n";
  out += "m: " + std::to_string(in.m) + "\n";
  out += "omega: " + (in.omega ? num(*in.omega) : std::string("-"))
         + (in.omega_source.empty() ? "" : " (" + in.omega_source + ")") + "\n";
  out += "lambda: " + num(in.lambda) + "\n";
  out += "verdict:";
  for (auto k : verdict.kinds)
    out += " " + to_string(k);
  out += "\nmargin: " + num(verdict.numeric_margin) + "\nrationale:\n";
  for (std::size_t i = 0; i < verdict.rationale.size(); ++i)
  {
    auto const &s = verdict.rationale[i];
    out += "  " + std::to_string(i + 1) + ". [" + (s.holds ? "ok" : "--") + "] " + s.claim + " [" + s.citation
           + "]\n";
  }
  return out;
}

} // namespace dsl::classifier
