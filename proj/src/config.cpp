#include "whmc/config.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace whmc::cfg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw_config(path + ": " + what);
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.contains(it.key()))
      fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
}

double number_at(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

FunctionalKind parse_kind(const std::string& s) {
  if (s == "Pi+") return FunctionalKind::pi_plus;
  if (s == "Psi+") return FunctionalKind::psi_plus;
  if (s == "Pi-") return FunctionalKind::pi_minus;
  if (s == "Psi-") return FunctionalKind::psi_minus;
  fail("functional.kind", "expected one of Pi+, Psi+, Pi-, Psi- (got '" + s + "')");
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_config(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw_config("config: expected a JSON object");
  reject_unknown(root,
                 {"states", "drift", "breakpoints", "generators", "discount",
                  "functional", "inversion", "mc"},
                 "");

  // states and drift
  const json& jstates = need(root, "states", "");
  if (!jstates.is_array() || jstates.empty()) fail("states", "expected a nonempty list");
  std::vector<std::string> states;
  for (const auto& s : jstates) {
    if (!s.is_string()) fail("states", "labels must be strings");
    states.push_back(s.get<std::string>());
  }
  const int d = static_cast<int>(states.size());

  const json& jdrift = need(root, "drift", "");
  if (!jdrift.is_object()) fail("drift", "expected a label -> rate map");
  Vector v(d);
  for (int i = 0; i < d; ++i) {
    auto it = jdrift.find(states[i]);
    if (it == jdrift.end()) fail("drift." + states[i], "missing");
    v(i) = number_at(*it, "drift." + states[i]);
    if (v(i) == 0.0) fail("drift." + states[i], "rate must be nonzero");
  }
  for (auto it = jdrift.begin(); it != jdrift.end(); ++it)
    if (std::find(states.begin(), states.end(), it.key()) == states.end())
      fail("drift." + it.key(), "unknown state");
  chain::DriftModel drift(states, v);

  // schedule
  chain::RegimeSchedule schedule;
  const json& jbp = need(root, "breakpoints", "");
  if (!jbp.is_array()) fail("breakpoints", "expected a list");
  for (std::size_t k = 0; k < jbp.size(); ++k)
    schedule.breakpoints.push_back(
        number_at(jbp[k], "breakpoints[" + std::to_string(k) + "]"));

  const json& jgens = need(root, "generators", "");
  if (!jgens.is_array()) fail("generators", "expected a list of matrices");
  if (jgens.size() != jbp.size() + 1)
    fail("generators", "expected " + std::to_string(jbp.size() + 1) + ", found " +
                           std::to_string(jgens.size()));
  for (std::size_t k = 0; k < jgens.size(); ++k) {
    const std::string path = "generators[" + std::to_string(k) + "]";
    const json& jm = jgens[k];
    if (!jm.is_array() || static_cast<int>(jm.size()) != d)
      fail(path, "expected " + std::to_string(d) + " rows");
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
      if (!jm[r].is_array() || static_cast<int>(jm[r].size()) != d)
        fail(path + "[" + std::to_string(r) + "]",
             "expected " + std::to_string(d) + " entries");
      for (int c = 0; c < d; ++c)
        m(r, c) = number_at(jm[r][c],
                            path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    const auto report = chain::validate_generator(m);
    if (!report.ok()) fail(path, report.violations.front());
    schedule.generators.push_back(std::move(m));
  }
  schedule.validate();

  ProblemConfig out{std::move(schedule), std::move(drift)};

  const json& jdisc = need(root, "discount", "");
  out.discount = number_at(jdisc, "discount");
  if (!(out.discount > 0)) fail("discount", "must be positive");

  // functional
  const json& jf = need(root, "functional", "");
  if (!jf.is_object()) fail("functional", "expected an object");
  reject_unknown(jf, {"kind", "from", "to", "level"}, "functional");
  out.functional.kind = parse_kind(need(jf, "kind", "functional").get<std::string>());
  out.functional.from = need(jf, "from", "functional").get<std::string>();
  out.functional.to = need(jf, "to", "functional").get<std::string>();
  if (out.from_index() < 0) fail("functional.from", "unknown state '" + out.functional.from + "'");
  if (out.to_index() < 0) fail("functional.to", "unknown state '" + out.functional.to + "'");
  const bool is_psi = out.functional.kind == FunctionalKind::psi_plus ||
                      out.functional.kind == FunctionalKind::psi_minus;
  if (is_psi) {
    out.functional.level = number_at(need(jf, "level", "functional"), "functional.level");
    if (!(out.functional.level > 0)) fail("functional.level", "must be positive");
  } else if (jf.contains("level")) {
    fail("functional.level", "only Psi kinds take a level");
  }

  // inversion (optional, defaults apply)
  if (root.contains("inversion")) {
    const json& ji = root["inversion"];
    if (!ji.is_object()) fail("inversion", "expected an object");
    reject_unknown(ji, {"method", "terms", "precision"}, "inversion");
    if (ji.contains("method")) {
      const std::string m = ji["method"].get<std::string>();
      if (m == "gaver-stehfest")
        out.inversion.method = laplace::Method::gaver_stehfest;
      else if (m == "talbot")
        out.inversion.method = laplace::Method::talbot;
      else
        fail("inversion.method", "expected gaver-stehfest or talbot (got '" + m + "')");
    }
    if (ji.contains("terms")) {
      out.inversion.terms = ji["terms"].get<int>();
      if (out.inversion.terms < 1) fail("inversion.terms", "must be >= 1");
    }
    if (ji.contains("precision")) {
      out.inversion.precision = ji["precision"].get<int>();
      if (out.inversion.precision < 16) fail("inversion.precision", "must be >= 16");
    }
  }

  // mc (optional, defaults apply)
  if (root.contains("mc")) {
    const json& jm = root["mc"];
    if (!jm.is_object()) fail("mc", "expected an object");
    reject_unknown(jm, {"paths", "seed", "horizon"}, "mc");
    if (jm.contains("paths")) {
      out.mc.paths = jm["paths"].get<std::int64_t>();
      if (out.mc.paths < 1) fail("mc.paths", "must be >= 1");
    }
    if (jm.contains("seed")) out.mc.seed = jm["seed"].get<std::uint64_t>();
    if (jm.contains("horizon")) {
      out.mc.horizon = number_at(jm["horizon"], "mc.horizon");
      if (!(out.mc.horizon > 0)) fail("mc.horizon", "must be positive");
    }
  }

  return out;
}

}  // namespace whmc::cfg
