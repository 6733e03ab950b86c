#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "whmc/config.hpp"

using namespace whmc;
using namespace whmc::cfg;

namespace {

const char* kFluid = R"({
  "states": ["e+", "e-"],
  "drift": {"e+": 2.0, "e-": -3.0},
  "breakpoints": [2.0, 8.0],
  "generators": [
    [[-2.0, 2.0], [1.0, -1.0]],
    [[-3.0, 3.0], [2.0, -2.0]],
    [[-5.0, 5.0], [3.0, -3.0]]
  ],
  "discount": 0.5,
  "functional": {"kind": "Pi-", "from": "e+", "to": "e-"},
  "inversion": {"method": "gaver-stehfest", "terms": 6, "precision": 40},
  "mc": {"paths": 10000, "seed": 20260810}
})";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

}  // namespace

TEST_CASE("the fluid config parses") {
  const auto pc = parse_config(kFluid);
  CHECK(pc.drift.states() == std::vector<std::string>{"e+", "e-"});
  CHECK(pc.drift.v(0) == 2.0);
  CHECK(pc.drift.v(1) == -3.0);
  CHECK(pc.schedule.breakpoints == std::vector<double>{2.0, 8.0});
  CHECK(pc.schedule.generators[2](0, 1) == 5.0);
  CHECK(pc.discount == 0.5);
  CHECK(pc.functional.kind == FunctionalKind::pi_minus);
  CHECK(pc.from_index() == 0);
  CHECK(pc.to_index() == 1);
  CHECK(pc.inversion.method == laplace::Method::gaver_stehfest);
  CHECK(pc.inversion.terms == 6);
  CHECK(pc.inversion.precision == 40);
  CHECK(pc.mc.paths == 10000);
  CHECK(pc.mc.seed == 20260810);
  CHECK(pc.mc.horizon == 0.0);
}

TEST_CASE("inversion and mc blocks are optional") {
  std::string text = kFluid;
  text.replace(text.find("\"inversion\""), 0, "");  // no-op, keep text valid
  const char* minimal = R"({
    "states": ["u", "d"],
    "drift": {"u": 1.0, "d": -1.0},
    "breakpoints": [],
    "generators": [[[-1.0, 1.0], [1.0, -1.0]]],
    "discount": 1.0,
    "functional": {"kind": "Pi+", "from": "d", "to": "u"}
  })";
  const auto pc = parse_config(minimal);
  CHECK(pc.inversion.terms == 0);
  CHECK(pc.inversion.precision == 40);
  CHECK(pc.mc.paths == 10000);
  CHECK(pc.schedule.breakpoint_count() == 0);
}

TEST_CASE("errors carry key paths") {
  // one generator short
  std::string missing = kFluid;
  const auto pos = missing.find("[[-5.0, 5.0], [3.0, -3.0]]");
  missing.erase(pos - 5, 5 + 26);  // ",\n    " + matrix
  const auto msg = expect_config_error(missing);
  CHECK(msg.find("generators") != std::string::npos);
  CHECK(msg.find("expected 3, found 2") != std::string::npos);

  // zero drift names the state
  std::string zero = kFluid;
  zero.replace(zero.find("\"e+\": 2.0"), 9, "\"e+\": 0.0");
  CHECK(expect_config_error(zero).find("drift.e+") != std::string::npos);

  // unknown key
  std::string unknown = kFluid;
  unknown.replace(unknown.find("\"discount\""), 10, "\"discnt\"");
  CHECK(expect_config_error(unknown).find("discnt") != std::string::npos);

  // malformed JSON
  CHECK(expect_config_error("{ not json").find("JSON") != std::string::npos);

  // non-conservative generator is rejected with its index
  std::string bad = kFluid;
  bad.replace(bad.find("[[-3.0, 3.0], [2.0, -2.0]]"), 26,
              "[[-3.0, 2.9], [2.0, -2.0]]");
  CHECK(expect_config_error(bad).find("generators[1]") != std::string::npos);

  // unknown functional state
  std::string who = kFluid;
  who.replace(who.find("\"from\": \"e+\""), 12, "\"from\": \"xx\"");
  CHECK(expect_config_error(who).find("functional.from") != std::string::npos);
}

TEST_CASE("functional kinds and levels") {
  std::string psi = kFluid;
  psi.replace(psi.find(R"("kind": "Pi-", "from": "e+", "to": "e-")"), 39,
              R"("kind": "Psi+", "from": "e+", "to": "e+", "level": 2.5)");
  const auto pc = parse_config(psi);
  CHECK(pc.functional.kind == FunctionalKind::psi_plus);
  CHECK(pc.functional.level == 2.5);

  // Pi with a level is rejected
  std::string pi_level = kFluid;
  pi_level.replace(pi_level.find(R"("kind": "Pi-", "from": "e+", "to": "e-")"), 39,
                   R"("kind": "Pi-", "from": "e+", "to": "e-", "level": 1.0)");
  CHECK(expect_config_error(pi_level).find("level") != std::string::npos);

  // Psi without a level is rejected
  std::string no_level = kFluid;
  no_level.replace(no_level.find(R"("kind": "Pi-", "from": "e+", "to": "e-")"), 39,
                   R"("kind": "Psi-", "from": "e-", "to": "e-")");
  CHECK(expect_config_error(no_level).find("functional.level") != std::string::npos);

  std::string bad_kind = kFluid;
  bad_kind.replace(bad_kind.find("\"Pi-\""), 5, "\"Pi?\"");
  CHECK(expect_config_error(bad_kind).find("functional.kind") != std::string::npos);
}

TEST_CASE("inversion settings validate") {
  std::string talbot = kFluid;
  talbot.replace(talbot.find("\"gaver-stehfest\""), 16, "\"talbot\"");
  CHECK(parse_config(talbot).inversion.method == laplace::Method::talbot);

  std::string low = kFluid;
  low.replace(low.find("\"precision\": 40"), 15, "\"precision\": 10");
  CHECK(expect_config_error(low).find("precision") != std::string::npos);

  std::string terms = kFluid;
  terms.replace(terms.find("\"terms\": 6"), 10, "\"terms\": 0");
  CHECK(expect_config_error(terms).find("terms") != std::string::npos);
}
