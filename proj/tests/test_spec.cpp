#include "doctest.h"

#include <fstream>
#include <sstream>

#include "cool/spec.hpp"

using namespace cool;

namespace {

std::string read(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string corpus(const std::string& name) { return std::string(COOL_SOURCE_DIR) + "/corpora/" + name + ".gsos"; }

Error::Kind load_error(const std::string& text) {
  try {
    load_language(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("accepted:\n" << text);
  return Error::Kind::syntax;
}

const char* kHeader = "labels a, b\nop nil 0\nop pre[*] 1\nop par 2\n";

}  // namespace

TEST_CASE("corpus classifications match their golden files") {
  for (std::string name : {"ccs_guarded", "ccs_full", "ccs_repl"}) {
    auto lang = load_language_file(corpus(name));
    auto golden = read(std::string(COOL_SOURCE_DIR) + "/tests/golden/" + name + ".classify.json");
    CHECK_MESSAGE(classify_format(lang).to_json() + "\n" == golden, name);
  }
}

TEST_CASE("guarded sums are simply BB cool, free choice is not") {
  auto guarded = classify_format(load_language_file(corpus("ccs_guarded")));
  CHECK(guarded.bb_cool);
  CHECK(guarded.wb_cool);
  auto full = classify_format(load_language_file(corpus("ccs_full")));
  CHECK_FALSE(full.bb_cool);
  REQUIRE_FALSE(full.clauses[2].ok);
  CHECK(full.clauses[2].witnesses.front() == Witness{"", "plus", 1});
}

TEST_CASE("rule schemas expand over the label set") {
  auto lang = load_language(std::string(kHeader) + "rule Pre forall A: |- pre[A](x) -A-> x\n");
  CHECK(lang.rules.size() == 3);
  CHECK(lang.rules[0].name == "Pre[tau]");
  auto filtered = load_language(std::string(kHeader) + "rule Pre forall A where A != tau: |- pre[A](x) -A-> x\n");
  CHECK(filtered.rules.size() == 2);
}

TEST_CASE("ill-formed rules are rejected with the matching error") {
  std::string h = kHeader;
  CHECK(load_error(h + "rule R: x -a-/-> y |- par(x, z) -a-> y\n") == Error::Kind::negative_premise);
  CHECK(load_error(h + "rule R: |- par(x, x) -a-> x\n") == Error::Kind::duplicate_source_variable);
  CHECK(load_error(h + "rule R: w -a-> y |- par(x, z) -a-> y\n") == Error::Kind::premise_lhs_not_source);
  CHECK(load_error(h + "rule R: x -a-> y, z -a-> y |- par(x, z) -a-> y\n") == Error::Kind::duplicate_premise_target);
  CHECK(load_error(h + "rule R: x -a-> z |- par(x, z) -a-> z\n") == Error::Kind::premise_target_clashes_source);
  CHECK(load_error(h + "rule R: |- par(x, z) -a-> w\n") == Error::Kind::unhoused_target_variable);
  CHECK(load_error(h + "rule R: |- par(x, z) -c-> x\n") == Error::Kind::unknown_label);
  CHECK(load_error(h + "rule R: |- seq(x, z) -a-> x\n") == Error::Kind::unknown_operator);
  CHECK(load_error(h + "rule R: |- par(x) -a-> x\n") == Error::Kind::arity_mismatch);
  CHECK(load_error(h + "rule R |- par(x, z) -a-> x\n") == Error::Kind::syntax);
  CHECK(load_error(h + "frobnicate\n") == Error::Kind::syntax);
}

TEST_CASE("errors report the offending line") {
  try {
    load_language(std::string(kHeader) + "\nrule R: |- par(x, z) -a-> w\n");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.line() == 6);
  }
}

TEST_CASE("rule properties") {
  auto lang = load_language(std::string(kHeader) +
                            "rule ParL forall A: x1 -A-> y1 |- par(x1, x2) -A-> par(y1, x2)\n"
                            "rule Dup: x1 -a-> y1, x1 -b-> y2 |- par(x1, x2) -a-> par(y1, y2)\n"
                            "rule Keep: x1 -a-> y1 |- par(x1, x2) -a-> par(x1, y1)\n");
  auto patience = rule_properties(lang.rules[0]);  // ParL[tau]
  CHECK(patience.straight);
  CHECK(patience.smooth);
  REQUIRE(patience.patience_argument);
  CHECK(*patience.patience_argument == 1);
  CHECK_FALSE(rule_properties(*lang.rules_for("par")[3]).straight);
  CHECK_FALSE(rule_properties(*lang.rules_for("par")[4]).smooth);

  auto roles = argument_roles(lang);
  CHECK(roles.at({"par", 1}).active);
  CHECK(roles.at({"par", 1}).has_patience);
  CHECK(roles.at({"par", 2}).receiving);
  CHECK_FALSE(roles.at({"par", 2}).has_patience);
}
