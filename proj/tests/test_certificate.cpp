#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "cool/upto.hpp"

using namespace cool;

namespace {

std::string corpus_dir() { return std::string(COOL_SOURCE_DIR) + "/corpora"; }

struct Expected {
  Verdict verdict;
  Advisory::Level advisory;
};

const std::map<std::string, Expected> kExpected{
    {"full_choice_ctx", {Verdict::refuted, Advisory::Level::uncertified}},
    {"guarded_constant", {Verdict::certified, Advisory::Level::certified}},
    {"guarded_expansion", {Verdict::certified, Advisory::Level::certified}},
    {"guarded_par_swap", {Verdict::certified, Advisory::Level::certified}},
    {"guarded_strong_sandwich", {Verdict::certified, Advisory::Level::certified}},
    {"guarded_tau_ctx", {Verdict::certified, Advisory::Level::certified}},
    {"repl_bounded", {Verdict::inconclusive, Advisory::Level::certified}},
    {"repl_choice", {Verdict::certified, Advisory::Level::uncertified}},
    {"repl_split", {Verdict::certified, Advisory::Level::uncertified}},
    {"tau_loss_plain", {Verdict::refuted, Advisory::Level::certified}},
    {"tau_loss_unsound", {Verdict::certified, Advisory::Level::unsound}},
};

std::vector<std::filesystem::path> certificates() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir())) {
    if (e.path().string().ends_with(".cert.json")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string stem(const std::filesystem::path& p) {
  auto s = p.filename().string();
  return s.substr(0, s.size() - std::string(".cert.json").size());
}

}  // namespace

TEST_CASE("every corpus certificate has the expected verdict and advisory") {
  auto certs = certificates();
  CHECK(certs.size() == kExpected.size());
  for (const auto& path : certs) {
    auto name = stem(path);
    REQUIRE_MESSAGE(kExpected.count(name), name);
    auto cert = load_certificate(path.string());
    auto run = run_certificate(cert);
    CHECK_MESSAGE(run.report.verdict == kExpected.at(name).verdict, name);
    CHECK_MESSAGE(run.report.advisory.level == kExpected.at(name).advisory, name);
    if (run.report.verdict == Verdict::certified) {
      UpToEngine engine(run.universe, run.context);
      std::string why;
      CHECK_MESSAGE(replay(engine, run.report, cert.relation, cert.technique, &why), name << ": " << why);
    }
  }
}

TEST_CASE("soundly certified relations lie inside the equivalence") {
  int checked = 0;
  for (const auto& path : certificates()) {
    auto cert = load_certificate(path.string());
    auto run = run_certificate(cert);
    if (run.report.verdict != Verdict::certified || run.report.advisory.level != Advisory::Level::certified) continue;
    if (run.universe.truncated()) continue;
    auto g = gfp(cert.kind, run.universe);
    for (const auto& [p, q] : cert.relation) {
      auto x = run.universe.find(p), y = run.universe.find(q);
      REQUIRE(x);
      REQUIRE(y);
      CHECK_MESSAGE(g.contains(*x, *y), stem(path) << ": " << p.str() << " vs " << q.str());
    }
    ++checked;
  }
  CHECK(checked >= 5);
}

TEST_CASE("the unsound sandwich certifies a pair outside the equivalence") {
  auto cert = load_certificate(corpus_dir() + "/tau_loss_unsound.cert.json");
  auto run = run_certificate(cert);
  REQUIRE(run.report.verdict == Verdict::certified);
  auto g = gfp(cert.kind, run.universe);
  const auto& [p, q] = *cert.relation.begin();
  CHECK_FALSE(g.contains(*run.universe.find(p), *run.universe.find(q)));
}

TEST_CASE("reports are deterministic") {
  for (auto name : {"repl_choice", "guarded_par_swap", "tau_loss_plain"}) {
    auto cert = load_certificate(corpus_dir() + "/" + name + ".cert.json");
    auto a = run_certificate(cert), b = run_certificate(cert);
    CHECK(a.report.to_json(a.universe) == b.report.to_json(b.universe));
  }
}

TEST_CASE("replication examples use the expected law chains") {
  auto cert = load_certificate(corpus_dir() + "/repl_choice.cert.json");
  CHECK(cert.budget.max_states <= 5000);
  CHECK(cert.context.rewrite_depth <= 6);
  auto run = run_certificate(cert);
  REQUIRE(run.report.verdict == Verdict::certified);
  for (const auto& [set, laws] : run.context.law_sets) {
    for (const auto& l : laws.laws) CHECK_MESSAGE(l.status.rfind("verified", 0) == 0, l.name << ": " << l.status);
  }
  bool saw_expansion = false;
  for (const auto& pair : run.report.pairs) {
    for (const auto& ch : pair.challenges) {
      REQUIRE(ch.answer);
      for (const auto& ob : ch.answer->obligations) {
        const auto& d = ob.derivation;
        if (d.rule != "sandwich") continue;
        CHECK(d.left_chain.size() + d.right_chain.size() <= 6);
        // strong steps first, expansion steps after
        bool past_strong = false;
        for (const auto& s : d.right_chain) {
          if (s.grade == Grade::expansion) past_strong = saw_expansion = true;
          else CHECK_FALSE(past_strong);
        }
      }
    }
  }
  CHECK(saw_expansion);

  auto split = load_certificate(corpus_dir() + "/repl_split.cert.json");
  auto srun = run_certificate(split);
  REQUIRE(srun.report.verdict == Verdict::certified);
  for (const auto& pair : srun.report.pairs)
    for (const auto& ch : pair.challenges)
      for (const auto& ob : ch.answer->obligations) {
        for (const auto& s : ob.derivation.left_chain) CHECK(s.grade == Grade::strong);
        for (const auto& s : ob.derivation.right_chain) CHECK(s.grade == Grade::strong);
      }
}

TEST_CASE("malformed certificates are rejected") {
  auto dir = std::filesystem::temp_directory_path() / "cool_cert_test";
  std::filesystem::create_directories(dir);
  std::filesystem::copy_file(corpus_dir() + "/ccs_guarded.gsos", dir / "ccs_guarded.gsos",
                             std::filesystem::copy_options::overwrite_existing);
  auto write = [&](const std::string& text) {
    auto p = dir / "c.cert.json";
    std::ofstream(p) << text;
    return p.string();
  };
  CHECK_THROWS_AS(load_certificate(write("{")), Error);
  CHECK_THROWS_AS(load_certificate(write(R"j({"relation": [], "technique": "id"})j")), Error);
  CHECK_THROWS_AS(
      load_certificate(write(R"j({"spec": "ccs_guarded.gsos", "relation": [["nil"]], "technique": "id"})j")), Error);
  CHECK_THROWS_AS(load_certificate(write(
                      R"j({"spec": "ccs_guarded.gsos", "relation": [["nil", "nil"]], "technique": "id", "kind": "x"})j")),
                  Error);
  CHECK_THROWS_AS(load_certificate(write(
                      R"j({"spec": "ccs_guarded.gsos", "relation": [["nil", "foo"]], "technique": "id"})j")),
                  Error);
  CHECK_NOTHROW(load_certificate(write(R"j({"spec": "ccs_guarded.gsos", "relation": [["nil", "nil"]], "technique": "id"})j")));
  CHECK_THROWS_AS(load_certificate((dir / "missing.cert.json").string()), Error);
}
