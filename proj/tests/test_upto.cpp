#include "doctest.h"

#include <random>

#include "cool/upto.hpp"
#include "oracles.hpp"

using namespace cool;

namespace {

GsosLanguage corpus(const std::string& name) {
  return load_language_file(std::string(COOL_SOURCE_DIR) + "/corpora/" + name + ".gsos");
}

std::vector<Term> terms_up_to(std::size_t size, const std::vector<std::pair<std::string, std::size_t>>& ops) {
  std::vector<std::vector<Term>> by_size(size + 1);
  for (std::size_t n = 1; n <= size; ++n) {
    for (const auto& [op, arity] : ops) {
      if (arity == 0 && n == 1) by_size[1].push_back(Term::app(op));
      if (arity == 1 && n >= 2) {
        for (const auto& t : by_size[n - 1]) by_size[n].push_back(Term::app(op, {t}));
      }
      if (arity == 2 && n >= 3) {
        for (std::size_t k = 1; k + 1 < n; ++k)
          for (const auto& l : by_size[k])
            for (const auto& r : by_size[n - 1 - k]) by_size[n].push_back(Term::app(op, {l, r}));
      }
    }
  }
  std::vector<Term> out;
  for (const auto& v : by_size) out.insert(out.end(), v.begin(), v.end());
  return out;
}

const std::vector<std::pair<std::string, std::size_t>> kOps{{"nil", 0}, {"pre[a]", 1}, {"pre[tau]", 1}, {"par", 2}};

TermRelation single(const GsosLanguage& lang, const char* l, const char* r) {
  return {{parse_term(l, lang.signature), parse_term(r, lang.signature)}};
}

}  // namespace

TEST_CASE("technique expressions parse and print") {
  CHECK(parse_technique("id").str() == "id");
  CHECK(parse_technique("ctx | const:S ; id").str() == "ctx | const:S; id");
  CHECK(parse_technique("(ctx | id); ctx").str() == "(ctx | id); ctx");
  auto s = parse_technique("sand(gfp:branching_exp, ctx, gfp:strong)");
  CHECK(s.kind == TechniqueExpr::Kind::sandwich_sem);
  CHECK(s.left_kind == FunctionalKind::branching_exp);
  CHECK(s.right_kind == FunctionalKind::strong_bisim);
  CHECK(parse_technique("sand(exp, ctx, exp)").kind == TechniqueExpr::Kind::sandwich_laws);
  CHECK_THROWS_AS(parse_technique("sand(gfp:weak, id, laws)"), Error);
  CHECK_THROWS_AS(parse_technique("ctx |"), Error);
  CHECK_THROWS_AS(parse_technique("frob"), Error);
}

TEST_CASE("matching and rewriting") {
  auto lang = corpus("ccs_repl");
  const auto& sig = lang.signature;
  Substitution b;
  CHECK(match(parse_term("par(p, p)", sig), parse_term("par(nil, nil)", sig), b));
  CHECK(b.at("p").str() == "nil");
  Substitution c;
  CHECK_FALSE(match(parse_term("par(p, p)", sig), parse_term("par(nil, pre[a](nil))", sig), c));

  LawSet laws{"s",
              {Law{"comm", parse_term("par(p, q)", sig), parse_term("par(q, p)", sig), Grade::strong, ""},
               Law{"tau", parse_term("pre[tau](q)", sig), parse_term("q", sig), Grade::expansion, ""}}};
  auto steps = rewrites(parse_term("par(pre[tau](nil), pre[a](nil))", sig), laws, {});
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].law == "comm");
  CHECK(steps[1].to.str() == "par(nil, pre[a](nil))");
  CHECK(steps[1].path == std::vector<std::size_t>{0});
  CHECK(rewrites(parse_term("bang(pre[tau](nil))", sig), laws, {"par"}).empty());
}

TEST_CASE("contextual closure: base and congruence") {
  auto lang = corpus("ccs_guarded");
  Lts empty;
  UpToContext ctx;
  ctx.lang = &lang;
  UpToEngine engine(empty, ctx);
  auto r = single(lang, "pre[a](nil)", "pre[b](nil)");
  auto f = parse_technique("ctx");
  auto m = engine.member(f, r, parse_term("par(pre[a](nil), pre[a](nil))", lang.signature),
                         parse_term("par(pre[b](nil), pre[b](nil))", lang.signature));
  REQUIRE(m.status == Membership::found);
  CHECK(m.derivation.rule == "cong");
  REQUIRE(m.derivation.children.size() == 2);
  CHECK(m.derivation.children[0].rule == "base");
  CHECK(m.derivation.children[1].rule == "base");
  CHECK(engine.member(f, r, parse_term("pre[a](nil)", lang.signature), parse_term("pre[b](nil)", lang.signature))
            .derivation.rule == "base");
  CHECK(engine.member(f, r, parse_term("pre[a](nil)", lang.signature), parse_term("nil", lang.signature)).status ==
        Membership::not_found);
}

TEST_CASE("contextual closure agrees with forward generation") {
  auto lang = corpus("ccs_guarded");
  auto terms = terms_up_to(5, kOps);
  auto small = terms_up_to(3, kOps);
  Lts empty;
  UpToContext ctx;
  ctx.lang = &lang;
  UpToEngine engine(empty, ctx);
  auto f = parse_technique("ctx");
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> pick(0, small.size() - 1);
  for (int round = 0; round < 4; ++round) {
    TermRelation r;
    for (int i = 0; i < 3; ++i) r.emplace(small[pick(rng)], small[pick(rng)]);
    auto closure = oracle::forward_ctx(r, kOps, 5);
    for (const auto& p : terms) {
      for (const auto& q : terms) {
        bool got = engine.member(f, r, p, q).status == Membership::found;
        CHECK_MESSAGE(got == (closure.count({p, q}) > 0), p.str() << " vs " << q.str());
      }
    }
  }
}

TEST_CASE("membership is monotone in the relation") {
  auto lang = corpus("ccs_guarded");
  auto terms = terms_up_to(4, kOps);
  auto lts = explore(lang, terms);
  UpToContext ctx;
  ctx.lang = &lang;
  UpToEngine engine(lts, ctx);
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> pick(0, terms.size() - 1);
  for (auto text : {"ctx", "id | ctx", "ctx; ctx", "sand(gfp:branching_exp, ctx, gfp:branching_exp)"}) {
    auto f = parse_technique(text);
    for (int round = 0; round < 3; ++round) {
      TermRelation r, bigger;
      for (int i = 0; i < 4; ++i) r.emplace(terms[pick(rng)], terms[pick(rng)]);
      bigger = r;
      for (int i = 0; i < 4; ++i) bigger.emplace(terms[pick(rng)], terms[pick(rng)]);
      for (int i = 0; i < 150; ++i) {
        auto p = terms[pick(rng)], q = terms[pick(rng)];
        if (engine.member(f, r, p, q).status == Membership::found) {
          CHECK(engine.member(f, bigger, p, q).status == Membership::found);
        }
      }
    }
  }
}

TEST_CASE("composition applies its left operand first") {
  auto lang = corpus("ccs_guarded");
  Lts empty;
  UpToContext ctx;
  ctx.lang = &lang;
  ctx.constants["S"] = single(lang, "nil", "pre[a](nil)");
  UpToEngine engine(empty, ctx);
  auto p = parse_term("par(nil, nil)", lang.signature);
  auto q = parse_term("par(pre[a](nil), nil)", lang.signature);
  TermRelation none;
  CHECK(engine.member(parse_technique("const:S; ctx"), none, p, q).status == Membership::found);
  CHECK(engine.member(parse_technique("ctx; const:S"), none, p, q).status == Membership::not_found);
}

TEST_CASE("the identity game is the plain transfer check") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 40; ++round) {
    auto lts = random_lts(rng, 5, {"tau", "a"}, 0.25);
    std::bernoulli_distribution coin(0.4);
    Relation rel(lts.size());
    for (StateId a = 0; a < lts.size(); ++a)
      for (StateId b = 0; b < lts.size(); ++b)
        if (coin(rng)) rel.insert(a, b);
    if (round % 4 == 0) rel = gfp(FunctionalKind::branching_bisim, lts);
    auto r = to_term_relation(lts, rel);
    UpToContext ctx;
    UpToEngine engine(lts, ctx);
    auto id = parse_technique("id");
    auto pairs = oracle::pairs_of(rel);
    for (auto kind : kAllKinds) {
      auto rep = check_up_to(engine, r, id, kind);
      bool want = oracle::post_fixed(kind, lts, pairs);
      CHECK_MESSAGE((rep.verdict == Verdict::certified) == want, to_string(kind));
      CHECK(rep.verdict != Verdict::inconclusive);
      if (rep.verdict == Verdict::certified) {
        std::string why;
        CHECK_MESSAGE(replay(engine, rep, r, id, &why), why);
      }
      for (auto [p, q] : rel.pairs()) {
        auto g = game_round(lts, kind, p, q, [&](StateId x, StateId y) {
          return rel.contains(x, y) ? Membership::found : Membership::not_found;
        });
        CHECK((g == Membership::found) == oracle::transfer(kind, lts, pairs, p, q));
      }
    }
  }
}

TEST_CASE("plain branching bisimulation rejects tau.a vs 0; the weak sandwich accepts it") {
  auto lang = corpus("ccs_guarded");
  auto r = single(lang, "pre[tau](pre[a](nil))", "nil");
  auto lts = explore(lang, {r.begin()->first, r.begin()->second});
  UpToContext ctx;
  ctx.lang = &lang;
  UpToEngine engine(lts, ctx);
  auto plain = check_up_to(engine, r, parse_technique("id"), FunctionalKind::branching_bisim);
  CHECK(plain.verdict == Verdict::refuted);
  auto f = parse_technique("sand(gfp:branching_bisim, id, gfp:branching_bisim)");
  auto rep = check_up_to(engine, r, f, FunctionalKind::branching_bisim);
  CHECK(rep.verdict == Verdict::certified);
  CHECK(rep.advisory.level == Advisory::Level::unsound);
  REQUIRE_FALSE(rep.advisory.notes.empty());
  CHECK(rep.advisory.notes[0] == "technique has no soundness certificate (unsound in general)");
  CHECK(replay(engine, rep, r, f));
}

TEST_CASE("replay rejects tampered traces") {
  auto lang = corpus("ccs_guarded");
  auto r = single(lang, "pre[tau](pre[a](nil))", "pre[a](nil)");
  auto lts = explore(lang, {r.begin()->first, r.begin()->second});
  UpToContext ctx;
  ctx.lang = &lang;
  UpToEngine engine(lts, ctx);
  auto f = parse_technique("ctx");
  auto rep = check_up_to(engine, r, f, FunctionalKind::branching_bisim);
  REQUIRE(rep.verdict == Verdict::certified);
  CHECK(replay(engine, rep, r, f));

  auto bad_step = rep;
  auto& ans = *bad_step.pairs[0].challenges[0].answer;
  ans.next = *lts.find(parse_term("nil", lang.signature));
  CHECK_FALSE(replay(engine, bad_step, r, f));

  auto bad_derivation = rep;
  auto& ob = bad_derivation.pairs[0].challenges[0].answer->obligations.back();
  ob.derivation.rule = "base";
  ob.derivation.children.clear();
  std::string why;
  CHECK_FALSE(replay(engine, bad_derivation, r, f, &why));

  auto missing = rep;
  missing.pairs[0].challenges.pop_back();
  CHECK_FALSE(replay(engine, missing, r, f));
}

TEST_CASE("frontier answers are inconclusive, never refuted") {
  auto lang = corpus("ccs_repl");
  auto r = single(lang, "bang(pre[a](nil))", "bang(pre[tau](pre[a](nil)))");
  auto lts = explore(lang, {r.begin()->first, r.begin()->second}, Budget{3});
  REQUIRE(lts.truncated());
  UpToContext ctx;
  UpToEngine engine(lts, ctx);
  auto rep = check_up_to(engine, r, parse_technique("id"), FunctionalKind::branching_bisim);
  CHECK(rep.verdict == Verdict::inconclusive);
}

TEST_CASE("laws are checked on sample instances") {
  auto lang = corpus("ccs_repl");
  const auto& sig = lang.signature;
  std::vector<Term> samples{parse_term("pre[a](nil)", sig), parse_term("pre[b](nil)", sig)};
  Law comm{"comm", parse_term("par(p, q)", sig), parse_term("par(q, p)", sig), Grade::strong, ""};
  CHECK(verify_law(lang, comm, samples, Budget{}).status == "verified");
  Law wrong{"drop", parse_term("plus(p, q)", sig), parse_term("p", sig), Grade::strong, ""};
  auto w = verify_law(lang, wrong, samples, Budget{});
  CHECK(w.status == "failed");
  CHECK(w.failing_instance == "plus(pre[b](nil), pre[a](nil)) ~ pre[b](nil)");
  Law exp{"exp", parse_term("par(bang(p), pre[tau](q))", sig), parse_term("par(bang(p), q)", sig), Grade::expansion, ""};
  CHECK(verify_law(lang, exp, samples, Budget{2000, 4}).status == "verified-at-bound-4");
  Law backwards{"rev", parse_term("q", sig), parse_term("q", sig), Grade::expansion, ""};
  backwards.lhs = parse_term("par(bang(p), q)", sig);
  backwards.rhs = parse_term("par(bang(p), pre[tau](q))", sig);
  CHECK(verify_law(lang, backwards, samples, Budget{2000, 4}).status == "failed");
}

TEST_CASE("law files are validated") {
  auto lang = corpus("ccs_repl");
  auto sets = load_laws(R"j([{"name": "n", "lhs": "par(p, nil)", "rhs": "p", "set": "s"}])j", lang.signature);
  CHECK(sets.at("s").laws.size() == 1);
  CHECK_THROWS_AS(load_laws(R"j([{"lhs": "par(p, nil)", "rhs": "q"}])j", lang.signature), Error);
  CHECK_THROWS_AS(load_laws(R"j([{"lhs": "p", "rhs": "p"}])j", lang.signature), Error);
  CHECK_THROWS_AS(load_laws(R"j([{"lhs": "nil", "rhs": "nil", "grade": "weird"}])j", lang.signature), Error);
}

TEST_CASE("soundness advice") {
  auto full = classify_format(corpus("ccs_full"));
  auto guarded = classify_format(corpus("ccs_guarded"));
  using L = Advisory::Level;
  auto br = FunctionalKind::branching_bisim;

  auto ctx_full = soundness_advice(parse_technique("ctx"), br, &full);
  CHECK(ctx_full.level == L::uncertified);
  REQUIRE(ctx_full.notes.size() == 1);
  CHECK(ctx_full.notes[0].find("format clause 3 witness (plus, arg 1)") != std::string::npos);

  CHECK(soundness_advice(parse_technique("ctx"), br, &guarded).level == L::certified);
  CHECK(soundness_advice(parse_technique("sand(gfp:strong_bisim, ctx, gfp:strong_bisim); ctx"), br, &guarded).level ==
        L::certified);
  CHECK(soundness_advice(parse_technique("sand(gfp:branching_exp, ctx, gfp:branching_exp)"), br, &guarded).level ==
        L::certified);
  CHECK(soundness_advice(parse_technique("sand(gfp:branching_bisim, id, gfp:branching_bisim)"), br, &guarded).level ==
        L::unsound);
  CHECK(soundness_advice(parse_technique("ctx | sand(gfp:weak_bisim, id, gfp:strong_bisim)"), br, &guarded).level ==
        L::unsound);
  CHECK(soundness_advice(parse_technique("sand(gfp:eta_exp, id, gfp:eta_exp)"), FunctionalKind::eta_bisim, nullptr)
            .level == L::certified);
  CHECK(soundness_advice(parse_technique("sand(gfp:eta_exp, id, gfp:eta_exp)"), br, nullptr).level ==
        L::uncertified);
  CHECK(soundness_advice(parse_technique("ctx"), FunctionalKind::strong_bisim, nullptr).level == L::certified);
  CHECK(soundness_advice(parse_technique("const:S"), br, nullptr).level == L::uncertified);
  std::function<bool(const std::string&)> yes = [](const std::string&) { return true; };
  CHECK(soundness_advice(parse_technique("const:S | id"), br, nullptr, nullptr, &yes).level == L::certified);

  std::map<std::string, LawSet> laws;
  laws["s"] = LawSet{"s", {Law{"x", Term::app("nil"), Term::app("nil"), Grade::strong, "failed"}}};
  CHECK(soundness_advice(parse_technique("sand(s, ctx, s)"), br, &guarded, &laws).level == L::uncertified);
  laws["s"].laws[0].status = "verified";
  CHECK(soundness_advice(parse_technique("sand(s, ctx, s)"), br, &guarded, &laws).level == L::certified);
}

TEST_CASE("respectfulness instances") {
  auto lang = corpus("ccs_guarded");
  const auto& sig = lang.signature;
  auto lts = explore(lang, {parse_term("pre[tau](pre[a](nil))", sig)});
  UpToContext ctx;
  ctx.lang = &lang;
  UpToEngine engine(lts, ctx);
  auto r = single(lang, "pre[tau](pre[a](nil))", "nil");
  auto s = r;
  s.emplace(parse_term("pre[a](nil)", sig), parse_term("nil", sig));
  auto br = FunctionalKind::branching_bisim;

  auto id = test_respectful_instance(engine, parse_technique("id"), br, r, s);
  CHECK(id.passed);
  CHECK_FALSE(id.vacuous);
  auto weak = test_respectful_instance(engine, parse_technique("sand(gfp:branching_bisim, id, gfp:branching_bisim)"),
                                       br, r, s);
  CHECK_FALSE(weak.passed);
  CHECK(weak.witness.find("(pre[a](nil), nil)") == 0);
  auto vac = test_respectful_instance(engine, parse_technique("id"), br, r, {});
  CHECK(vac.vacuous);
  CHECK(vac.passed);
}

TEST_CASE("closure properties of respectful functions on tiny systems") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 6; ++round) {
    auto lts = random_lts(rng, 3, {"tau", "a"}, 0.3);
    for (auto kind : {FunctionalKind::branching_bisim, FunctionalKind::weak_bisim, FunctionalKind::branching_exp}) {
      auto rep = companion_property_tests(kind, lts, rng, 10);
      CHECK(rep.checks > 0);
      for (const auto& f : rep.failures) FAIL_CHECK(f);
    }
  }
}
