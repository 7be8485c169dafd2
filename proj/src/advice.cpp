#include <algorithm>

#include "cool/upto.hpp"

namespace cool {

namespace {

enum class Family { strong, branching, delay, weak, eta };

Family family_of(FunctionalKind k) {
  using K = FunctionalKind;
  switch (k) {
    case K::strong_sim:
    case K::strong_bisim: return Family::strong;
    case K::branching_sim:
    case K::branching_bisim:
    case K::branching_exp: return Family::branching;
    case K::delay_sim:
    case K::delay_bisim:
    case K::delay_exp: return Family::delay;
    case K::weak_sim:
    case K::weak_bisim: return Family::weak;
    case K::eta_sim:
    case K::eta_bisim:
    case K::eta_exp: return Family::eta;
  }
  return Family::strong;
}

void worsen(Advisory& a, Advisory::Level l) {
  if (l == Advisory::Level::unsound || (l == Advisory::Level::uncertified && a.level == Advisory::Level::certified)) {
    a.level = l;
  }
}

void merge(Advisory& into, const Advisory& part) {
  worsen(into, part.level);
  for (const auto& n : part.notes) {
    if (std::find(into.notes.begin(), into.notes.end(), n) == into.notes.end()) into.notes.push_back(n);
  }
}

Advisory leaf(Advisory::Level l, std::string note = {}) {
  Advisory a;
  a.level = l;
  if (!note.empty()) a.notes.push_back(std::move(note));
  return a;
}

Advisory ctx_advice(FunctionalKind kind, const FormatReport* fmt) {
  if (is_expansion(kind)) return leaf(Advisory::Level::uncertified, "ctx: no format certificate for expansion games");
  auto fam = family_of(kind);
  if (fam == Family::strong) return leaf(Advisory::Level::certified);
  if (!fmt) return leaf(Advisory::Level::uncertified, "ctx: language format unknown");
  std::vector<int> needed{1, 2, 3};
  bool granted = false;
  std::string format;
  switch (fam) {
    case Family::branching: granted = fmt->bb_cool; format = "BB"; break;
    case Family::eta: granted = fmt->hb_cool; format = "HB"; needed.push_back(4); break;
    case Family::delay: granted = fmt->db_cool; format = "DB"; needed.push_back(5); break;
    case Family::weak: granted = fmt->wb_cool; format = "WB"; needed = {1, 2, 3, 4, 5}; break;
    case Family::strong: break;
  }
  if (granted) return leaf(Advisory::Level::certified);
  std::string note = "ctx: language is not simply " + format + " cool";
  for (int c : needed) {
    const auto& v = fmt->clauses[c - 1];
    if (v.ok) continue;
    note += "; format clause " + std::to_string(c);
    if (!v.witnesses.empty()) {
      const auto& w = v.witnesses.front();
      note += " witness " + (w.rule.empty() ? "(" + w.op + ", arg " + std::to_string(w.argument) + ")" : "rule " + w.rule);
    }
  }
  return leaf(Advisory::Level::uncertified, note);
}

FunctionalKind expansion_of(Family f) {
  switch (f) {
    case Family::eta: return FunctionalKind::eta_exp;
    case Family::delay: return FunctionalKind::delay_exp;
    default: return FunctionalKind::branching_exp;
  }
}

Advisory side_advice(FunctionalKind kind, FunctionalKind side) {
  if (side == FunctionalKind::strong_bisim) return leaf(Advisory::Level::certified);
  auto fam = family_of(kind);
  bool weak_equivalence = side == FunctionalKind::branching_bisim || side == FunctionalKind::weak_bisim ||
                          side == FunctionalKind::eta_bisim || side == FunctionalKind::delay_bisim;
  if (weak_equivalence) {
    return leaf(Advisory::Level::unsound, "technique has no soundness certificate (unsound in general)");
  }
  if (fam != Family::strong && fam != Family::weak && side == expansion_of(fam)) {
    return leaf(Advisory::Level::certified);
  }
  return leaf(Advisory::Level::uncertified,
              std::string("sandwich side ") + to_string(side) + " has no certificate for " + to_string(kind));
}

Advisory laws_advice(FunctionalKind kind, const std::string& set, const std::map<std::string, LawSet>* laws) {
  if (!laws) return leaf(Advisory::Level::uncertified, "law set '" + set + "' unavailable");
  auto it = laws->find(set);
  if (it == laws->end()) return leaf(Advisory::Level::uncertified, "law set '" + set + "' unavailable");
  Advisory a = leaf(Advisory::Level::certified);
  bool expansion = false;
  for (const auto& law : it->second.laws) {
    expansion = expansion || law.grade == Grade::expansion;
    if (law.status == "failed") {
      merge(a, leaf(Advisory::Level::uncertified, "law '" + law.name + "' failed verification"));
    } else if (law.status.empty() || law.status == "unchecked") {
      merge(a, leaf(Advisory::Level::certified, "law '" + law.name + "' is assumed, not verified"));
    } else if (law.status != "verified") {
      merge(a, leaf(Advisory::Level::certified, "law '" + law.name + "' " + law.status));
    }
  }
  if (expansion) {
    auto fam = family_of(kind);
    if (fam != Family::branching) {
      merge(a, leaf(Advisory::Level::uncertified,
                    "law set '" + set + "' is graded by branching expansion, which certifies only branching games"));
    }
  }
  return a;
}

Advisory walk(const TechniqueExpr& f, FunctionalKind kind, const FormatReport* fmt,
              const std::map<std::string, LawSet>* laws, const std::function<bool(const std::string&)>* post_fixed) {
  using K = TechniqueExpr::Kind;
  switch (f.kind) {
    case K::id: return leaf(Advisory::Level::certified);
    case K::constant:
      if (post_fixed && (*post_fixed)(f.name)) return leaf(Advisory::Level::certified);
      return leaf(Advisory::Level::uncertified, "constant " + f.name + " is not known to be a post-fixed point");
    case K::ctx: return ctx_advice(kind, fmt);
    case K::unite:
    case K::compose: {
      Advisory a = leaf(Advisory::Level::certified);
      for (const auto& p : f.parts) merge(a, walk(p, kind, fmt, laws, post_fixed));
      return a;
    }
    case K::sandwich_sem: {
      Advisory a = side_advice(kind, f.left_kind);
      merge(a, side_advice(kind, f.right_kind));
      merge(a, walk(f.parts.at(0), kind, fmt, laws, post_fixed));
      return a;
    }
    case K::sandwich_laws: {
      Advisory a = laws_advice(kind, f.left_laws, laws);
      merge(a, laws_advice(kind, f.right_laws, laws));
      merge(a, walk(f.parts.at(0), kind, fmt, laws, post_fixed));
      return a;
    }
  }
  return leaf(Advisory::Level::uncertified);
}

}  // namespace

Advisory soundness_advice(const TechniqueExpr& f, FunctionalKind kind, const FormatReport* fmt,
                          const std::map<std::string, LawSet>* laws,
                          const std::function<bool(const std::string&)>* constant_is_post_fixed) {
  return walk(f, kind, fmt, laws, constant_is_post_fixed);
}

// ---------------------------------------------------------------------------

namespace {

Relation image(UpToEngine& engine, const TechniqueExpr& f, const TermRelation& r, std::size_t* unknown) {
  const auto& lts = engine.lts();
  Relation out(lts.size());
  for (StateId a = 0; a < lts.size(); ++a) {
    for (StateId b = 0; b < lts.size(); ++b) {
      auto m = engine.member(f, r, lts.term(a), lts.term(b));
      if (m.status == Membership::found) out.insert(a, b);
      if (m.status == Membership::unknown && unknown) ++*unknown;
    }
  }
  return out;
}

Relation to_state_relation(const Lts& lts, const TermRelation& r) {
  Relation out(lts.size());
  for (const auto& [a, b] : r) {
    auto x = lts.find(a), y = lts.find(b);
    if (!x || !y) throw Error(Error::Kind::invalid_argument, "pair (" + a.str() + ", " + b.str() + ") is not a state");
    out.insert(*x, *y);
  }
  return out;
}

}  // namespace

RespectfulResult test_respectful_instance(UpToEngine& engine, const TechniqueExpr& f, FunctionalKind kind,
                                          const TermRelation& r, const TermRelation& s) {
  const auto& lts = engine.lts();
  if (lts.truncated()) throw Error(Error::Kind::invalid_argument, "respectfulness needs a frontier-free LTS");
  RespectfulResult out;
  auto rs = to_state_relation(lts, r);
  auto ss = to_state_relation(lts, s);
  if (!rs.subset_of(ss) || !rs.subset_of(step(kind, lts, ss))) {
    out.vacuous = true;
    return out;
  }
  auto fr = image(engine, f, r, nullptr);
  auto fs = image(engine, f, s, nullptr);
  for (auto [a, b] : fr.pairs()) {
    ++out.checked_pairs;
    if (!step_contains(kind, lts, fs, a, b)) {
      out.passed = false;
      out.witness = "(" + lts.term(a).str() + ", " + lts.term(b).str() + ") is in f(R) but not in " + to_string(kind) +
                    "(f(S))";
      return out;
    }
  }
  return out;
}

CompanionReport companion_property_tests(FunctionalKind kind, const Lts& lts, std::mt19937_64& rng,
                                         std::size_t samples) {
  CompanionReport rep;
  auto g = gfp(kind, lts);
  UpToContext ctx;
  ctx.constants["GFP"] = to_term_relation(lts, g);
  ctx.constants["EMPTY"] = {};
  UpToEngine engine(lts, ctx);

  auto t = [](std::string_view s) { return parse_technique(s); };
  struct Case {
    std::string property;
    TechniqueExpr f;
  };
  std::vector<Case> cases{
      {"id", t("id")},
      {"union", t("id | const:EMPTY")},
      {"compose", t("id; id")},
      {"constant", t("const:GFP")},
      {"union", t("const:GFP | id")},
      {"compose", t("id; (const:GFP | id)")},
      {"union", t("sand(gfp:strong_bisim, id, gfp:strong_bisim) | const:EMPTY")},
  };

  std::bernoulli_distribution coin(0.5);
  for (auto& c : cases) {
    bool all_passed = true;
    for (std::size_t i = 0; i < samples; ++i) {
      Relation s(lts.size());
      for (StateId a = 0; a < lts.size(); ++a) {
        for (StateId b = 0; b < lts.size(); ++b) {
          if (coin(rng)) s.insert(a, b);
        }
      }
      auto allowed = s.intersect(step(kind, lts, s));
      Relation r(lts.size());
      for (auto [a, b] : allowed.pairs()) {
        if (coin(rng)) r.insert(a, b);
      }
      ++rep.checks;
      auto res = test_respectful_instance(engine, c.f, kind, to_term_relation(lts, r), to_term_relation(lts, s));
      if (!res.passed) {
        all_passed = false;
        rep.failures.push_back(c.property + " " + c.f.str() + ": " + res.witness);
        break;
      }
    }
    if (all_passed) {
      ++rep.checks;
      auto fg = image(engine, c.f, to_term_relation(lts, g), nullptr);
      if (!fg.subset_of(g)) rep.failures.push_back("f(gfp) escapes gfp for " + c.f.str());
    }
  }
  return rep;
}

}  // namespace cool
