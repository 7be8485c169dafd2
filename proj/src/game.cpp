#include <deque>
#include <map>

#include "cool/upto.hpp"
#include "json.hpp"

namespace cool {

namespace {

// Answer patterns, read off the transfer conditions of each functional.
enum class Pattern {
  strong,         // Q -a-> Q''
  branching,      // Q => Q' -(a)-> Q'',  P R Q'
  delay,          // Q => Q' -(a)-> Q''
  weak,           // Q => Q' -(a)-> Q'' => Q'''
  eta,            // Q => Q' -(a)-> Q'' => Q''',  P R Q'
  stay,           // Q -(a)-> Q'
  exp_branching,  // P => P' -a-> P'',  P' R Q
  exp_eta,        // P => P' -a-> P'' => P''',  P' R Q
  exp_delay,      // P => P' -a-> P''
};

struct Move {
  bool left;
  Pattern pattern;
};

std::vector<Move> moves(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::strong_sim: return {{true, Pattern::strong}};
    case FunctionalKind::strong_bisim: return {{true, Pattern::strong}, {false, Pattern::strong}};
    case FunctionalKind::branching_sim: return {{true, Pattern::branching}};
    case FunctionalKind::branching_bisim: return {{true, Pattern::branching}, {false, Pattern::branching}};
    case FunctionalKind::delay_sim: return {{true, Pattern::delay}};
    case FunctionalKind::delay_bisim: return {{true, Pattern::delay}, {false, Pattern::delay}};
    case FunctionalKind::weak_sim: return {{true, Pattern::weak}};
    case FunctionalKind::weak_bisim: return {{true, Pattern::weak}, {false, Pattern::weak}};
    case FunctionalKind::eta_sim: return {{true, Pattern::eta}};
    case FunctionalKind::eta_bisim: return {{true, Pattern::eta}, {false, Pattern::eta}};
    case FunctionalKind::branching_exp: return {{true, Pattern::stay}, {false, Pattern::exp_branching}};
    case FunctionalKind::eta_exp: return {{true, Pattern::stay}, {false, Pattern::exp_eta}};
    case FunctionalKind::delay_exp: return {{true, Pattern::stay}, {false, Pattern::exp_delay}};
  }
  return {};
}

bool silent_prefix(Pattern p) { return p != Pattern::strong && p != Pattern::stay; }
bool silent_suffix(Pattern p) { return p == Pattern::weak || p == Pattern::eta || p == Pattern::exp_eta; }
bool may_stutter(Pattern p) {
  return p == Pattern::branching || p == Pattern::delay || p == Pattern::weak || p == Pattern::eta || p == Pattern::stay;
}
bool keeps_mid(Pattern p) {
  return p == Pattern::branching || p == Pattern::eta || p == Pattern::exp_branching || p == Pattern::exp_eta;
}

/// States reachable by silent steps in breadth-first order. Frontier states are listed but
/// not expanded; `touched` records that.
std::vector<StateId> silent_closure(const Lts& lts, StateId from, bool& touched) {
  std::vector<StateId> order{from};
  std::vector<bool> seen(lts.size(), false);
  seen[from] = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto s = order[i];
    if (lts.frontier(s)) {
      touched = true;
      continue;
    }
    for (const auto& t : lts.out(s)) {
      if (t.label == lts.tau() && !seen[t.target]) {
        seen[t.target] = true;
        order.push_back(t.target);
      }
    }
  }
  return order;
}

using Oracle = std::function<MemberResult(StateId, StateId)>;

struct PairOutcome {
  Verdict verdict = Verdict::certified;
  std::vector<ChallengeTrace> challenges;
};

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::refuted || b == Verdict::refuted) return Verdict::refuted;
  if (a == Verdict::inconclusive || b == Verdict::inconclusive) return Verdict::inconclusive;
  return Verdict::certified;
}

ChallengeTrace play_challenge(const Lts& lts, const Move& mv, StateId p, StateId q, const Transition& t,
                              const Oracle& oracle) {
  ChallengeTrace tr;
  tr.left_side = mv.left;
  tr.from = mv.left ? p : q;
  tr.label = lts.label(t.label);
  tr.to = t.target;
  StateId answerer = mv.left ? q : p;
  bool touched = false;
  bool unsure = false;
  std::vector<StateId> mids = silent_prefix(mv.pattern) ? silent_closure(lts, answerer, touched)
                                                        : std::vector<StateId>{answerer};
  std::map<StateId, std::vector<StateId>> suffix;
  for (auto mid : mids) {
    std::vector<StateId> nexts;
    if (may_stutter(mv.pattern) && t.label == lts.tau()) nexts.push_back(mid);
    if (lts.frontier(mid)) {
      touched = true;
    } else {
      for (const auto& u : lts.out(mid)) {
        if (u.label == t.label) nexts.push_back(u.target);
      }
    }
    for (auto next : nexts) {
      std::vector<StateId> lasts{next};
      if (silent_suffix(mv.pattern)) {
        auto it = suffix.find(next);
        if (it == suffix.end()) it = suffix.emplace(next, silent_closure(lts, next, touched)).first;
        lasts = it->second;
      }
      for (auto last : lasts) {
        ++tr.answers_tried;
        std::vector<std::pair<StateId, StateId>> needed;
        if (keeps_mid(mv.pattern)) needed.push_back(mv.left ? std::pair{p, mid} : std::pair{mid, q});
        needed.push_back(mv.left ? std::pair{t.target, last} : std::pair{last, t.target});
        Answer ans{mid, next, last, {}};
        bool ok = true;
        for (auto [a, b] : needed) {
          auto r = oracle(a, b);
          if (r.status != Membership::found) {
            unsure = unsure || r.status == Membership::unknown;
            ok = false;
            break;
          }
          ans.obligations.push_back(Obligation{lts.term(a), lts.term(b), r.status, std::move(r.derivation)});
        }
        if (ok) {
          tr.verdict = Verdict::certified;
          tr.answer = std::move(ans);
          return tr;
        }
      }
    }
  }
  tr.verdict = touched || unsure ? Verdict::inconclusive : Verdict::refuted;
  if (touched) tr.note = "answer search reached unexplored states";
  else if (unsure) tr.note = "some required memberships are undecided";
  else tr.note = "no answer keeps the successors related";
  return tr;
}

PairOutcome play_pair(const Lts& lts, FunctionalKind kind, StateId p, StateId q, const Oracle& oracle,
                      bool stop_on_refutation) {
  PairOutcome out;
  for (const auto& mv : moves(kind)) {
    StateId challenger = mv.left ? p : q;
    if (lts.frontier(challenger)) {
      ChallengeTrace tr;
      tr.left_side = mv.left;
      tr.from = challenger;
      tr.to = challenger;
      tr.verdict = Verdict::inconclusive;
      tr.note = "challenger lies on the exploration frontier";
      out.verdict = combine(out.verdict, tr.verdict);
      out.challenges.push_back(std::move(tr));
      continue;
    }
    for (const auto& t : lts.out(challenger)) {
      auto tr = play_challenge(lts, mv, p, q, t, oracle);
      out.verdict = combine(out.verdict, tr.verdict);
      out.challenges.push_back(std::move(tr));
      if (stop_on_refutation && out.verdict == Verdict::refuted) return out;
    }
  }
  return out;
}

}  // namespace

Membership game_round(const Lts& lts, FunctionalKind kind, StateId p, StateId q,
                      const std::function<Membership(StateId, StateId)>& related) {
  Oracle oracle = [&](StateId a, StateId b) {
    MemberResult r;
    r.status = related(a, b);
    return r;
  };
  auto out = play_pair(lts, kind, p, q, oracle, true);
  switch (out.verdict) {
    case Verdict::certified: return Membership::found;
    case Verdict::refuted: return Membership::not_found;
    case Verdict::inconclusive: return Membership::unknown;
  }
  return Membership::unknown;
}

CheckReport check_up_to(UpToEngine& engine, const TermRelation& r, const TechniqueExpr& f, FunctionalKind kind) {
  const auto& lts = engine.lts();
  CheckReport report;
  report.kind = kind;
  report.technique = f.str();
  report.truncated = lts.truncated();
  std::map<std::pair<StateId, StateId>, MemberResult> memo;
  Oracle oracle = [&](StateId a, StateId b) {
    auto key = std::make_pair(a, b);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, engine.member(f, r, lts.term(a), lts.term(b))).first;
    return it->second;
  };
  for (const auto& [lt, rt] : r) {
    auto p = lts.find(lt), q = lts.find(rt);
    if (!p || !q) {
      throw Error(Error::Kind::invalid_argument, "pair (" + lt.str() + ", " + rt.str() + ") is not in the universe");
    }
    auto outcome = play_pair(lts, kind, *p, *q, oracle, false);
    report.pairs.push_back(PairTrace{*p, *q, outcome.verdict, std::move(outcome.challenges)});
    report.verdict = combine(report.verdict, outcome.verdict);
  }

  const FormatReport* fmt = nullptr;
  FormatReport fr;
  if (const auto* lang = engine.context().lang) {
    fr = classify_format(*lang);
    fmt = &fr;
  }
  std::function<bool(const std::string&)> post_fixed = [&](const std::string& name) {
    auto it = engine.context().constants.find(name);
    if (it == engine.context().constants.end() || lts.truncated()) return false;
    Relation s(lts.size());
    for (const auto& [a, b] : it->second) {
      auto x = lts.find(a), y = lts.find(b);
      if (!x || !y) return false;
      s.insert(*x, *y);
    }
    return is_post_fixed(kind, lts, s);
  };
  report.advisory = soundness_advice(f, kind, fmt, &engine.context().law_sets, &post_fixed);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json step_json(const RewriteStep& s) {
  nlohmann::ordered_json j;
  j["from"] = s.from.str();
  j["to"] = s.to.str();
  j["law"] = s.law;
  j["grade"] = to_string(s.grade);
  j["path"] = s.path;
  return j;
}

nlohmann::ordered_json derivation_json(const Derivation& d) {
  nlohmann::ordered_json j;
  j["rule"] = d.rule;
  j["left"] = d.left.str();
  j["right"] = d.right.str();
  if (!d.note.empty()) j["note"] = d.note;
  if (!d.left_chain.empty() || d.rule == "sandwich") {
    j["left_chain"] = nlohmann::ordered_json::array();
    for (const auto& s : d.left_chain) j["left_chain"].push_back(step_json(s));
  }
  if (!d.right_chain.empty() || d.rule == "sandwich") {
    j["right_chain"] = nlohmann::ordered_json::array();
    for (const auto& s : d.right_chain) j["right_chain"].push_back(step_json(s));
  }
  if (!d.children.empty()) {
    j["children"] = nlohmann::ordered_json::array();
    for (const auto& c : d.children) j["children"].push_back(derivation_json(c));
  }
  return j;
}

}  // namespace

std::string CheckReport::to_json(const Lts& lts) const {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(verdict);
  j["kind"] = to_string(kind);
  j["technique"] = technique;
  j["truncated"] = truncated;
  j["advisory"] = {{"level", to_string(advisory.level)}, {"notes", advisory.notes}};
  j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : pairs) {
    nlohmann::ordered_json pj;
    pj["left"] = lts.term(p.left).str();
    pj["right"] = lts.term(p.right).str();
    pj["verdict"] = to_string(p.verdict);
    pj["challenges"] = nlohmann::ordered_json::array();
    for (const auto& c : p.challenges) {
      nlohmann::ordered_json cj;
      cj["side"] = c.left_side ? "left" : "right";
      cj["from"] = lts.term(c.from).str();
      cj["label"] = c.label;
      cj["to"] = lts.term(c.to).str();
      cj["verdict"] = to_string(c.verdict);
      cj["answers_tried"] = c.answers_tried;
      if (!c.note.empty()) cj["note"] = c.note;
      if (c.answer) {
        nlohmann::ordered_json aj;
        aj["mid"] = lts.term(c.answer->mid).str();
        aj["next"] = lts.term(c.answer->next).str();
        aj["last"] = lts.term(c.answer->last).str();
        aj["obligations"] = nlohmann::ordered_json::array();
        for (const auto& o : c.answer->obligations) {
          aj["obligations"].push_back({{"left", o.left.str()},
                                       {"right", o.right.str()},
                                       {"status", to_string(o.status)},
                                       {"derivation", derivation_json(o.derivation)}});
        }
        cj["answer"] = std::move(aj);
      }
      pj["challenges"].push_back(std::move(cj));
    }
    j["pairs"].push_back(std::move(pj));
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------

bool replay(UpToEngine& engine, const CheckReport& report, const TermRelation& r, const TechniqueExpr& f,
            std::string* why) {
  const auto& lts = engine.lts();
  auto bad = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (report.pairs.size() != r.size()) return bad("report does not cover every pair");
  for (const auto& pt : report.pairs) {
    if (!r.count({lts.term(pt.left), lts.term(pt.right)})) return bad("report pair outside the relation");
    if (report.verdict == Verdict::certified && pt.verdict != Verdict::certified) return bad("uncertified pair");
    auto mvs = moves(report.kind);
    std::size_t expected = 0;
    for (const auto& mv : mvs) expected += lts.out(mv.left ? pt.left : pt.right).size();
    if (pt.verdict == Verdict::certified && pt.challenges.size() != expected) return bad("missing challenges");
    std::size_t idx = 0;
    for (const auto& mv : mvs) {
      StateId challenger = mv.left ? pt.left : pt.right;
      StateId answerer = mv.left ? pt.right : pt.left;
      for (const auto& t : lts.out(challenger)) {
        if (pt.verdict != Verdict::certified) break;
        const auto& c = pt.challenges.at(idx++);
        if (c.left_side != mv.left || c.from != challenger || c.to != t.target || c.label != lts.label(t.label)) {
          return bad("challenge does not match a transition");
        }
        if (!c.answer) return bad("certified challenge without an answer");
        const auto& a = *c.answer;
        bool touched = false;
        if (silent_prefix(mv.pattern)) {
          auto cl = silent_closure(lts, answerer, touched);
          if (std::find(cl.begin(), cl.end(), a.mid) == cl.end()) return bad("answer prefix is not silent");
        } else if (a.mid != answerer) {
          return bad("answer moved before its step");
        }
        bool stepped = false;
        if (may_stutter(mv.pattern) && t.label == lts.tau() && a.next == a.mid) stepped = true;
        for (const auto& u : lts.out(a.mid)) stepped = stepped || (u.label == t.label && u.target == a.next);
        if (!stepped) return bad("answer step does not exist");
        if (silent_suffix(mv.pattern)) {
          auto cl = silent_closure(lts, a.next, touched);
          if (std::find(cl.begin(), cl.end(), a.last) == cl.end()) return bad("answer suffix is not silent");
        } else if (a.last != a.next) {
          return bad("answer moved after its step");
        }
        std::vector<std::pair<StateId, StateId>> needed;
        if (keeps_mid(mv.pattern)) needed.push_back(mv.left ? std::pair{pt.left, a.mid} : std::pair{a.mid, pt.right});
        needed.push_back(mv.left ? std::pair{t.target, a.last} : std::pair{a.last, t.target});
        if (needed.size() != a.obligations.size()) return bad("wrong number of obligations");
        for (std::size_t k = 0; k < needed.size(); ++k) {
          const auto& o = a.obligations[k];
          if (o.left != lts.term(needed[k].first) || o.right != lts.term(needed[k].second)) {
            return bad("obligation does not match the answer");
          }
          if (o.derivation.left != o.left || o.derivation.right != o.right) return bad("derivation endpoints differ");
          if (!check_derivation(engine, f, r, o.derivation, why)) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace cool
