#pragma once

// Straightforward reference implementations used to cross-check the library. They follow the
// textbook definitions directly and share no code with src/.

#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "cool/equiv.hpp"
#include "cool/spec.hpp"

namespace oracle {

using cool::FunctionalKind;
using cool::Lts;
using cool::StateId;
using Pairs = std::set<std::pair<StateId, StateId>>;

inline std::set<StateId> taus(const Lts& lts, StateId s) {
  std::set<StateId> seen{s};
  std::vector<StateId> todo{s};
  while (!todo.empty()) {
    auto x = todo.back();
    todo.pop_back();
    for (const auto& t : lts.out(x)) {
      if (lts.label(t.label) == "tau" && seen.insert(t.target).second) todo.push_back(t.target);
    }
  }
  return seen;
}

// x -(a)-> y: a real a-step, or staying put when a is tau.
inline std::set<StateId> opt(const Lts& lts, StateId s, const std::string& a) {
  std::set<StateId> out;
  if (a == "tau") out.insert(s);
  for (const auto& t : lts.out(s)) {
    if (lts.label(t.label) == a) out.insert(t.target);
  }
  return out;
}

inline std::set<StateId> strict(const Lts& lts, StateId s, const std::string& a) {
  std::set<StateId> out;
  for (const auto& t : lts.out(s)) {
    if (lts.label(t.label) == a) out.insert(t.target);
  }
  return out;
}

// One direction of a transfer condition. `related(x, y)` is oriented challenger-first.
struct Shape {
  bool prefix, stutter, suffix, mid;
};

inline bool answers(const Lts& lts, StateId p, StateId q, Shape sh,
                    const std::function<bool(StateId, StateId)>& related) {
  for (const auto& t : lts.out(p)) {
    auto a = lts.label(t.label);
    bool ok = false;
    std::set<StateId> mids = sh.prefix ? taus(lts, q) : std::set<StateId>{q};
    for (auto m : mids) {
      if (sh.mid && !related(p, m)) continue;
      auto nexts = sh.stutter ? opt(lts, m, a) : strict(lts, m, a);
      for (auto n : nexts) {
        std::set<StateId> lasts = sh.suffix ? taus(lts, n) : std::set<StateId>{n};
        for (auto l : lasts) ok = ok || related(t.target, l);
      }
    }
    if (!ok) return false;
  }
  return true;
}

inline bool transfer(FunctionalKind kind, const Lts& lts, const Pairs& r, StateId p, StateId q) {
  using K = FunctionalKind;
  auto fwd = [&](StateId x, StateId y) { return r.count({x, y}) > 0; };
  auto bwd = [&](StateId x, StateId y) { return r.count({y, x}) > 0; };
  const Shape strong{false, false, false, false}, br{true, true, false, true}, dl{true, true, false, false},
      wk{true, true, true, false}, et{true, true, true, true};
  const Shape stay{false, true, false, false};
  switch (kind) {
    case K::strong_sim: return answers(lts, p, q, strong, fwd);
    case K::strong_bisim: return answers(lts, p, q, strong, fwd) && answers(lts, q, p, strong, bwd);
    case K::branching_sim: return answers(lts, p, q, br, fwd);
    case K::branching_bisim: return answers(lts, p, q, br, fwd) && answers(lts, q, p, br, bwd);
    case K::delay_sim: return answers(lts, p, q, dl, fwd);
    case K::delay_bisim: return answers(lts, p, q, dl, fwd) && answers(lts, q, p, dl, bwd);
    case K::weak_sim: return answers(lts, p, q, wk, fwd);
    case K::weak_bisim: return answers(lts, p, q, wk, fwd) && answers(lts, q, p, wk, bwd);
    case K::eta_sim: return answers(lts, p, q, et, fwd);
    case K::eta_bisim: return answers(lts, p, q, et, fwd) && answers(lts, q, p, et, bwd);
    case K::branching_exp:
      return answers(lts, p, q, stay, fwd) && answers(lts, q, p, {true, false, false, true}, bwd);
    case K::eta_exp: return answers(lts, p, q, stay, fwd) && answers(lts, q, p, {true, false, true, true}, bwd);
    case K::delay_exp: return answers(lts, p, q, stay, fwd) && answers(lts, q, p, {true, false, false, false}, bwd);
  }
  return false;
}

inline bool post_fixed(FunctionalKind kind, const Lts& lts, const Pairs& r) {
  for (auto [p, q] : r) {
    if (!transfer(kind, lts, r, p, q)) return false;
  }
  return true;
}

// Union of all post-fixed points; exponential, for LTSs of at most 4 states.
inline Pairs brute_gfp(FunctionalKind kind, const Lts& lts) {
  std::size_t n = lts.size();
  std::vector<std::pair<StateId, StateId>> all;
  for (StateId a = 0; a < n; ++a)
    for (StateId b = 0; b < n; ++b) all.emplace_back(a, b);
  Pairs out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << all.size()); ++mask) {
    Pairs r;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (mask >> i & 1) r.insert(all[i]);
    if (post_fixed(kind, lts, r)) out.insert(r.begin(), r.end());
  }
  return out;
}

inline Pairs pairs_of(const cool::Relation& r) {
  auto v = r.pairs();
  return Pairs(v.begin(), v.end());
}

// Direct rule interpretation: every (label, target) derivable for a closed term.
inline std::set<std::pair<std::string, cool::Term>> naive_steps(const cool::GsosLanguage& lang, const cool::Term& t) {
  std::set<std::pair<std::string, cool::Term>> out;
  for (const auto& rule : lang.rules) {
    if (rule.op != t.name()) continue;
    cool::Substitution base;
    for (std::size_t i = 0; i < rule.source_vars.size(); ++i) base.insert_or_assign(rule.source_vars[i], t.args()[i]);
    std::vector<cool::Substitution> partial{base};
    for (const auto& prem : rule.premises) {
      std::vector<cool::Substitution> next;
      for (const auto& s : partial) {
        for (const auto& [label, target] : naive_steps(lang, s.at(prem.lhs))) {
          if (label != prem.label) continue;
          auto ext = s;
          ext.insert_or_assign(prem.rhs, target);
          next.push_back(std::move(ext));
        }
      }
      partial = std::move(next);
    }
    for (const auto& s : partial) out.emplace(rule.label, cool::apply_substitution(rule.target, s));
  }
  return out;
}

// Contextual closure generated forwards: close R under every operator of `ops`, keeping terms
// with both sides within `max_size` nodes.
inline std::set<std::pair<cool::Term, cool::Term>> forward_ctx(
    const std::set<std::pair<cool::Term, cool::Term>>& r, const std::vector<std::pair<std::string, std::size_t>>& ops,
    std::size_t max_size) {
  std::function<std::size_t(const cool::Term&)> size = [&](const cool::Term& t) {
    std::size_t n = 1;
    for (const auto& a : t.args()) n += size(a);
    return n;
  };
  auto out = r;
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<std::pair<cool::Term, cool::Term>> cur(out.begin(), out.end());
    for (const auto& [name, arity] : ops) {
      if (arity == 0) {
        grew = out.emplace(cool::Term::app(name), cool::Term::app(name)).second || grew;
        continue;
      }
      if (cur.empty()) continue;
      std::vector<std::size_t> idx(arity, 0);
      while (true) {
        std::vector<cool::Term> ls, rs;
        std::size_t lsize = 1, rsize = 1;
        for (auto i : idx) {
          ls.push_back(cur[i].first);
          rs.push_back(cur[i].second);
          lsize += size(cur[i].first);
          rsize += size(cur[i].second);
        }
        if (lsize <= max_size && rsize <= max_size) {
          grew = out.emplace(cool::Term::app(name, ls), cool::Term::app(name, rs)).second || grew;
        }
        std::size_t k = 0;
        while (k < arity && ++idx[k] == cur.size()) idx[k++] = 0;
        if (k == arity) break;
      }
    }
  }
  return out;
}

}  // namespace oracle
