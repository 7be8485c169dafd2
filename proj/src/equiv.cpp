#include "cool/equiv.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"

namespace cool {

Relation Relation::identity(std::size_t n) {
  Relation r(n);
  for (StateId s = 0; s < n; ++s) r.insert(s, s);
  return r;
}

Relation Relation::full(std::size_t n) {
  Relation r(n);
  r.bits_.assign(n * n, true);
  return r;
}

void Relation::insert(StateId a, StateId b) {
  if (a >= n_ || b >= n_) throw Error(Error::Kind::invalid_argument, "relation pair outside the universe");
  bits_[a * n_ + b] = true;
}

void Relation::erase(StateId a, StateId b) {
  if (a < n_ && b < n_) bits_[a * n_ + b] = false;
}

std::size_t Relation::size() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }

std::vector<std::pair<StateId, StateId>> Relation::pairs() const {
  std::vector<std::pair<StateId, StateId>> out;
  for (StateId a = 0; a < n_; ++a) {
    for (StateId b = 0; b < n_; ++b) {
      if (bits_[a * n_ + b]) out.emplace_back(a, b);
    }
  }
  return out;
}

Relation Relation::converse() const {
  Relation r(n_);
  for (auto [a, b] : pairs()) r.insert(b, a);
  return r;
}

Relation Relation::compose(const Relation& other) const {
  if (n_ != other.n_) throw Error(Error::Kind::invalid_argument, "relations over different universes");
  Relation r(n_);
  for (auto [a, b] : pairs()) {
    for (StateId c = 0; c < n_; ++c) {
      if (other.contains(b, c)) r.insert(a, c);
    }
  }
  return r;
}

Relation Relation::unite(const Relation& other) const {
  if (n_ != other.n_) throw Error(Error::Kind::invalid_argument, "relations over different universes");
  Relation r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] || other.bits_[i];
  return r;
}

Relation Relation::intersect(const Relation& other) const {
  if (n_ != other.n_) throw Error(Error::Kind::invalid_argument, "relations over different universes");
  Relation r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] && other.bits_[i];
  return r;
}

bool Relation::subset_of(const Relation& other) const {
  if (n_ != other.n_) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

namespace {

struct KindName {
  FunctionalKind kind;
  const char* name;
};

constexpr KindName kNames[] = {
    {FunctionalKind::strong_sim, "strong_sim"},       {FunctionalKind::strong_bisim, "strong_bisim"},
    {FunctionalKind::branching_sim, "branching_sim"}, {FunctionalKind::branching_bisim, "branching_bisim"},
    {FunctionalKind::delay_sim, "delay_sim"},         {FunctionalKind::delay_bisim, "delay_bisim"},
    {FunctionalKind::weak_sim, "weak_sim"},           {FunctionalKind::weak_bisim, "weak_bisim"},
    {FunctionalKind::eta_sim, "eta_sim"},             {FunctionalKind::eta_bisim, "eta_bisim"},
    {FunctionalKind::branching_exp, "branching_exp"}, {FunctionalKind::eta_exp, "eta_exp"},
    {FunctionalKind::delay_exp, "delay_exp"},
};

}  // namespace

const char* to_string(FunctionalKind kind) {
  for (const auto& k : kNames) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

std::optional<FunctionalKind> parse_kind(std::string_view text) {
  for (const auto& k : kNames) {
    if (text == k.name) return k.kind;
  }
  if (text == "strong") return FunctionalKind::strong_bisim;
  if (text == "branching") return FunctionalKind::branching_bisim;
  if (text == "delay") return FunctionalKind::delay_bisim;
  if (text == "weak") return FunctionalKind::weak_bisim;
  if (text == "eta") return FunctionalKind::eta_bisim;
  return std::nullopt;
}

bool is_bisimulation(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::strong_bisim:
    case FunctionalKind::branching_bisim:
    case FunctionalKind::delay_bisim:
    case FunctionalKind::weak_bisim:
    case FunctionalKind::eta_bisim:
      return true;
    default:
      return false;
  }
}

bool is_expansion(FunctionalKind kind) {
  return kind == FunctionalKind::branching_exp || kind == FunctionalKind::eta_exp ||
         kind == FunctionalKind::delay_exp;
}

std::vector<Clause> clauses(FunctionalKind kind) {
  auto sim = [](bool pre, bool stutter, bool post, bool mid) {
    return std::vector<Clause>{{true, pre, stutter, post, mid}};
  };
  auto bisim = [](bool pre, bool stutter, bool post, bool mid) {
    return std::vector<Clause>{{true, pre, stutter, post, mid}, {false, pre, stutter, post, mid}};
  };
  // Expansions: the left process answers right challenges by at least one matching step.
  Clause strongish{true, false, true, false, false};
  switch (kind) {
    case FunctionalKind::strong_sim: return sim(false, false, false, false);
    case FunctionalKind::strong_bisim: return bisim(false, false, false, false);
    case FunctionalKind::branching_sim: return sim(true, true, false, true);
    case FunctionalKind::branching_bisim: return bisim(true, true, false, true);
    case FunctionalKind::delay_sim: return sim(true, true, false, false);
    case FunctionalKind::delay_bisim: return bisim(true, true, false, false);
    case FunctionalKind::weak_sim: return sim(true, true, true, false);
    case FunctionalKind::weak_bisim: return bisim(true, true, true, false);
    case FunctionalKind::eta_sim: return sim(true, true, true, true);
    case FunctionalKind::eta_bisim: return bisim(true, true, true, true);
    case FunctionalKind::branching_exp: return {strongish, {false, true, false, false, true}};
    case FunctionalKind::eta_exp: return {strongish, {false, true, false, true, true}};
    case FunctionalKind::delay_exp: return {strongish, {false, true, false, false, false}};
  }
  return {};
}

// ---------------------------------------------------------------------------

namespace {

/// Answer sets per (state, label) for each clause shape, computed on demand.
class AnswerCache {
 public:
  explicit AnswerCache(const Lts& lts, bool optimistic = false)
      : lts_(lts), optimistic_(optimistic), reach_(lts.size()), touched_(lts.size() * lts.labels().size() * 8, false) {}

  using Answers = std::vector<std::pair<StateId, StateId>>;  // (mid, final)

  const Answers& answers(const Clause& c, StateId from, LabelId label) {
    std::size_t shape = (c.pre_closure ? 4 : 0) | (c.stutter ? 2 : 0) | (c.post_closure ? 1 : 0);
    auto& table = tables_[shape];
    if (table.empty()) table.resize(lts_.size() * lts_.labels().size());
    auto& slot = table[from * lts_.labels().size() + label];
    if (!slot) {
      std::set<std::pair<StateId, StateId>> acc;
      std::vector<StateId> mids = c.pre_closure ? reach(from) : std::vector<StateId>{from};
      bool touched = false;
      for (auto mid : mids) {
        touched = touched || lts_.frontier(mid);
        guard(mid);
        std::vector<StateId> nexts;
        if (c.stutter) {
          nexts = optional_step(lts_, mid, label);
        } else {
          for (const auto& t : lts_.out(mid)) {
            if (t.label == label) nexts.push_back(t.target);
          }
        }
        for (auto next : nexts) {
          if (c.post_closure) {
            for (auto last : reach(next)) {
              touched = touched || lts_.frontier(last);
              guard(last);
              acc.emplace(mid, last);
            }
          } else {
            touched = touched || lts_.frontier(next);
            acc.emplace(mid, next);
          }
        }
      }
      slot.emplace(acc.begin(), acc.end());
      touched_[(from * lts_.labels().size() + label) * 8 + shape] = touched;
    }
    return *slot;
  }

  /// Whether the answers from `from` pass through unexplored states (optimistic mode only).
  bool touched(const Clause& c, StateId from, LabelId label) const {
    std::size_t shape = (c.pre_closure ? 4 : 0) | (c.stutter ? 2 : 0) | (c.post_closure ? 1 : 0);
    return touched_[(from * lts_.labels().size() + label) * 8 + shape];
  }

  bool optimistic() const { return optimistic_; }

  void guard(StateId s) const {
    if (lts_.frontier(s) && !optimistic_) {
      throw Error(Error::Kind::frontier, "state " + lts_.term(s).str() + " lies on the exploration frontier");
    }
  }

 private:
  const std::vector<StateId>& reach(StateId s) {
    if (reach_[s].empty()) reach_[s] = weak_reach(lts_, s);
    return reach_[s];
  }

  const Lts& lts_;
  bool optimistic_;
  std::vector<std::vector<StateId>> reach_;
  std::vector<bool> touched_;
  std::array<std::vector<std::optional<Answers>>, 8> tables_;
};

bool pair_in_step(const std::vector<Clause>& cls, const Lts& lts, AnswerCache& cache, const Relation& r, StateId p,
                  StateId q) {
  for (const auto& c : cls) {
    StateId challenger = c.left_side ? p : q;
    StateId answerer = c.left_side ? q : p;
    if (cache.optimistic() && lts.frontier(challenger)) continue;
    cache.guard(challenger);
    for (const auto& t : lts.out(challenger)) {
      bool matched = false;
      if (cache.optimistic()) {
        cache.answers(c, answerer, t.label);
        if (cache.touched(c, answerer, t.label)) continue;
      }
      for (auto [mid, last] : cache.answers(c, answerer, t.label)) {
        bool ok = c.left_side ? r.contains(t.target, last) : r.contains(last, t.target);
        if (ok && c.mid_related) ok = c.left_side ? r.contains(p, mid) : r.contains(mid, q);
        if (ok) {
          matched = true;
          break;
        }
      }
      if (!matched) return false;
    }
  }
  return true;
}

}  // namespace

Relation step(FunctionalKind kind, const Lts& lts, const Relation& r) {
  AnswerCache cache(lts);
  auto cls = clauses(kind);
  Relation out(lts.size());
  for (StateId p = 0; p < lts.size(); ++p) {
    for (StateId q = 0; q < lts.size(); ++q) {
      if (pair_in_step(cls, lts, cache, r, p, q)) out.insert(p, q);
    }
  }
  return out;
}

bool step_contains(FunctionalKind kind, const Lts& lts, const Relation& r, StateId p, StateId q) {
  AnswerCache cache(lts);
  return pair_in_step(clauses(kind), lts, cache, r, p, q);
}

bool is_post_fixed(FunctionalKind kind, const Lts& lts, const Relation& r) {
  AnswerCache cache(lts);
  auto cls = clauses(kind);
  for (auto [p, q] : r.pairs()) {
    if (!pair_in_step(cls, lts, cache, r, p, q)) return false;
  }
  return true;
}

namespace {

Relation downward_fixpoint(FunctionalKind kind, const Lts& lts, bool optimistic) {
  AnswerCache cache(lts, optimistic);
  auto cls = clauses(kind);
  Relation r = Relation::full(lts.size());
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<StateId, StateId>> drop;
    for (auto [p, q] : r.pairs()) {
      if (!pair_in_step(cls, lts, cache, r, p, q)) drop.emplace_back(p, q);
    }
    for (auto [p, q] : drop) r.erase(p, q);
    changed = !drop.empty();
  }
  return r;
}

}  // namespace

Relation gfp(FunctionalKind kind, const Lts& lts) {
  if (lts.truncated()) throw Error(Error::Kind::frontier, "greatest fixpoint needs a frontier-free LTS");
  return downward_fixpoint(kind, lts, false);
}

Relation gfp_bounded(FunctionalKind kind, const Lts& lts) { return downward_fixpoint(kind, lts, true); }

std::vector<std::vector<StateId>> partition(const Relation& r) {
  std::vector<std::vector<StateId>> out;
  std::vector<bool> placed(r.universe(), false);
  for (StateId s = 0; s < r.universe(); ++s) {
    if (placed[s]) continue;
    std::vector<StateId> cls;
    for (StateId t = s; t < r.universe(); ++t) {
      if (!placed[t] && (t == s || r.contains(s, t))) {
        cls.push_back(t);
        placed[t] = true;
      }
    }
    out.push_back(std::move(cls));
  }
  return out;
}

bool branching_sim_check_bprime(const Lts& lts, const Relation& r) {
  for (auto [x, y] : r.pairs()) {
    if (lts.frontier(x) || closure_touches_frontier(lts, y)) {
      throw Error(Error::Kind::frontier, "relation touches the exploration frontier");
    }
  }
  auto embedded = embed_paired(lts);
  auto saturated = paired_saturate(lts, SaturationKind::bb);
  for (auto [x, y] : r.pairs()) {
    for (const auto& e : embedded.out[x]) {
      bool answered = std::any_of(saturated.out[y].begin(), saturated.out[y].end(), [&](const PairedTransition& s) {
        return s.label == e.label && r.contains(e.mid, s.mid) && r.contains(e.target, s.target);
      });
      if (!answered) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

std::string PairedRule::str() const {
  std::string s = name + ": ";
  for (std::size_t i = 0; i < premises.size(); ++i) {
    if (i) s += ", ";
    const auto& p = premises[i];
    s += p.lhs + " -" + p.label + "-> (" + p.mid + ", " + p.target + ")";
  }
  if (!premises.empty()) s += ' ';
  return s + "|- " + source.str() + " -" + label + "-> (" + mid_target.str() + ", " + target.str() + ")";
}

std::vector<PairedRule> translate_rules_bprime(const GsosLanguage& lang) {
  std::vector<PairedRule> out;
  for (const auto& r : lang.rules) {
    if (!rule_properties(r).straight) {
      throw Error(Error::Kind::not_straight, "rule '" + r.name + "' is not straight", r.line, 1);
    }
    PairedRule pr;
    pr.name = r.name;
    pr.source = r.source();
    pr.label = r.label;
    pr.target = r.target;
    std::set<std::string> used(r.source_vars.begin(), r.source_vars.end());
    for (const auto& p : r.premises) used.insert(p.rhs);
    Substitution rho;
    for (const auto& p : r.premises) {
      std::string mid = p.lhs + "''";
      while (used.count(mid)) mid += "'";
      used.insert(mid);
      rho.emplace(p.lhs, Term::var(mid));
      pr.premises.push_back({p.lhs, p.label, mid, p.rhs});
    }
    // The mid component is the source with each tested argument replaced by its mid state.
    pr.mid_target = apply_substitution(pr.source, rho);
    out.push_back(std::move(pr));
  }
  return out;
}

std::string relation_to_json(const Lts& lts, const Relation& r) {
  nlohmann::json j = nlohmann::json::array();
  for (auto [a, b] : r.pairs()) j.push_back({lts.term(a).str(), lts.term(b).str()});
  return j.dump();
}

Relation relation_from_json(const Lts& lts, std::string_view text, const Signature* sig) {
  auto j = nlohmann::json::parse(text);
  Relation r(lts.size());
  for (const auto& pair : j) {
    auto resolve = [&](const nlohmann::json& side) {
      auto t = parse_term(side.get<std::string>(), sig);
      auto s = lts.find(t);
      if (!s) throw Error(Error::Kind::invalid_argument, "term '" + t.str() + "' is not a state");
      return *s;
    };
    r.insert(resolve(pair.at(0)), resolve(pair.at(1)));
  }
  return r;
}

}  // namespace cool
