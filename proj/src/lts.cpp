#include "cool/lts.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cool {

Lts::Lts() { labels_.emplace_back(kTau); }

Lts::Lts(const std::vector<std::string>& labels) : Lts() {
  for (const auto& l : labels) label_id(l);
}

StateId Lts::add_state(const Term& term, bool frontier) {
  auto id = static_cast<StateId>(states_.size());
  states_.push_back(term);
  out_.emplace_back();
  frontier_.push_back(frontier);
  index_.emplace(term, id);
  return id;
}

StateId Lts::intern(const Term& term) {
  if (auto s = find(term)) return *s;
  return add_state(term);
}

void Lts::add_transition(StateId from, LabelId label, StateId to) {
  if (from >= size() || to >= size() || label >= labels_.size()) {
    throw Error(Error::Kind::invalid_argument, "transition endpoint out of range");
  }
  out_[from].push_back(Transition{label, to});
}

void Lts::add_transition(StateId from, const std::string& label, StateId to) {
  add_transition(from, label_id(label), to);
}

void Lts::normalize() {
  for (auto& o : out_) {
    std::sort(o.begin(), o.end());
    o.erase(std::unique(o.begin(), o.end()), o.end());
  }
}

LabelId Lts::label_id(const std::string& label) {
  if (auto l = find_label(label)) return *l;
  labels_.push_back(label);
  return static_cast<LabelId>(labels_.size() - 1);
}

std::optional<LabelId> Lts::find_label(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<LabelId>(it - labels_.begin());
}

std::size_t Lts::transition_count() const {
  std::size_t n = 0;
  for (const auto& o : out_) n += o.size();
  return n;
}

bool Lts::truncated() const { return std::find(frontier_.begin(), frontier_.end(), true) != frontier_.end(); }

std::optional<StateId> Lts::find(const Term& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Lts::to_aldebaran() const {
  std::ostringstream os;
  os << "des (0, " << transition_count() << ", " << size() << ")\n";
  for (StateId s = 0; s < size(); ++s) {
    for (const auto& t : out_[s]) os << '(' << s << ", \"" << labels_[t.label] << "\", " << t.target << ")\n";
  }
  return os.str();
}

std::string Lts::to_json() const {
  nlohmann::ordered_json j;
  j["labels"] = labels_;
  j["states"] = nlohmann::ordered_json::array();
  for (StateId s = 0; s < size(); ++s) {
    j["states"].push_back({{"id", s}, {"term", states_[s].str()}, {"frontier", static_cast<bool>(frontier_[s])}});
  }
  j["transitions"] = nlohmann::ordered_json::array();
  for (StateId s = 0; s < size(); ++s) {
    for (const auto& t : out_[s]) j["transitions"].push_back({s, labels_[t.label], t.target});
  }
  return j.dump(2);
}

Lts Lts::from_aldebaran(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  static const std::regex header(R"re(^\s*des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$)re");
  static const std::regex edge(R"re(^\s*\(\s*(\d+)\s*,\s*"([^"]*)"\s*,\s*(\d+)\s*\)\s*$)re");
  std::smatch m;
  if (!std::getline(in, line) || !std::regex_match(line, m, header)) {
    throw Error(Error::Kind::syntax, "missing 'des' header", 1, 1);
  }
  Lts lts;
  auto n = std::stoul(m[3].str());
  for (std::size_t s = 0; s < n; ++s) lts.add_state(Term::app("s" + std::to_string(s)));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!std::regex_match(line, m, edge)) throw Error(Error::Kind::syntax, "malformed transition", line_no, 1);
    auto from = std::stoul(m[1].str()), to = std::stoul(m[3].str());
    if (from >= n || to >= n) throw Error(Error::Kind::invalid_argument, "state out of range", line_no, 1);
    auto label = m[2].str() == "i" ? std::string(kTau) : m[2].str();
    lts.add_transition(static_cast<StateId>(from), label, static_cast<StateId>(to));
  }
  lts.normalize();
  return lts;
}

Lts Lts::from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text);
  Lts lts;
  for (const auto& l : j.at("labels")) lts.label_id(l.get<std::string>());
  for (const auto& s : j.at("states")) {
    lts.add_state(parse_term(s.at("term").get<std::string>(), nullptr), s.value("frontier", false));
  }
  for (const auto& t : j.at("transitions")) {
    lts.add_transition(t.at(0).get<StateId>(), t.at(1).get<std::string>(), t.at(2).get<StateId>());
  }
  lts.normalize();
  return lts;
}

// ---------------------------------------------------------------------------

std::vector<Semantics::Step> Semantics::derivations(const Term& t) {
  std::vector<Step> out;
  if (t.is_var()) return out;
  for (const Rule* r : lang_->rules_for(t.name())) {
    if (r->source_vars.size() != t.args().size()) continue;
    Substitution rho;
    for (std::size_t i = 0; i < r->source_vars.size(); ++i) rho.emplace(r->source_vars[i], t.args()[i]);
    std::vector<std::vector<Term>> options;
    bool feasible = true;
    for (const auto& p : r->premises) {
      std::vector<Term> targets;
      for (const auto& [label, target] : transitions(rho.at(p.lhs))) {
        if (label == p.label) targets.push_back(target);
      }
      if (targets.empty()) {
        feasible = false;
        break;
      }
      options.push_back(std::move(targets));
    }
    if (!feasible) continue;
    std::vector<std::size_t> idx(options.size(), 0);
    while (true) {
      auto full = rho;
      for (std::size_t k = 0; k < idx.size(); ++k) full.insert_or_assign(r->premises[k].rhs, options[k][idx[k]]);
      out.push_back(Step{r->label, apply_substitution(r->target, full), r, full});
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  return out;
}

const std::vector<std::pair<std::string, Term>>& Semantics::transitions(const Term& t) {
  if (auto it = memo_.find(t); it != memo_.end()) return it->second;
  std::vector<std::pair<std::string, Term>> out;
  for (auto& step : derivations(t)) out.emplace_back(step.label, std::move(step.target));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return memo_.emplace(t, std::move(out)).first->second;
}

Lts explore(const GsosLanguage& lang, const std::vector<Term>& roots, const Budget& budget) {
  Semantics sem(lang);
  return explore(sem, roots, budget);
}

Lts explore(Semantics& sem, const std::vector<Term>& roots, const Budget& budget) {
  if (budget.max_states == 0) throw Error(Error::Kind::budget, "state budget must be positive");
  Lts lts(sem.language().signature.labels());
  std::vector<std::size_t> depth;
  std::deque<StateId> queue;
  for (const auto& r : roots) {
    if (!r.closed()) throw Error(Error::Kind::invalid_argument, "root term '" + r.str() + "' is not closed");
    if (lts.find(r)) continue;
    if (lts.size() >= budget.max_states) throw Error(Error::Kind::budget, "more roots than the state budget");
    queue.push_back(lts.add_state(r));
    depth.push_back(0);
  }
  bool exhausted = false;
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    if (exhausted) {
      lts.set_frontier(s, true);
      continue;
    }
    const auto& succ = sem.transitions(lts.term(s));
    if (succ.empty()) continue;
    if (budget.max_depth && depth[s] >= *budget.max_depth) {
      lts.set_frontier(s, true);
      continue;
    }
    std::size_t fresh = 0;
    std::set<Term> seen;
    for (const auto& [label, target] : succ) {
      if (!lts.find(target) && seen.insert(target).second) ++fresh;
    }
    if (lts.size() + fresh > budget.max_states) {
      lts.set_frontier(s, true);
      exhausted = true;
      continue;
    }
    for (const auto& [label, target] : succ) {
      auto existing = lts.find(target);
      StateId t;
      if (existing) {
        t = *existing;
      } else {
        t = lts.add_state(target);
        depth.push_back(depth[s] + 1);
        queue.push_back(t);
      }
      lts.add_transition(s, label, t);
    }
  }
  lts.normalize();
  return lts;
}

// ---------------------------------------------------------------------------

std::vector<StateId> weak_reach(const Lts& lts, StateId from) {
  std::vector<bool> seen(lts.size(), false);
  std::vector<StateId> stack{from}, out;
  seen[from] = true;
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    out.push_back(s);
    for (const auto& t : lts.out(s)) {
      if (t.label == lts.tau() && !seen[t.target]) {
        seen[t.target] = true;
        stack.push_back(t.target);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StateId> optional_step(const Lts& lts, StateId from, LabelId label) {
  std::vector<StateId> out;
  if (label == lts.tau()) out.push_back(from);
  for (const auto& t : lts.out(from)) {
    if (t.label == label) out.push_back(t.target);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<StateId> weak_step(const Lts& lts, StateId from, LabelId label) {
  std::set<StateId> out;
  for (auto mid : weak_reach(lts, from)) {
    for (auto next : optional_step(lts, mid, label)) {
      for (auto last : weak_reach(lts, next)) out.insert(last);
    }
  }
  return {out.begin(), out.end()};
}

bool closure_touches_frontier(const Lts& lts, StateId from) {
  auto r = weak_reach(lts, from);
  return std::any_of(r.begin(), r.end(), [&](StateId s) { return lts.frontier(s); });
}

bool reaches_frontier(const Lts& lts, StateId from) {
  std::vector<bool> seen(lts.size(), false);
  std::vector<StateId> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    auto s = stack.back();
    stack.pop_back();
    if (lts.frontier(s)) return true;
    for (const auto& t : lts.out(s)) {
      if (!seen[t.target]) {
        seen[t.target] = true;
        stack.push_back(t.target);
      }
    }
  }
  return false;
}

namespace {

Lts copy_states(const Lts& lts) {
  Lts out(lts.labels());
  for (StateId s = 0; s < lts.size(); ++s) out.add_state(lts.term(s), lts.frontier(s));
  return out;
}

}  // namespace

Lts saturate(const Lts& lts, SaturationKind kind) {
  if (kind != SaturationKind::wb && kind != SaturationKind::db) {
    throw Error(Error::Kind::invalid_argument, "saturate expects wb or db; use paired_saturate for bb/hb");
  }
  auto out = copy_states(lts);
  std::vector<std::vector<StateId>> reach(lts.size());
  for (StateId s = 0; s < lts.size(); ++s) reach[s] = weak_reach(lts, s);
  for (StateId s = 0; s < lts.size(); ++s) {
    for (LabelId a = 0; a < lts.labels().size(); ++a) {
      std::set<StateId> targets;
      for (auto mid : reach[s]) {
        for (auto next : optional_step(lts, mid, a)) {
          if (kind == SaturationKind::db) {
            targets.insert(next);
          } else {
            targets.insert(reach[next].begin(), reach[next].end());
          }
        }
      }
      for (auto t : targets) out.add_transition(s, a, t);
    }
  }
  out.normalize();
  return out;
}

PairedLts paired_saturate(const Lts& lts, SaturationKind kind) {
  if (kind != SaturationKind::bb && kind != SaturationKind::hb) {
    throw Error(Error::Kind::invalid_argument, "paired_saturate expects bb or hb");
  }
  PairedLts out{lts.terms(), lts.labels(), std::vector<std::vector<PairedTransition>>(lts.size()), lts.truncated()};
  std::vector<std::vector<StateId>> reach(lts.size());
  for (StateId s = 0; s < lts.size(); ++s) reach[s] = weak_reach(lts, s);
  for (StateId s = 0; s < lts.size(); ++s) {
    auto& o = out.out[s];
    for (auto mid : reach[s]) {
      for (LabelId a = 0; a < lts.labels().size(); ++a) {
        for (auto next : optional_step(lts, mid, a)) {
          if (kind == SaturationKind::bb) {
            o.push_back({a, mid, next});
          } else {
            for (auto last : reach[next]) o.push_back({a, mid, last});
          }
        }
      }
    }
    std::sort(o.begin(), o.end());
    o.erase(std::unique(o.begin(), o.end()), o.end());
  }
  return out;
}

PairedLts embed_paired(const Lts& lts) {
  PairedLts out{lts.terms(), lts.labels(), std::vector<std::vector<PairedTransition>>(lts.size()), lts.truncated()};
  for (StateId s = 0; s < lts.size(); ++s) {
    for (const auto& t : lts.out(s)) out.out[s].push_back({t.label, s, t.target});
    std::sort(out.out[s].begin(), out.out[s].end());
  }
  return out;
}

Lts disjoint_union(const Lts& a, const Lts& b) {
  Lts out = copy_states(a);
  for (StateId s = 0; s < a.size(); ++s) {
    for (const auto& t : a.out(s)) out.add_transition(s, t.label, t.target);
  }
  auto shift = static_cast<StateId>(a.size());
  for (StateId s = 0; s < b.size(); ++s) out.add_state(b.term(s), b.frontier(s));
  for (StateId s = 0; s < b.size(); ++s) {
    for (const auto& t : b.out(s)) out.add_transition(s + shift, out.label_id(b.label(t.label)), t.target + shift);
  }
  out.normalize();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void collect_subterms(const Term& t, std::vector<Term>& out, std::unordered_map<Term, bool>& seen) {
  if (!seen.emplace(t, true).second) return;
  out.push_back(t);
  for (const auto& a : t.args()) collect_subterms(a, out, seen);
}

std::string show_assignment(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : s) {
    if (!first) out += ", ";
    first = false;
    out += k + " := " + v.str();
  }
  return out + "}";
}

}  // namespace

LaxModelReport check_lax_model(const GsosLanguage& lang, const Lts& base, SaturationKind mode,
                               std::size_t closure_budget) {
  std::vector<Term> roots;
  std::unordered_map<Term, bool> seen;
  for (StateId s = 0; s < base.size(); ++s) {
    if (!base.term(s).closed()) throw Error(Error::Kind::invalid_argument, "lax-model check needs closed-term states");
    collect_subterms(base.term(s), roots, seen);
  }
  LaxModelReport rep;
  rep.truncated = base.truncated();
  if (roots.empty()) {
    rep.ok = true;
    rep.vacuous = true;
    return rep;
  }
  Semantics sem(lang);
  auto lts = explore(sem, roots, Budget{std::max(closure_budget, roots.size()), std::nullopt});
  rep.truncated = rep.truncated || lts.truncated();

  std::vector<std::vector<StateId>> reach(lts.size());
  auto reach_of = [&](StateId s) -> const std::vector<StateId>& {
    if (reach[s].empty()) reach[s] = weak_reach(lts, s);
    return reach[s];
  };
  auto contains = [](const std::vector<StateId>& v, StateId s) { return std::binary_search(v.begin(), v.end(), s); };
  auto state_of = [&](const Term& t) { return lts.find(t); };

  // Candidate premise witnesses per (state, label): pairs (theta_x, theta_y or eta_y).
  bool branching_style = mode == SaturationKind::bb || mode == SaturationKind::hb;

  for (StateId s = 0; s < lts.size(); ++s) {
    const auto& term = lts.term(s);
    if (term.is_var() || term.args().empty()) continue;
    for (const Rule* r : lang.rules_for(term.name())) {
      if (r->premises.empty()) continue;
      auto label = lts.find_label(r->label);
      if (!label) continue;
      Substitution eta;
      for (std::size_t i = 0; i < r->source_vars.size(); ++i) eta.emplace(r->source_vars[i], term.args()[i]);

      // Per premise: list of (theta(x), theta(y), eta(y)) options.
      struct Option {
        StateId tx, ty, ey;
      };
      std::vector<std::vector<Option>> options;
      bool premise_truncated = false;
      bool empty = false;
      for (const auto& p : r->premises) {
        std::vector<Option> opts;
        auto x = state_of(eta.at(p.lhs));
        auto beta = lts.find_label(p.label);
        if (!x || !beta) {
          empty = true;
          break;
        }
        if (closure_touches_frontier(lts, *x)) premise_truncated = true;
        for (auto tx : reach_of(*x)) {
          for (auto ty : optional_step(lts, tx, *beta)) {
            switch (mode) {
              case SaturationKind::bb:
                opts.push_back({tx, ty, ty});
                break;
              case SaturationKind::db:
                opts.push_back({*x, ty, ty});
                break;
              case SaturationKind::wb:
              case SaturationKind::hb:
                for (auto ey : reach_of(ty)) opts.push_back({mode == SaturationKind::wb ? *x : tx, ty, ey});
                break;
            }
          }
        }
        std::sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) {
          return std::tie(a.tx, a.ty, a.ey) < std::tie(b.tx, b.ty, b.ey);
        });
        opts.erase(std::unique(opts.begin(), opts.end(),
                               [](const Option& a, const Option& b) { return a.tx == b.tx && a.ty == b.ty && a.ey == b.ey; }),
                   opts.end());
        if (opts.empty()) {
          empty = true;
          break;
        }
        options.push_back(std::move(opts));
      }
      if (empty) continue;
      rep.truncated = rep.truncated || premise_truncated;

      std::vector<std::size_t> idx(options.size(), 0);
      while (true) {
        auto theta = eta;
        auto eta_full = eta;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const auto& o = options[k][idx[k]];
          const auto& p = r->premises[k];
          theta.insert_or_assign(p.lhs, lts.term(o.tx));
          theta.insert_or_assign(p.rhs, lts.term(o.ty));
          eta_full.insert_or_assign(p.rhs, lts.term(o.ey));
        }
        ++rep.checked_assignments;
        bool region_truncated = reaches_frontier(lts, s);
        std::string missing;
        if (branching_style) {
          auto mid = state_of(apply_substitution(r->source(), theta));
          auto tgt_theta = state_of(apply_substitution(r->target, theta));
          auto tgt_eta = state_of(apply_substitution(r->target, eta_full));
          bool good = mid && contains(reach_of(s), *mid) && tgt_theta &&
                      contains(optional_step(lts, *mid, *label), *tgt_theta);
          if (good && mode == SaturationKind::hb) good = tgt_eta && contains(reach_of(*tgt_theta), *tgt_eta);
          if (!good) {
            missing = term.str() + " => " + apply_substitution(r->source(), theta).str() + " -(" + r->label + ")-> " +
                      apply_substitution(r->target, theta).str();
            if (mode == SaturationKind::hb) missing += " => " + apply_substitution(r->target, eta_full).str();
          }
        } else {
          auto tgt = state_of(apply_substitution(r->target, eta_full));
          bool good = false;
          if (tgt) {
            for (auto mid : reach_of(s)) {
              for (auto next : optional_step(lts, mid, *label)) {
                if (mode == SaturationKind::db ? next == *tgt : contains(reach_of(next), *tgt)) good = true;
              }
            }
          }
          if (!good) {
            missing = term.str() + " => -(" + r->label + ")-> " + (mode == SaturationKind::wb ? "=> " : "") +
                      apply_substitution(r->target, eta_full).str();
          }
        }
        if (!missing.empty()) {
          if (region_truncated) {
            rep.truncated = true;
          } else {
            auto shown = branching_style ? theta : eta_full;
            rep.violations.push_back({r->name, show_assignment(shown), missing});
          }
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
  }
  rep.vacuous = rep.checked_assignments == 0;
  rep.ok = rep.violations.empty() && !rep.truncated;
  return rep;
}

// ---------------------------------------------------------------------------

Lts random_lts(std::mt19937_64& rng, std::size_t states, const std::vector<std::string>& labels, double density) {
  Lts lts(labels);
  for (std::size_t s = 0; s < states; ++s) lts.add_state(Term::app("s" + std::to_string(s)));
  std::bernoulli_distribution coin(density);
  for (StateId s = 0; s < states; ++s) {
    for (LabelId a = 0; a < lts.labels().size(); ++a) {
      for (StateId t = 0; t < states; ++t) {
        if (coin(rng)) lts.add_transition(s, a, t);
      }
    }
  }
  lts.normalize();
  return lts;
}

}  // namespace cool
