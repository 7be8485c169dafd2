#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "cool/spec.hpp"
#include "cool/term.hpp"

namespace cool {

using StateId = std::uint32_t;
using LabelId = std::uint32_t;

struct Transition {
  LabelId label;
  StateId target;

  friend bool operator==(const Transition&, const Transition&) = default;
  friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// Finite labelled transition system. States carry terms (closed terms for canonical-model
/// fragments, atoms such as `s3` for hand-built systems). Frontier states were not expanded
/// and carry no outgoing transitions.
class Lts {
 public:
  Lts();
  explicit Lts(const std::vector<std::string>& labels);

  StateId add_state(const Term& term, bool frontier = false);
  /// Adds a state unless one with the same term exists.
  StateId intern(const Term& term);
  void add_transition(StateId from, LabelId label, StateId to);
  void add_transition(StateId from, const std::string& label, StateId to);
  void set_frontier(StateId s, bool frontier) { frontier_.at(s) = frontier; }
  /// Sorts and deduplicates adjacency lists.
  void normalize();

  LabelId label_id(const std::string& label);
  std::optional<LabelId> find_label(const std::string& label) const;
  LabelId tau() const { return 0; }

  std::size_t size() const { return states_.size(); }
  std::size_t transition_count() const;
  const Term& term(StateId s) const { return states_.at(s); }
  const std::vector<Term>& terms() const { return states_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(LabelId l) const { return labels_.at(l); }
  const std::vector<Transition>& out(StateId s) const { return out_.at(s); }
  bool frontier(StateId s) const { return frontier_.at(s); }
  bool truncated() const;
  std::optional<StateId> find(const Term& term) const;

  std::string to_aldebaran() const;
  std::string to_json() const;
  static Lts from_aldebaran(std::string_view text);
  static Lts from_json(std::string_view text);

 private:
  std::vector<Term> states_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Transition>> out_;
  std::vector<bool> frontier_;
  std::unordered_map<Term, StateId> index_;
};

/// Transitions x -a-> (mid, target).
struct PairedTransition {
  LabelId label;
  StateId mid;
  StateId target;

  friend bool operator==(const PairedTransition&, const PairedTransition&) = default;
  friend auto operator<=>(const PairedTransition&, const PairedTransition&) = default;
};

struct PairedLts {
  std::vector<Term> states;
  std::vector<std::string> labels;
  std::vector<std::vector<PairedTransition>> out;
  bool truncated = false;
};

struct Budget {
  std::size_t max_states = 10000;
  std::optional<std::size_t> max_depth;
};

/// One-step transitions of a closed term in the canonical model, with memoisation.
class Semantics {
 public:
  explicit Semantics(const GsosLanguage& lang) : lang_(&lang) {}

  struct Step {
    std::string label;
    Term target;
    const Rule* rule;
    Substitution rho;
  };

  /// Every rule instance firing from `t` (possibly several per target).
  std::vector<Step> derivations(const Term& t);
  /// Distinct (label, target) pairs, sorted by label then target print order.
  const std::vector<std::pair<std::string, Term>>& transitions(const Term& t);

  const GsosLanguage& language() const { return *lang_; }

 private:
  const GsosLanguage* lang_;
  std::unordered_map<Term, std::vector<std::pair<std::string, Term>>> memo_;
};

/// Breadth-first canonical-model fragment reachable from `roots`.
Lts explore(const GsosLanguage& lang, const std::vector<Term>& roots, const Budget& budget = {});
Lts explore(Semantics& sem, const std::vector<Term>& roots, const Budget& budget = {});

/// States reachable by zero or more tau steps, sorted.
std::vector<StateId> weak_reach(const Lts& lts, StateId from);
/// States P' with from => -(a)-> => P', sorted.
std::vector<StateId> weak_step(const Lts& lts, StateId from, LabelId label);
/// Targets of -(a)->: the a-successors plus `from` itself when a is tau.
std::vector<StateId> optional_step(const Lts& lts, StateId from, LabelId label);
/// True when some state in the tau-closure of `from` is a frontier state.
bool closure_touches_frontier(const Lts& lts, StateId from);
/// True when a frontier state is reachable from `from` by any transitions.
bool reaches_frontier(const Lts& lts, StateId from);

enum class SaturationKind { wb, db, bb, hb };

/// wb: x => -(a)-> => x'.  db: x => -(a)-> x'.
Lts saturate(const Lts& lts, SaturationKind kind);
/// bb: x -a-> (x', x'') iff x => x' -(a)-> x''.  hb: additionally x'' => x'''; pair (x', x''').
PairedLts paired_saturate(const Lts& lts, SaturationKind kind);
/// x -a-> (x, x'') for every base transition x -a-> x''.
PairedLts embed_paired(const Lts& lts);

/// Places `b` next to `a`; states of `b` are shifted by `a.size()`. Terms are not merged.
Lts disjoint_union(const Lts& a, const Lts& b);

struct LaxViolation {
  std::string rule;
  std::string assignment;
  std::string missing;
};

struct LaxModelReport {
  bool ok = false;
  bool truncated = false;
  bool vacuous = false;
  std::size_t checked_assignments = 0;
  std::vector<LaxViolation> violations;
};

/// Checks that the saturation of `base` (extended to the subterms of its states) is a lax
/// model of `lang`: every rule instance with weak premises has the matching weak conclusion.
LaxModelReport check_lax_model(const GsosLanguage& lang, const Lts& base, SaturationKind mode,
                               std::size_t closure_budget = 20000);

/// Uniformly random LTS over `labels` (index 0 must be tau) with `states` states.
Lts random_lts(std::mt19937_64& rng, std::size_t states, const std::vector<std::string>& labels,
               double density = 0.2);

}  // namespace cool
