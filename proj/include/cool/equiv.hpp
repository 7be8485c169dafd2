#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cool/lts.hpp"
#include "cool/spec.hpp"

namespace cool {

/// Binary relation over the states of one LTS (use disjoint_union for two).
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::size_t universe) : n_(universe), bits_(universe * universe, false) {}

  static Relation identity(std::size_t universe);
  static Relation full(std::size_t universe);

  std::size_t universe() const { return n_; }
  bool contains(StateId a, StateId b) const { return a < n_ && b < n_ && bits_[a * n_ + b]; }
  void insert(StateId a, StateId b);
  void erase(StateId a, StateId b);
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  /// Pairs in lexicographic order.
  std::vector<std::pair<StateId, StateId>> pairs() const;

  Relation converse() const;
  /// a (this ; other) c iff a this b and b other c.
  Relation compose(const Relation& other) const;
  Relation unite(const Relation& other) const;
  Relation intersect(const Relation& other) const;
  bool subset_of(const Relation& other) const;

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<bool> bits_;
};

enum class FunctionalKind {
  strong_sim,
  strong_bisim,
  branching_sim,
  branching_bisim,
  delay_sim,
  delay_bisim,
  weak_sim,
  weak_bisim,
  eta_sim,
  eta_bisim,
  branching_exp,
  eta_exp,
  delay_exp,
};

inline constexpr FunctionalKind kAllKinds[] = {
    FunctionalKind::strong_sim,    FunctionalKind::strong_bisim, FunctionalKind::branching_sim,
    FunctionalKind::branching_bisim, FunctionalKind::delay_sim,  FunctionalKind::delay_bisim,
    FunctionalKind::weak_sim,      FunctionalKind::weak_bisim,   FunctionalKind::eta_sim,
    FunctionalKind::eta_bisim,     FunctionalKind::branching_exp, FunctionalKind::eta_exp,
    FunctionalKind::delay_exp,
};

const char* to_string(FunctionalKind kind);
/// Accepts the enum spelling and the short forms strong, branching, delay, weak, eta.
std::optional<FunctionalKind> parse_kind(std::string_view text);
bool is_bisimulation(FunctionalKind kind);
bool is_expansion(FunctionalKind kind);

/// One transfer clause of a functional. A challenge P -a-> P' on `left_side` (else Q -a-> Q')
/// is answered by  X [=>] X' -(a)-> X'' [=>] X'''  from the other process, where `stutter`
/// allows the tau-stutter and `mid_related` asks the intermediate state to stay related.
struct Clause {
  bool left_side;
  bool pre_closure;
  bool stutter;
  bool post_closure;
  bool mid_related;
};

std::vector<Clause> clauses(FunctionalKind kind);

/// Image of `r` under the functional, over all pairs of the universe.
Relation step(FunctionalKind kind, const Lts& lts, const Relation& r);
/// Whether (p, q) belongs to step(kind, lts, r).
bool step_contains(FunctionalKind kind, const Lts& lts, const Relation& r, StateId p, StateId q);
/// r is a post-fixed point: r is contained in step(kind, lts, r).
bool is_post_fixed(FunctionalKind kind, const Lts& lts, const Relation& r);

Relation gfp(FunctionalKind kind, const Lts& lts);
/// Like gfp, but challenges that reach frontier states count as answered. Over-approximates
/// the gfp of the full system up to the exploration bound.
Relation gfp_bounded(FunctionalKind kind, const Lts& lts);

/// Equivalence classes of an equivalence relation, each sorted, ordered by least member.
std::vector<std::vector<StateId>> partition(const Relation& r);

bool branching_sim_check_bprime(const Lts& lts, const Relation& r);

struct PairedPremise {
  std::string lhs;
  std::string label;
  std::string mid;
  std::string target;
};

struct PairedRule {
  std::string name;
  Term source = Term::var("_");
  std::vector<PairedPremise> premises;
  std::string label;
  Term mid_target = Term::var("_");
  Term target = Term::var("_");

  std::string str() const;
};

/// Rule translation to pair-valued targets; throws Error(not_straight) on non-straight rules.
std::vector<PairedRule> translate_rules_bprime(const GsosLanguage& lang);

std::string relation_to_json(const Lts& lts, const Relation& r);
/// Parses [[left, right], ...] term pairs against the states of `lts`.
Relation relation_from_json(const Lts& lts, std::string_view text, const Signature* sig);

}  // namespace cool
