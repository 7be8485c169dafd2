#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cool/equiv.hpp"
#include "cool/lts.hpp"
#include "cool/spec.hpp"

namespace cool {

using TermPair = std::pair<Term, Term>;
using TermRelation = std::set<TermPair>;

TermRelation to_term_relation(const Lts& lts, const Relation& r);

// --- laws ------------------------------------------------------------------

enum class Grade { strong, expansion };
const char* to_string(Grade g);

/// Oriented law: lhs is grade-related to rhs (lhs ~ rhs, or lhs expands rhs).
struct Law {
  std::string name;
  Term lhs = Term::var("_");
  Term rhs = Term::var("_");
  Grade grade = Grade::strong;
  /// Empty when unchecked; "verified", "verified-at-bound-K" or "failed" afterwards.
  std::string status;
};

struct LawSet {
  std::string name;
  std::vector<Law> laws;
};

/// First-order matching of `pattern` against `t`, extending `binding`.
bool match(const Term& pattern, const Term& t, Substitution& binding);

/// One law application inside a term.
struct RewriteStep {
  Term from = Term::var("_");
  Term to = Term::var("_");
  std::string law;
  Grade grade = Grade::strong;
  std::vector<std::size_t> path;
};

/// All single-step rewrites of `t`, applying laws at positions whose ancestors all carry an
/// operator in `under` (every position when `under` is empty). Strong steps come first.
std::vector<RewriteStep> rewrites(const Term& t, const LawSet& laws, const std::vector<std::string>& under);

struct LawCheck {
  std::string law;
  std::string status;  // verified, verified-at-bound-K, failed, unchecked
  std::vector<std::string> instances;
  std::string failing_instance;
};

/// Instantiates the law's variables with every combination of `samples`, explores both sides
/// (to `max_depth` when given) and compares them with strong bisimilarity or branching
/// expansion. Frontier pairs count as related, which gives the bounded verdict.
LawCheck verify_law(const GsosLanguage& lang, const Law& law, const std::vector<Term>& samples,
                    const Budget& budget);

// --- technique expressions --------------------------------------------------

struct TechniqueExpr {
  enum class Kind { id, constant, unite, compose, ctx, sandwich_sem, sandwich_laws };
  Kind kind = Kind::id;
  std::string name;                  // constant relation
  std::vector<TechniqueExpr> parts;  // unite/compose operands; sandwich inner at parts[0]
  FunctionalKind left_kind = FunctionalKind::strong_bisim;
  FunctionalKind right_kind = FunctionalKind::strong_bisim;
  std::string left_laws;
  std::string right_laws;

  std::string str() const;
};

/// Grammar:  expr := seq ('|' seq)*;  seq := atom (';' atom)*;
///   atom := 'id' | 'const:' NAME | 'ctx' | 'sand(' side ',' expr ',' side ')' | '(' expr ')';
///   side := LAWSET | 'gfp:' KIND.
/// `f;g` applies f first, then g, so it denotes the function g after f.
TechniqueExpr parse_technique(std::string_view text);

// --- membership ------------------------------------------------------------

enum class Membership { found, not_found, unknown };
const char* to_string(Membership m);

struct Derivation {
  // base, const, refl, cong, union, compose, sandwich
  std::string rule;
  Term left = Term::var("_");
  Term right = Term::var("_");
  std::vector<Derivation> children;
  std::vector<RewriteStep> left_chain;   // from `left` towards the inner left term
  std::vector<RewriteStep> right_chain;  // from `right` towards the inner right term
  std::string note;
};

struct MemberResult {
  Membership status = Membership::not_found;
  Derivation derivation;
  std::string reason;
};

struct UpToContext {
  const GsosLanguage* lang = nullptr;
  std::map<std::string, TermRelation> constants;
  std::map<std::string, LawSet> law_sets;
  std::size_t rewrite_depth = 6;
  std::size_t rewrite_budget = 50000;   // terms per rewrite search side
  std::size_t pair_budget = 2000000;    // inner membership attempts per sandwich query
  std::vector<std::string> rewrite_under;
  bool require_verified_laws = false;
};

/// Decides membership of (p, q) in f(r). States of `lts` supply the semantic universe for
/// gfp-sandwiches.
class UpToEngine {
 public:
  UpToEngine(const Lts& lts, const UpToContext& ctx);
  ~UpToEngine();
  UpToEngine(const UpToEngine&) = delete;
  UpToEngine& operator=(const UpToEngine&) = delete;

  MemberResult member(const TechniqueExpr& f, const TermRelation& r, const Term& p, const Term& q);

  const Lts& lts() const { return lts_; }
  const UpToContext& context() const { return ctx_; }

  /// Caches for gfps and rewrite searches.
  struct Impl;
  Impl& impl() { return *impl_; }

 private:
  const Lts& lts_;
  const UpToContext& ctx_;
  Impl* impl_;
};

/// Re-validates a derivation against the relation, constants, laws and gfps.
bool check_derivation(UpToEngine& engine, const TechniqueExpr& f, const TermRelation& r, const Derivation& d,
                      std::string* why = nullptr);

// --- the game --------------------------------------------------------------

enum class Verdict { certified, refuted, inconclusive };
const char* to_string(Verdict v);

struct Obligation {
  Term left = Term::var("_");
  Term right = Term::var("_");
  Membership status = Membership::not_found;
  Derivation derivation;
};

struct Answer {
  StateId mid;
  StateId next;
  StateId last;
  std::vector<Obligation> obligations;
};

struct ChallengeTrace {
  bool left_side = true;
  StateId from;
  std::string label;
  StateId to;
  Verdict verdict = Verdict::refuted;
  std::optional<Answer> answer;
  std::size_t answers_tried = 0;
  std::string note;
};

struct PairTrace {
  StateId left;
  StateId right;
  Verdict verdict = Verdict::certified;
  std::vector<ChallengeTrace> challenges;
};

struct Advisory {
  enum class Level { certified, uncertified, unsound };
  Level level = Level::uncertified;
  std::vector<std::string> notes;
};
const char* to_string(Advisory::Level l);

struct CheckReport {
  Verdict verdict = Verdict::certified;
  FunctionalKind kind = FunctionalKind::branching_bisim;
  std::string technique;
  Advisory advisory;
  std::vector<PairTrace> pairs;
  bool truncated = false;

  std::string to_json(const Lts& lts) const;
};

/// Plays the kind-game for every pair of `r`, requiring each successor pair in f(r).
CheckReport check_up_to(UpToEngine& engine, const TermRelation& r, const TechniqueExpr& f, FunctionalKind kind);

/// Re-validates every recorded answer transition and membership derivation.
bool replay(UpToEngine& engine, const CheckReport& report, const TermRelation& r, const TechniqueExpr& f,
            std::string* why = nullptr);

/// Whether (p, q) passes one round of the kind-game with successor pairs judged by `related`.
Membership game_round(const Lts& lts, FunctionalKind kind, StateId p, StateId q,
                      const std::function<Membership(StateId, StateId)>& related);

// --- respectfulness and soundness -------------------------------------------

struct RespectfulResult {
  bool passed = true;
  bool vacuous = false;
  std::size_t checked_pairs = 0;
  std::string witness;
};

/// Checks f(R) within step(kind, f(S)) over the state pairs of the engine's universe, given
/// R within S and R within step(kind, S). `lts` must be frontier-free.
RespectfulResult test_respectful_instance(UpToEngine& engine, const TechniqueExpr& f, FunctionalKind kind,
                                          const TermRelation& r, const TermRelation& s);

struct CompanionReport {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Randomised checks of the closure properties of respectful functions on a tiny LTS.
CompanionReport companion_property_tests(FunctionalKind kind, const Lts& lts, std::mt19937_64& rng,
                                         std::size_t samples);

Advisory soundness_advice(const TechniqueExpr& f, FunctionalKind kind, const FormatReport* fmt,
                          const std::map<std::string, LawSet>* laws = nullptr,
                          const std::function<bool(const std::string&)>* constant_is_post_fixed = nullptr);

// --- certificates ----------------------------------------------------------

struct Certificate {
  std::string spec_path;
  GsosLanguage lang;
  TermRelation relation;
  std::string technique_text;
  TechniqueExpr technique;
  FunctionalKind kind = FunctionalKind::branching_bisim;
  UpToContext context;
  Budget budget;
  /// When non-empty, every law is checked on these samples before the game.
  std::vector<Term> law_samples;
  Budget law_budget;
};

/// Loads a certificate; a relative spec path is resolved against the certificate's directory.
Certificate load_certificate(const std::string& path);

std::map<std::string, LawSet> load_laws(std::string_view json_text, const Signature& sig);

struct CertificateRun {
  Lts universe;
  /// The certificate's context with law statuses filled in.
  UpToContext context;
  CheckReport report;
};

CertificateRun run_certificate(const Certificate& cert);

}  // namespace cool
