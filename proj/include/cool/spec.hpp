#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cool/term.hpp"

namespace cool {

struct Premise {
  std::string lhs;
  std::string label;
  std::string rhs;
};

/// A positive GSOS rule  premises / op(x1..xn) -label-> target, already schema-free.
struct Rule {
  std::string name;
  std::string op;
  std::vector<std::string> source_vars;
  std::vector<Premise> premises;
  std::string label;
  Term target = Term::var("_");
  std::size_t line = 0;

  Term source() const;
  std::string str() const;
};

struct GsosLanguage {
  std::string name;
  Signature signature;
  std::vector<Rule> rules;

  /// Rules whose source operator is `op`, in declaration order.
  std::vector<const Rule*> rules_for(std::string_view op) const;
};

/// Parses and validates a .gsos document. Schema rules are expanded before validation.
GsosLanguage load_language(std::string_view text);
GsosLanguage load_language_file(const std::string& path);

/// Validates a rule against the positive GSOS well-formedness conditions; throws Error.
void validate_rule(const Rule& rule, const Signature& sig);

struct RuleProperties {
  bool straight = false;
  bool smooth = false;
  std::optional<std::size_t> patience_argument;  // 1-based
};

RuleProperties rule_properties(const Rule& rule);

struct ArgumentRole {
  bool active = false;
  bool receiving = false;
  bool has_patience = false;
};

/// Keyed by (concrete operator name, 1-based argument index).
using RoleTable = std::map<std::pair<std::string, std::size_t>, ArgumentRole>;

RoleTable argument_roles(const GsosLanguage& lang);

struct Witness {
  std::string rule;      // set for rule-level witnesses
  std::string op;        // set for argument-level witnesses
  std::size_t argument = 0;

  std::string str() const;
  friend bool operator<(const Witness& a, const Witness& b) {
    return std::tie(a.rule, a.op, a.argument) < std::tie(b.rule, b.op, b.argument);
  }
  friend bool operator==(const Witness& a, const Witness& b) {
    return a.rule == b.rule && a.op == b.op && a.argument == b.argument;
  }
};

struct ClauseVerdict {
  bool ok = true;
  std::vector<Witness> witnesses;
};

struct FormatReport {
  // clauses[0..4]: straight, tau-premises only in patience rules, active arguments patient,
  // receiving arguments patient, smooth.
  ClauseVerdict clauses[5];
  bool wb_cool = false;
  bool bb_cool = false;
  bool hb_cool = false;
  bool db_cool = false;

  std::string to_json() const;
};

FormatReport classify_format(const GsosLanguage& lang);

}  // namespace cool
