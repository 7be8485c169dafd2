#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cool {

inline constexpr std::string_view kTau = "tau";

/// Error raised for malformed input. `line`/`column` are 1-based, 0 when unknown.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    syntax,
    unknown_operator,
    arity_mismatch,
    unknown_label,
    duplicate_source_variable,
    premise_lhs_not_source,
    duplicate_premise_target,
    premise_target_clashes_source,
    unhoused_target_variable,
    negative_premise,
    duplicate_operator,
    invalid_argument,
    budget,
    frontier,
    not_straight,
  };

  Error(Kind kind, std::string message, std::size_t line = 0, std::size_t column = 0);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
};

const char* to_string(Error::Kind kind);

/// Splits "sum[a,b]" into base "sum" and indices {"a","b"}; plain names have no indices.
struct OperatorName {
  std::string base;
  std::vector<std::string> indices;

  std::string str() const;
  static OperatorName parse(std::string_view full);
};

class Signature {
 public:
  Signature();

  /// Declares a plain operator, or a label-indexed family when `index_count > 0`.
  void add_operator(const std::string& name, std::size_t arity, std::size_t index_count = 0);
  void add_label(const std::string& label);

  /// Arity of a concrete operator name such as "par" or "pre[a]".
  std::optional<std::size_t> arity(std::string_view full_name) const;
  bool has_label(std::string_view label) const;
  bool is_constant(std::string_view full_name) const;

  const std::vector<std::string>& labels() const { return labels_; }

  struct Family {
    std::size_t arity;
    std::size_t index_count;
  };
  const std::map<std::string, Family, std::less<>>& operators() const { return operators_; }

  /// Every concrete operator (families instantiated over all labels), sorted.
  std::vector<std::pair<std::string, std::size_t>> concrete_operators() const;

 private:
  std::map<std::string, Family, std::less<>> operators_;
  std::vector<std::string> labels_;
};

namespace detail {
struct TermNode;
}

/// Immutable first-order term. Copies share structure; equality is structural.
class Term {
 public:
  static Term var(std::string name);
  static Term app(std::string op, std::vector<Term> args = {});

  bool is_var() const;
  const std::string& name() const;  // variable name or full operator name
  const std::vector<Term>& args() const;
  std::size_t hash() const;
  std::size_t size() const;  // node count
  bool closed() const;

  const std::string& str() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  friend bool operator<(const Term& a, const Term& b);

 private:
  explicit Term(std::shared_ptr<const detail::TermNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::TermNode> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

using Substitution = std::map<std::string, Term>;

Term apply_substitution(const Term& t, const Substitution& rho);
std::set<std::string> vars_of(const Term& t);

/// Replaces the subterm at `path` (argument indices from the root) by `replacement`.
Term replace_at(const Term& t, const std::vector<std::size_t>& path, const Term& replacement);

/// Parses a term. Identifiers that are not declared constants become variables.
/// With `sig == nullptr` every identifier applied to arguments is accepted as an operator
/// and bare identifiers become 0-ary applications (used for opaque LTS state names).
Term parse_term(std::string_view text, const Signature* sig);
inline Term parse_term(std::string_view text, const Signature& sig) { return parse_term(text, &sig); }

/// Shared lexer support for the term grammar, reused by the language loader.
class TermParser {
 public:
  TermParser(std::string_view text, const Signature* sig, std::size_t line = 1, std::size_t column = 1);

  Term parse();
  bool at_end();
  std::size_t offset() const { return pos_; }

  /// Label placeholders allowed in operator indices (schema metavariables).
  std::set<std::string> label_variables;

 private:
  void skip_ws();
  std::string ident();
  [[noreturn]] void fail(Error::Kind kind, const std::string& msg) const;
  std::size_t column_at(std::size_t pos) const;

  std::string_view text_;
  const Signature* sig_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t column_;
};

bool is_ident_start(char c);
bool is_ident_char(char c);

}  // namespace cool

template <>
struct std::hash<cool::Term> {
  std::size_t operator()(const cool::Term& t) const { return t.hash(); }
};
