#include "cool/term.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace cool {

Error::Error(Kind kind, std::string message, std::size_t line, std::size_t column)
    : std::runtime_error([&] {
        std::ostringstream os;
        if (line > 0) os << line << ':' << column << ": ";
        os << message;
        return os.str();
      }()),
      kind_(kind),
      line_(line),
      column_(column) {}

const char* to_string(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::syntax: return "syntax";
    case Error::Kind::unknown_operator: return "unknown-operator";
    case Error::Kind::arity_mismatch: return "arity-mismatch";
    case Error::Kind::unknown_label: return "unknown-label";
    case Error::Kind::duplicate_source_variable: return "duplicate-source-variable";
    case Error::Kind::premise_lhs_not_source: return "premise-lhs-not-source";
    case Error::Kind::duplicate_premise_target: return "duplicate-premise-target";
    case Error::Kind::premise_target_clashes_source: return "premise-target-clashes-source";
    case Error::Kind::unhoused_target_variable: return "unhoused-target-variable";
    case Error::Kind::negative_premise: return "negative-premise";
    case Error::Kind::duplicate_operator: return "duplicate-operator";
    case Error::Kind::invalid_argument: return "invalid-argument";
    case Error::Kind::budget: return "budget";
    case Error::Kind::frontier: return "frontier";
    case Error::Kind::not_straight: return "not-straight";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

std::string OperatorName::str() const {
  if (indices.empty()) return base;
  std::string s = base + "[";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) s += ',';
    s += indices[i];
  }
  return s + "]";
}

OperatorName OperatorName::parse(std::string_view full) {
  OperatorName out;
  auto open = full.find('[');
  if (open == std::string_view::npos) {
    out.base = std::string(full);
    return out;
  }
  out.base = std::string(full.substr(0, open));
  auto body = full.substr(open + 1, full.size() - open - 2);
  std::size_t start = 0;
  while (start <= body.size()) {
    auto comma = body.find(',', start);
    if (comma == std::string_view::npos) comma = body.size();
    out.indices.emplace_back(body.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

Signature::Signature() { labels_.emplace_back(kTau); }

void Signature::add_operator(const std::string& name, std::size_t arity, std::size_t index_count) {
  if (operators_.count(name)) {
    throw Error(Error::Kind::duplicate_operator, "operator '" + name + "' declared twice");
  }
  operators_.emplace(name, Family{arity, index_count});
}

void Signature::add_label(const std::string& label) {
  if (!has_label(label)) labels_.push_back(label);
}

bool Signature::has_label(std::string_view label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::optional<std::size_t> Signature::arity(std::string_view full_name) const {
  auto name = OperatorName::parse(full_name);
  auto it = operators_.find(name.base);
  if (it == operators_.end() || it->second.index_count != name.indices.size()) return std::nullopt;
  for (const auto& l : name.indices) {
    if (!has_label(l)) return std::nullopt;
  }
  return it->second.arity;
}

bool Signature::is_constant(std::string_view full_name) const {
  auto a = arity(full_name);
  return a && *a == 0;
}

std::vector<std::pair<std::string, std::size_t>> Signature::concrete_operators() const {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& [base, fam] : operators_) {
    std::vector<std::size_t> idx(fam.index_count, 0);
    while (true) {
      OperatorName n{base, {}};
      for (auto i : idx) n.indices.push_back(labels_[i]);
      out.emplace_back(n.str(), fam.arity);
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == labels_.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {
struct TermNode {
  bool is_var;
  std::string name;
  std::vector<Term> args;
  std::size_t hash;
  std::size_t size;
  bool closed;
  std::string text;
};
}  // namespace detail

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Term Term::var(std::string name) {
  auto node = std::make_shared<detail::TermNode>();
  node->is_var = true;
  node->hash = mix(0x51ed27, std::hash<std::string>{}(name));
  node->size = 1;
  node->closed = false;
  node->text = name;
  node->name = std::move(name);
  return Term(std::move(node));
}

Term Term::app(std::string op, std::vector<Term> args) {
  auto node = std::make_shared<detail::TermNode>();
  node->is_var = false;
  std::size_t h = mix(0x2545f491, std::hash<std::string>{}(op));
  std::size_t size = 1;
  bool closed = true;
  std::string text = op;
  if (!args.empty()) {
    text += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) text += ", ";
      text += args[i].str();
      h = mix(h, args[i].hash());
      size += args[i].size();
      closed = closed && args[i].closed();
    }
    text += ')';
  }
  node->name = std::move(op);
  node->args = std::move(args);
  node->hash = h;
  node->size = size;
  node->closed = closed;
  node->text = std::move(text);
  return Term(std::move(node));
}

bool Term::is_var() const { return node_->is_var; }
const std::string& Term::name() const { return node_->name; }
const std::vector<Term>& Term::args() const { return node_->args; }
std::size_t Term::hash() const { return node_->hash; }
std::size_t Term::size() const { return node_->size; }
bool Term::closed() const { return node_->closed; }
const std::string& Term::str() const { return node_->text; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->hash != b.node_->hash || a.node_->size != b.node_->size) return false;
  if (a.node_->is_var != b.node_->is_var || a.node_->name != b.node_->name) return false;
  return a.node_->args == b.node_->args;
}

bool operator<(const Term& a, const Term& b) { return a.node_->text < b.node_->text; }

Term apply_substitution(const Term& t, const Substitution& rho) {
  if (t.closed() || rho.empty()) return t;
  if (t.is_var()) {
    auto it = rho.find(t.name());
    return it == rho.end() ? t : it->second;
  }
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(apply_substitution(a, rho));
  return Term::app(t.name(), std::move(args));
}

std::set<std::string> vars_of(const Term& t) {
  std::set<std::string> out;
  std::function<void(const Term&)> walk = [&](const Term& u) {
    if (u.closed()) return;
    if (u.is_var()) {
      out.insert(u.name());
      return;
    }
    for (const auto& a : u.args()) walk(a);
  };
  walk(t);
  return out;
}

Term replace_at(const Term& t, const std::vector<std::size_t>& path, const Term& replacement) {
  std::function<Term(const Term&, std::size_t)> go = [&](const Term& u, std::size_t depth) -> Term {
    if (depth == path.size()) return replacement;
    auto args = u.args();
    args.at(path[depth]) = go(args[path[depth]], depth + 1);
    return Term::app(u.name(), std::move(args));
  };
  return go(t, 0);
}

// ---------------------------------------------------------------------------

bool is_ident_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool is_ident_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '\'' || u >= 0x80;
}

TermParser::TermParser(std::string_view text, const Signature* sig, std::size_t line, std::size_t column)
    : text_(text), sig_(sig), line_(line), column_(column) {}

std::size_t TermParser::column_at(std::size_t pos) const { return column_ + pos; }

void TermParser::fail(Error::Kind kind, const std::string& msg) const {
  throw Error(kind, msg, line_, column_at(pos_));
}

void TermParser::skip_ws() {
  while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
}

bool TermParser::at_end() {
  skip_ws();
  return pos_ >= text_.size();
}

std::string TermParser::ident() {
  skip_ws();
  if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) fail(Error::Kind::syntax, "expected identifier");
  auto start = pos_++;
  while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
  return std::string(text_.substr(start, pos_ - start));
}

Term TermParser::parse() {
  skip_ws();
  auto start = pos_;
  OperatorName name{ident(), {}};
  skip_ws();
  bool indexed = false;
  if (pos_ < text_.size() && text_[pos_] == '[') {
    indexed = true;
    ++pos_;
    while (true) {
      auto label_pos = pos_;
      auto label = ident();
      if (sig_ && !sig_->has_label(label) && !label_variables.count(label)) {
        pos_ = label_pos;
        skip_ws();
        fail(Error::Kind::unknown_label, "unknown label '" + label + "'");
      }
      name.indices.push_back(label);
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        break;
      }
      fail(Error::Kind::syntax, "expected ',' or ']' in operator index");
    }
    skip_ws();
  }
  bool has_parens = pos_ < text_.size() && text_[pos_] == '(';
  std::vector<Term> args;
  if (has_parens) {
    ++pos_;
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ')') {
      ++pos_;
    } else {
      while (true) {
        args.push_back(parse());
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (pos_ < text_.size() && text_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail(Error::Kind::syntax, "expected ',' or ')'");
      }
    }
  }

  auto full = name.str();
  if (!sig_) {
    return Term::app(full, std::move(args));
  }
  auto fam = sig_->operators().find(name.base);
  bool declared = fam != sig_->operators().end() && fam->second.index_count == name.indices.size();
  if (!declared) {
    if (!indexed && !has_parens) return Term::var(name.base);
    pos_ = start;
    skip_ws();
    fail(Error::Kind::unknown_operator, "unknown operator '" + full + "'");
  }
  if (args.size() != fam->second.arity) {
    pos_ = start;
    skip_ws();
    fail(Error::Kind::arity_mismatch, "operator '" + full + "' expects " + std::to_string(fam->second.arity) +
                                          " argument(s), got " + std::to_string(args.size()));
  }
  return Term::app(full, std::move(args));
}

Term parse_term(std::string_view text, const Signature* sig) {
  TermParser p(text, sig);
  auto t = p.parse();
  if (!p.at_end()) {
    throw Error(Error::Kind::syntax, "trailing input after term", 1, p.offset() + 1);
  }
  return t;
}

}  // namespace cool
