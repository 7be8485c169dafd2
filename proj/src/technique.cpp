#include <algorithm>
#include <cctype>

#include "cool/upto.hpp"
#include "json.hpp"

namespace cool {

const char* to_string(Grade g) { return g == Grade::strong ? "strong" : "expansion"; }

bool match(const Term& pattern, const Term& t, Substitution& binding) {
  if (pattern.is_var()) {
    auto it = binding.find(pattern.name());
    if (it != binding.end()) return it->second == t;
    binding.emplace(pattern.name(), t);
    return true;
  }
  if (t.is_var() || pattern.name() != t.name() || pattern.args().size() != t.args().size()) return false;
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (!match(pattern.args()[i], t.args()[i], binding)) return false;
  }
  return true;
}

namespace {

void collect_rewrites(const Term& root, const Term& sub, std::vector<std::size_t>& path, const LawSet& laws,
                      const std::vector<std::string>& under, std::vector<RewriteStep>& out) {
  for (const auto& law : laws.laws) {
    Substitution binding;
    if (!match(law.lhs, sub, binding)) continue;
    auto replaced = apply_substitution(law.rhs, binding);
    if (replaced == sub) continue;
    out.push_back(RewriteStep{root, replace_at(root, path, replaced), law.name, law.grade, path});
  }
  if (sub.is_var()) return;
  if (!under.empty() && std::find(under.begin(), under.end(), sub.name()) == under.end()) return;
  for (std::size_t i = 0; i < sub.args().size(); ++i) {
    path.push_back(i);
    collect_rewrites(root, sub.args()[i], path, laws, under, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<RewriteStep> rewrites(const Term& t, const LawSet& laws, const std::vector<std::string>& under) {
  std::vector<RewriteStep> out;
  std::vector<std::size_t> path;
  collect_rewrites(t, t, path, laws, under, out);
  std::stable_partition(out.begin(), out.end(), [](const RewriteStep& s) { return s.grade == Grade::strong; });
  return out;
}

// ---------------------------------------------------------------------------

std::string TechniqueExpr::str() const {
  auto side = [](bool sem, FunctionalKind k, const std::string& laws) {
    return sem ? std::string("gfp:") + to_string(k) : laws;
  };
  switch (kind) {
    case Kind::id: return "id";
    case Kind::constant: return "const:" + name;
    case Kind::ctx: return "ctx";
    case Kind::unite:
    case Kind::compose: {
      std::string sep = kind == Kind::unite ? " | " : "; ";
      std::string s;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s += sep;
        bool wrap = kind == Kind::compose && parts[i].kind == Kind::unite;
        s += wrap ? "(" + parts[i].str() + ")" : parts[i].str();
      }
      return s;
    }
    case Kind::sandwich_sem:
      return "sand(" + side(true, left_kind, "") + ", " + parts.at(0).str() + ", " + side(true, right_kind, "") + ")";
    case Kind::sandwich_laws:
      return "sand(" + left_laws + ", " + parts.at(0).str() + ", " + right_laws + ")";
  }
  return "?";
}

namespace {

class TechniqueParser {
 public:
  explicit TechniqueParser(std::string_view text) : text_(text) {}

  TechniqueExpr parse_all() {
    auto e = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  TechniqueExpr expr() {
    std::vector<TechniqueExpr> parts{seq()};
    while (accept('|')) parts.push_back(seq());
    if (parts.size() == 1) return parts[0];
    TechniqueExpr e;
    e.kind = TechniqueExpr::Kind::unite;
    e.parts = std::move(parts);
    return e;
  }

  TechniqueExpr seq() {
    std::vector<TechniqueExpr> parts{atom()};
    while (accept(';')) parts.push_back(atom());
    if (parts.size() == 1) return parts[0];
    TechniqueExpr e;
    e.kind = TechniqueExpr::Kind::compose;
    e.parts = std::move(parts);
    return e;
  }

  TechniqueExpr atom() {
    skip();
    if (accept('(')) {
      auto e = expr();
      expect(')');
      return e;
    }
    auto word = name();
    TechniqueExpr e;
    if (word == "id") return e;
    if (word == "ctx") {
      e.kind = TechniqueExpr::Kind::ctx;
      return e;
    }
    if (word == "const") {
      expect(':');
      e.kind = TechniqueExpr::Kind::constant;
      e.name = name();
      return e;
    }
    if (word == "sand") {
      expect('(');
      auto [lsem, lkind, llaws] = side();
      expect(',');
      auto inner = expr();
      expect(',');
      auto [rsem, rkind, rlaws] = side();
      expect(')');
      if (lsem != rsem) fail("a sandwich mixes a semantic side with a law-set side");
      e.kind = lsem ? TechniqueExpr::Kind::sandwich_sem : TechniqueExpr::Kind::sandwich_laws;
      e.left_kind = lkind;
      e.right_kind = rkind;
      e.left_laws = llaws;
      e.right_laws = rlaws;
      e.parts.push_back(std::move(inner));
      return e;
    }
    fail("unknown technique '" + word + "'");
  }

  std::tuple<bool, FunctionalKind, std::string> side() {
    auto word = name();
    if (word == "gfp") {
      expect(':');
      auto k = name();
      auto kind = parse_kind(k);
      if (!kind) fail("unknown functional '" + k + "'");
      return {true, *kind, ""};
    }
    return {false, FunctionalKind::strong_bisim, word};
  }

  std::string name() {
    skip();
    auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                   text_[pos_] == '-' || text_[pos_] == '.')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Error::Kind::syntax, "technique: " + msg, 1, pos_ + 1);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

TechniqueExpr parse_technique(std::string_view text) { return TechniqueParser(text).parse_all(); }

// ---------------------------------------------------------------------------

std::map<std::string, LawSet> load_laws(std::string_view json_text, const Signature& sig) {
  auto j = nlohmann::json::parse(json_text);
  const auto& list = j.is_array() ? j : j.at("laws");
  std::map<std::string, LawSet> out;
  std::size_t index = 0;
  for (const auto& item : list) {
    ++index;
    Law law;
    law.lhs = parse_term(item.at("lhs").get<std::string>(), sig);
    law.rhs = parse_term(item.at("rhs").get<std::string>(), sig);
    auto grade = item.value("grade", std::string("strong"));
    if (grade == "strong" || grade == "~") {
      law.grade = Grade::strong;
    } else if (grade == "expansion" || grade == ">~") {
      law.grade = Grade::expansion;
    } else {
      throw Error(Error::Kind::invalid_argument, "law " + std::to_string(index) + ": unknown grade '" + grade + "'");
    }
    law.name = item.value("name", "law" + std::to_string(index));
    law.status = item.value("status", std::string());
    if (law.lhs.is_var()) throw Error(Error::Kind::invalid_argument, "law '" + law.name + "': left-hand side is a variable");
    auto lv = vars_of(law.lhs);
    for (const auto& v : vars_of(law.rhs)) {
      if (!lv.count(v)) {
        throw Error(Error::Kind::unhoused_target_variable,
                    "law '" + law.name + "': variable '" + v + "' does not occur on the left-hand side");
      }
    }
    auto set = item.value("set", std::string("laws"));
    auto& ls = out[set];
    ls.name = set;
    ls.laws.push_back(std::move(law));
  }
  return out;
}

LawCheck verify_law(const GsosLanguage& lang, const Law& law, const std::vector<Term>& samples, const Budget& budget) {
  LawCheck out;
  out.law = law.name;
  std::set<std::string> vs = vars_of(law.lhs);
  for (const auto& v : vars_of(law.rhs)) vs.insert(v);
  std::vector<std::string> vars(vs.begin(), vs.end());
  if (!vars.empty() && samples.empty()) throw Error(Error::Kind::invalid_argument, "no sample terms");
  auto kind = law.grade == Grade::strong ? FunctionalKind::strong_bisim : FunctionalKind::branching_exp;
  bool bounded = false;
  std::vector<std::size_t> idx(vars.size(), 0);
  Semantics sem(lang);
  while (true) {
    Substitution rho;
    for (std::size_t i = 0; i < vars.size(); ++i) rho.emplace(vars[i], samples[idx[i]]);
    auto l = apply_substitution(law.lhs, rho);
    auto r = apply_substitution(law.rhs, rho);
    auto lts = explore(sem, {l, r}, budget);
    auto rel = lts.truncated() ? gfp_bounded(kind, lts) : gfp(kind, lts);
    bounded = bounded || lts.truncated();
    std::string inst = l.str() + (law.grade == Grade::strong ? " ~ " : " >~ ") + r.str();
    out.instances.push_back(inst);
    if (!rel.contains(*lts.find(l), *lts.find(r))) {
      out.status = "failed";
      out.failing_instance = inst;
      return out;
    }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == samples.size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  if (!bounded) {
    out.status = "verified";
  } else {
    out.status = "verified-at-bound-" + std::to_string(budget.max_depth ? *budget.max_depth : budget.max_states);
  }
  return out;
}

}  // namespace cool
