#include "cool/spec.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cool {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto c = s.find(',', start);
    if (c == std::string_view::npos) c = s.size();
    auto item = trim(s.substr(start, c - start));
    if (!item.empty()) out.push_back(item);
    start = c + 1;
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), is_ident_char);
}

/// Replaces whole identifier tokens according to `map`.
std::string substitute_identifiers(std::string_view text, const std::map<std::string, std::string>& map) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_ident_start(text[i]) && (i == 0 || !is_ident_char(text[i - 1]))) {
      auto j = i + 1;
      while (j < text.size() && is_ident_char(text[j])) ++j;
      std::string tok(text.substr(i, j - i));
      auto it = map.find(tok);
      out += it == map.end() ? tok : it->second;
      i = j;
    } else {
      out += text[i++];
    }
  }
  return out;
}

struct Condition {
  std::string lhs;
  std::string rhs;
  bool equal;
};

struct RuleSchema {
  std::string name;
  std::vector<std::string> metavars;
  std::vector<Condition> conditions;
  std::string body;
  std::size_t line;
  std::size_t body_column;
};

Rule parse_concrete_rule(const std::string& name, const std::string& body, const Signature& sig,
                         std::size_t line, std::size_t column) {
  auto turnstile = body.find("|-");
  if (turnstile == std::string::npos) throw Error(Error::Kind::syntax, "rule '" + name + "' lacks '|-'", line, column);
  Rule r;
  r.name = name;
  r.line = line;

  static const std::regex premise_re(R"(^\s*([^\s-]+)\s*-\s*([^\s/-]+)\s*(-/)?->\s*([^\s]*)\s*$)");
  for (const auto& p : split_commas(std::string_view(body).substr(0, turnstile))) {
    std::smatch m;
    if (!std::regex_match(p, m, premise_re)) {
      throw Error(Error::Kind::syntax, "malformed premise '" + p + "' in rule '" + name + "'", line, column);
    }
    if (m[3].matched) {
      throw Error(Error::Kind::negative_premise,
                  "negative premise '" + p + "' in rule '" + name +
                      "': not supported, only positive GSOS rules are accepted",
                  line, column);
    }
    if (m[4].str().empty()) {
      throw Error(Error::Kind::syntax, "premise '" + p + "' lacks a target variable", line, column);
    }
    r.premises.push_back(Premise{m[1].str(), m[2].str(), m[4].str()});
  }

  auto conclusion = body.substr(turnstile + 2);
  auto conclusion_column = column + turnstile + 2;
  static const std::regex conclusion_re(R"(^([^-]*)-\s*([^\s-]+)\s*->(.*)$)");
  std::smatch m;
  if (!std::regex_match(conclusion, m, conclusion_re)) {
    throw Error(Error::Kind::syntax, "malformed conclusion in rule '" + name + "'", line, conclusion_column);
  }
  r.label = m[2].str();
  auto source = parse_term(m[1].str(), sig);
  if (source.is_var()) {
    throw Error(Error::Kind::syntax, "rule '" + name + "' source must be an operator application", line,
                conclusion_column);
  }
  r.op = source.name();
  for (const auto& a : source.args()) {
    if (!a.is_var()) {
      throw Error(Error::Kind::syntax, "rule '" + name + "' source arguments must be variables", line,
                  conclusion_column);
    }
    r.source_vars.push_back(a.name());
  }
  auto target_text = m[3].str();
  TermParser tp(target_text, &sig, line, conclusion_column + m.position(3));
  r.target = tp.parse();
  if (!tp.at_end()) throw Error(Error::Kind::syntax, "trailing input after target in rule '" + name + "'", line, column);
  return r;
}

}  // namespace

Term Rule::source() const {
  std::vector<Term> args;
  for (const auto& v : source_vars) args.push_back(Term::var(v));
  return Term::app(op, std::move(args));
}

std::string Rule::str() const {
  std::string s = name + ": ";
  for (std::size_t i = 0; i < premises.size(); ++i) {
    if (i) s += ", ";
    s += premises[i].lhs + " -" + premises[i].label + "-> " + premises[i].rhs;
  }
  if (!premises.empty()) s += ' ';
  s += "|- " + source().str() + " -" + label + "-> " + target.str();
  return s;
}

std::vector<const Rule*> GsosLanguage::rules_for(std::string_view op) const {
  std::vector<const Rule*> out;
  for (const auto& r : rules) {
    if (r.op == op) out.push_back(&r);
  }
  return out;
}

void validate_rule(const Rule& r, const Signature& sig) {
  auto fail = [&](Error::Kind kind, const std::string& msg) { throw Error(kind, "rule '" + r.name + "': " + msg, r.line, 1); };
  if (!sig.has_label(r.label)) fail(Error::Kind::unknown_label, "unknown label '" + r.label + "'");
  std::set<std::string> sources;
  for (const auto& x : r.source_vars) {
    if (!sources.insert(x).second) fail(Error::Kind::duplicate_source_variable, "source variable '" + x + "' is not distinct");
  }
  std::set<std::string> targets;
  for (const auto& p : r.premises) {
    if (!sig.has_label(p.label)) fail(Error::Kind::unknown_label, "unknown label '" + p.label + "'");
    if (!sources.count(p.lhs)) fail(Error::Kind::premise_lhs_not_source, "premise left-hand side '" + p.lhs + "' is not a source variable");
    if (sources.count(p.rhs)) fail(Error::Kind::premise_target_clashes_source, "premise right-hand side '" + p.rhs + "' occurs in the source");
    if (!targets.insert(p.rhs).second) fail(Error::Kind::duplicate_premise_target, "premise right-hand side '" + p.rhs + "' is not distinct");
  }
  for (const auto& v : vars_of(r.target)) {
    if (!sources.count(v) && !targets.count(v)) {
      fail(Error::Kind::unhoused_target_variable, "target variable '" + v + "' occurs neither in the source nor in a premise");
    }
  }
}

GsosLanguage load_language(std::string_view text) {
  GsosLanguage lang;
  std::vector<RuleSchema> schemas;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    auto line = trim(raw);
    if (line.empty()) continue;
    auto sp = line.find_first_of(" \t");
    auto keyword = line.substr(0, sp);
    auto rest = sp == std::string::npos ? std::string() : trim(line.substr(sp));
    if (keyword == "language") {
      lang.name = rest;
    } else if (keyword == "labels") {
      for (const auto& l : split_commas(rest)) {
        if (!is_identifier(l)) throw Error(Error::Kind::syntax, "bad label '" + l + "'", line_no, 1);
        lang.signature.add_label(l);
      }
    } else if (keyword == "op") {
      static const std::regex op_re(R"(^([A-Za-z_][A-Za-z0-9_']*)(\[\s*\*(\s*,\s*\*)*\s*\])?\s+([0-9]+)$)");
      std::smatch m;
      if (!std::regex_match(rest, m, op_re)) throw Error(Error::Kind::syntax, "malformed op declaration", line_no, 1);
      std::size_t indices = m[2].matched ? std::count(m[2].first, m[2].second, '*') : 0;
      try {
        lang.signature.add_operator(m[1].str(), std::stoul(m[4].str()), indices);
      } catch (const Error& e) {
        throw Error(e.kind(), e.what(), line_no, 1);
      }
    } else if (keyword == "rule") {
      auto colon = rest.find(':');
      if (colon == std::string::npos) throw Error(Error::Kind::syntax, "rule lacks ':'", line_no, 1);
      auto header = trim(rest.substr(0, colon));
      RuleSchema s;
      s.line = line_no;
      s.body = rest.substr(colon + 1);
      s.body_column = line.size() - s.body.size() + 1;
      auto where_pos = header.find(" where ");
      std::string where_part;
      if (where_pos != std::string::npos) {
        where_part = header.substr(where_pos + 7);
        header = trim(header.substr(0, where_pos));
      }
      auto forall_pos = header.find(" forall ");
      if (forall_pos != std::string::npos) {
        s.metavars = split_commas(header.substr(forall_pos + 8));
        header = trim(header.substr(0, forall_pos));
      }
      if (!is_identifier(header)) throw Error(Error::Kind::syntax, "bad rule name '" + header + "'", line_no, 1);
      s.name = header;
      for (const auto& c : split_commas(where_part)) {
        static const std::regex cond_re(R"(^(\S+)\s*(!=|=)\s*(\S+)$)");
        std::smatch m;
        if (!std::regex_match(c, m, cond_re)) throw Error(Error::Kind::syntax, "malformed where-condition '" + c + "'", line_no, 1);
        s.conditions.push_back(Condition{m[1].str(), m[3].str(), m[2].str() == "="});
      }
      schemas.push_back(std::move(s));
    } else {
      throw Error(Error::Kind::syntax, "unknown declaration '" + keyword + "'", line_no, 1);
    }
  }

  const auto& labels = lang.signature.labels();
  for (const auto& s : schemas) {
    std::vector<std::size_t> idx(s.metavars.size(), 0);
    while (true) {
      std::map<std::string, std::string> inst;
      for (std::size_t i = 0; i < idx.size(); ++i) inst[s.metavars[i]] = labels[idx[i]];
      auto resolve = [&](const std::string& x) {
        auto it = inst.find(x);
        return it == inst.end() ? x : it->second;
      };
      bool keep = std::all_of(s.conditions.begin(), s.conditions.end(), [&](const Condition& c) {
        return (resolve(c.lhs) == resolve(c.rhs)) == c.equal;
      });
      if (keep) {
        std::string name = s.name;
        if (!s.metavars.empty()) {
          name += '[';
          for (std::size_t i = 0; i < idx.size(); ++i) name += (i ? "," : "") + labels[idx[i]];
          name += ']';
        }
        auto rule = parse_concrete_rule(name, substitute_identifiers(s.body, inst), lang.signature, s.line, s.body_column);
        validate_rule(rule, lang.signature);
        lang.rules.push_back(std::move(rule));
      }
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == labels.size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  return lang;
}

GsosLanguage load_language_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::invalid_argument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_language(ss.str());
}

// ---------------------------------------------------------------------------

RuleProperties rule_properties(const Rule& r) {
  RuleProperties p;
  std::set<std::string> lhs;
  p.straight = true;
  for (const auto& pr : r.premises) p.straight = lhs.insert(pr.lhs).second && p.straight;
  auto target_vars = vars_of(r.target);
  p.smooth = p.straight && std::none_of(lhs.begin(), lhs.end(), [&](const auto& x) { return target_vars.count(x) > 0; });

  if (r.premises.size() == 1 && r.label == kTau && r.premises[0].label == kTau && !r.target.is_var() &&
      r.target.name() == r.op && r.target.args().size() == r.source_vars.size()) {
    const auto& pr = r.premises[0];
    std::optional<std::size_t> arg;
    bool shape = true;
    for (std::size_t i = 0; i < r.source_vars.size(); ++i) {
      const auto& a = r.target.args()[i];
      if (!a.is_var()) {
        shape = false;
        break;
      }
      if (r.source_vars[i] == pr.lhs) {
        if (a.name() != pr.rhs) shape = false;
        arg = i + 1;
      } else if (a.name() != r.source_vars[i]) {
        shape = false;
      }
    }
    if (shape && arg) p.patience_argument = arg;
  }
  return p;
}

RoleTable argument_roles(const GsosLanguage& lang) {
  RoleTable table;
  for (const auto& [op, arity] : lang.signature.concrete_operators()) {
    for (std::size_t i = 1; i <= arity; ++i) table[{op, i}] = ArgumentRole{};
  }
  for (const auto& r : lang.rules) {
    for (std::size_t i = 0; i < r.source_vars.size(); ++i) {
      for (const auto& p : r.premises) {
        if (p.lhs == r.source_vars[i]) table[{r.op, i + 1}].active = true;
      }
    }
    if (auto arg = rule_properties(r).patience_argument) table[{r.op, *arg}].has_patience = true;

    std::set<std::string> receiving;
    for (const auto& p : r.premises) receiving.insert(p.rhs);
    if (receiving.empty()) continue;
    std::function<void(const Term&)> scan = [&](const Term& t) {
      if (t.is_var()) return;
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        auto vs = vars_of(t.args()[i]);
        if (std::any_of(vs.begin(), vs.end(), [&](const auto& v) { return receiving.count(v) > 0; })) {
          table[{t.name(), i + 1}].receiving = true;
        }
        scan(t.args()[i]);
      }
    };
    scan(r.target);
  }
  return table;
}

std::string Witness::str() const {
  if (!rule.empty()) return "rule " + rule;
  return "(" + op + ", argument " + std::to_string(argument) + ")";
}

FormatReport classify_format(const GsosLanguage& lang) {
  FormatReport rep;
  auto add = [&](int clause, Witness w) {
    rep.clauses[clause].ok = false;
    rep.clauses[clause].witnesses.push_back(std::move(w));
  };
  for (const auto& r : lang.rules) {
    auto props = rule_properties(r);
    if (!props.straight) add(0, Witness{r.name, {}, 0});
    bool tau_premise = std::any_of(r.premises.begin(), r.premises.end(), [](const Premise& p) { return p.label == kTau; });
    if (tau_premise && !props.patience_argument) add(1, Witness{r.name, {}, 0});
    if (!props.smooth) add(4, Witness{r.name, {}, 0});
  }
  for (const auto& [key, role] : argument_roles(lang)) {
    if (role.active && !role.has_patience) add(2, Witness{{}, key.first, key.second});
    if (role.receiving && !role.has_patience) add(3, Witness{{}, key.first, key.second});
  }
  for (auto& c : rep.clauses) {
    std::sort(c.witnesses.begin(), c.witnesses.end());
    c.witnesses.erase(std::unique(c.witnesses.begin(), c.witnesses.end()), c.witnesses.end());
  }
  bool c1 = rep.clauses[0].ok, c2 = rep.clauses[1].ok, c3 = rep.clauses[2].ok, c4 = rep.clauses[3].ok,
       c5 = rep.clauses[4].ok;
  rep.bb_cool = c1 && c2 && c3;
  rep.hb_cool = rep.bb_cool && c4;
  rep.db_cool = rep.bb_cool && c5;
  rep.wb_cool = rep.bb_cool && c4 && c5;
  return rep;
}

std::string FormatReport::to_json() const {
  nlohmann::ordered_json j;
  for (int i = 0; i < 5; ++i) {
    nlohmann::ordered_json c;
    c["ok"] = clauses[i].ok;
    c["witnesses"] = nlohmann::ordered_json::array();
    for (const auto& w : clauses[i].witnesses) {
      nlohmann::ordered_json wj;
      if (!w.rule.empty()) {
        wj["rule"] = w.rule;
      } else {
        wj["operator"] = w.op;
        wj["argument"] = w.argument;
      }
      c["witnesses"].push_back(wj);
    }
    j["clauses"]["c" + std::to_string(i + 1)] = c;
  }
  j["formats"] = {{"wb", wb_cool}, {"bb", bb_cool}, {"hb", hb_cool}, {"db", db_cool}};
  return j.dump(2);
}

}  // namespace cool
