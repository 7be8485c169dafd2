// coolcheck: command-line front end for format classification, exploration, equivalence
// checking and up-to certificates.

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "cool/upto.hpp"
#include "json.hpp"

using namespace cool;

namespace {

constexpr int kOk = 0;
constexpr int kRefuted = 1;
constexpr int kInconclusive = 2;
constexpr int kInputError = 3;

struct Options {
  bool json = false;
  std::uint64_t seed = 1;
  std::size_t max_states = 10000;
  std::size_t max_depth = 0;
  std::string emit_lts;
  std::string kind = "branching_bisim";
  std::string spec;
  std::string left;
  std::string right;
  std::vector<std::string> terms;
  std::string cert;
  std::string laws;
  std::vector<std::string> samples;
  std::string technique = "ctx";
  std::size_t instances = 100;
  std::string r_json;
  std::string s_json;
  bool require_verified = false;
};

Budget budget_of(const Options& o) {
  Budget b;
  b.max_states = o.max_states;
  if (o.max_depth) b.max_depth = o.max_depth;
  return b;
}

FunctionalKind kind_of(const std::string& text) {
  auto k = parse_kind(text);
  if (!k) throw Error(Error::Kind::invalid_argument, "unknown kind '" + text + "'");
  return *k;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Error::Kind::invalid_argument, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_lts(const Options& o, const Lts& lts) {
  if (o.emit_lts.empty()) return;
  std::ofstream out(o.emit_lts);
  if (!out) throw Error(Error::Kind::invalid_argument, "cannot write " + o.emit_lts);
  bool as_json = o.emit_lts.size() >= 5 && o.emit_lts.substr(o.emit_lts.size() - 5) == ".json";
  out << (as_json ? lts.to_json() : lts.to_aldebaran());
}

// --- commands ---------------------------------------------------------------

int cmd_validate(const Options& o) {
  auto lang = load_language_file(o.spec);
  if (o.json) {
    nlohmann::ordered_json j;
    j["language"] = lang.name;
    j["operators"] = lang.signature.concrete_operators().size();
    j["rules"] = lang.rules.size();
    j["valid"] = true;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "valid: " << (lang.name.empty() ? "" : lang.name + ", ") << lang.signature.concrete_operators().size() << " operators, "
              << lang.rules.size() << " rules\n";
  }
  return kOk;
}

int cmd_classify(const Options& o) {
  auto lang = load_language_file(o.spec);
  auto rep = classify_format(lang);
  if (o.json) {
    std::cout << rep.to_json() << "\n";
    return kOk;
  }
  static const char* names[] = {"straight", "tau premises only in patience rules", "active arguments patient",
                                "receiving arguments patient", "smooth"};
  for (int i = 0; i < 5; ++i) {
    std::cout << "clause " << i + 1 << " (" << names[i] << "): " << (rep.clauses[i].ok ? "ok" : "fails");
    for (const auto& w : rep.clauses[i].witnesses) std::cout << "\n  witness " << w.str();
    std::cout << "\n";
  }
  std::cout << "formats: wb " << rep.wb_cool << ", bb " << rep.bb_cool << ", hb " << rep.hb_cool << ", db "
            << rep.db_cool << "\n";
  return kOk;
}

int cmd_explore(const Options& o) {
  auto lang = load_language_file(o.spec);
  std::vector<Term> roots;
  for (const auto& t : o.terms) roots.push_back(parse_term(t, lang.signature));
  auto lts = explore(lang, roots, budget_of(o));
  emit_lts(o, lts);
  std::size_t frontier = 0;
  for (StateId s = 0; s < lts.size(); ++s) frontier += lts.frontier(s);
  if (o.json) {
    std::cout << lts.to_json() << "\n";
  } else {
    std::cout << "states " << lts.size() << ", transitions " << lts.transition_count() << ", frontier " << frontier
              << "\n";
    std::cout << lts.to_aldebaran();
  }
  return lts.truncated() ? kInconclusive : kOk;
}

int cmd_equiv(const Options& o) {
  auto kind = kind_of(o.kind);
  auto lang = load_language_file(o.spec);
  auto l = parse_term(o.left, lang.signature);
  auto r = parse_term(o.right, lang.signature);
  auto lts = explore(lang, {l, r}, budget_of(o));
  emit_lts(o, lts);
  auto rel = lts.truncated() ? gfp_bounded(kind, lts) : gfp(kind, lts);
  bool related = rel.contains(*lts.find(l), *lts.find(r));
  std::string verdict = !related ? "not equivalent" : lts.truncated() ? "equivalent up to the bound" : "equivalent";
  if (o.json) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(kind);
    j["left"] = l.str();
    j["right"] = r.str();
    j["verdict"] = verdict;
    j["truncated"] = lts.truncated();
    j["states"] = lts.size();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << verdict << "\n";
  }
  if (!related) return kRefuted;
  return lts.truncated() ? kInconclusive : kOk;
}

void print_chain(std::ostream& os, const std::vector<RewriteStep>& chain, const std::string& indent) {
  for (const auto& s : chain) {
    os << indent << (s.grade == Grade::strong ? "~ " : ">~ ") << s.to.str() << "   [" << s.law << "]\n";
  }
}

void print_derivation(std::ostream& os, const Derivation& d, const std::string& indent) {
  os << indent << d.rule << " (" << d.left.str() << ", " << d.right.str() << ")";
  if (!d.note.empty()) os << "  " << d.note;
  os << "\n";
  if (!d.left_chain.empty()) {
    os << indent << "  left chain:\n";
    print_chain(os, d.left_chain, indent + "    ");
  }
  if (!d.right_chain.empty()) {
    os << indent << "  right chain:\n";
    print_chain(os, d.right_chain, indent + "    ");
  }
  for (const auto& c : d.children) print_derivation(os, c, indent + "  ");
}

void print_report(std::ostream& os, const CheckReport& rep, const Lts& lts) {
  os << "verdict: " << to_string(rep.verdict) << "\n";
  os << "kind: " << to_string(rep.kind) << ", technique: " << rep.technique << (rep.truncated ? ", truncated" : "")
     << "\n";
  os << "advisory: " << to_string(rep.advisory.level) << "\n";
  for (const auto& n : rep.advisory.notes) os << "  " << n << "\n";
  for (const auto& p : rep.pairs) {
    os << "pair (" << lts.term(p.left).str() << ", " << lts.term(p.right).str() << "): " << to_string(p.verdict) << "\n";
    for (const auto& c : p.challenges) {
      os << "  " << (c.left_side ? "left " : "right ") << lts.term(c.from).str();
      if (!c.label.empty()) os << " -" << c.label << "-> " << lts.term(c.to).str();
      os << ": " << to_string(c.verdict);
      if (!c.note.empty()) os << " (" << c.note << ")";
      os << "\n";
      if (!c.answer) continue;
      const auto& a = *c.answer;
      os << "    answer " << lts.term(a.mid).str() << " -(" << c.label << ")-> " << lts.term(a.next).str();
      if (a.last != a.next) os << " => " << lts.term(a.last).str();
      os << "\n";
      for (const auto& ob : a.obligations) print_derivation(os, ob.derivation, "      ");
    }
  }
}

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::certified: return kOk;
    case Verdict::refuted: return kRefuted;
    case Verdict::inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

int cmd_check_upto(const Options& o) {
  auto cert = load_certificate(o.cert);
  if (o.require_verified) cert.context.require_verified_laws = true;
  auto run = run_certificate(cert);
  emit_lts(o, run.universe);
  if (o.json) {
    std::cout << run.report.to_json(run.universe) << "\n";
  } else {
    print_report(std::cout, run.report, run.universe);
  }
  return verdict_code(run.report.verdict);
}

int cmd_verify_laws(const Options& o) {
  auto lang = load_language_file(o.spec);
  auto sets = load_laws(slurp(o.laws), lang.signature);
  std::vector<Term> samples;
  for (const auto& s : o.samples) samples.push_back(parse_term(s, lang.signature));
  if (samples.empty()) {
    for (const auto& [name, arity] : lang.signature.concrete_operators()) {
      if (arity == 0) samples.push_back(Term::app(name));
    }
  }
  auto budget = budget_of(o);
  bool failed = false, bounded = false;
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& [set, ls] : sets) {
    for (const auto& law : ls.laws) {
      auto check = verify_law(lang, law, samples, budget);
      failed = failed || check.status == "failed";
      bounded = bounded || check.status.rfind("verified-at-bound", 0) == 0;
      if (o.json) {
        nlohmann::ordered_json j;
        j["set"] = set;
        j["law"] = check.law;
        j["status"] = check.status;
        j["instances"] = check.instances.size();
        if (!check.failing_instance.empty()) j["failing_instance"] = check.failing_instance;
        out.push_back(std::move(j));
      } else {
        std::cout << set << "/" << check.law << ": " << check.status;
        if (!check.failing_instance.empty()) std::cout << " at " << check.failing_instance;
        std::cout << " (" << check.instances.size() << " instances)\n";
      }
    }
  }
  if (o.json) std::cout << out.dump(2) << "\n";
  if (failed) return kRefuted;
  return bounded ? kInconclusive : kOk;
}

TermRelation relation_arg(const std::string& text, const Signature& sig) {
  TermRelation out;
  for (const auto& p : nlohmann::json::parse(text)) {
    out.emplace(parse_term(p.at(0).get<std::string>(), sig), parse_term(p.at(1).get<std::string>(), sig));
  }
  return out;
}

int cmd_respectful(const Options& o) {
  auto kind = kind_of(o.kind);
  auto lang = load_language_file(o.spec);
  auto f = parse_technique(o.technique);
  std::vector<Term> roots;
  for (const auto& t : o.terms) roots.push_back(parse_term(t, lang.signature));
  TermRelation fixed_r, fixed_s;
  bool fixed = !o.r_json.empty() || !o.s_json.empty();
  if (fixed) {
    fixed_r = relation_arg(o.r_json.empty() ? "[]" : o.r_json, lang.signature);
    fixed_s = relation_arg(o.s_json.empty() ? "[]" : o.s_json, lang.signature);
    for (const auto& rel : {fixed_r, fixed_s}) {
      for (const auto& [a, b] : rel) {
        roots.push_back(a);
        roots.push_back(b);
      }
    }
  }
  auto lts = explore(lang, roots, budget_of(o));
  emit_lts(o, lts);
  if (lts.truncated()) {
    std::cout << "fragment is not frontier-free\n";
    return kInconclusive;
  }
  UpToContext ctx;
  ctx.lang = &lang;
  UpToEngine engine(lts, ctx);

  std::vector<std::pair<TermRelation, TermRelation>> cases;
  if (fixed) {
    cases.emplace_back(fixed_r, fixed_s);
  } else {
    std::mt19937_64 rng(o.seed);
    std::bernoulli_distribution coin(0.3);
    for (std::size_t i = 0; i < o.instances; ++i) {
      Relation s(lts.size());
      for (StateId a = 0; a < lts.size(); ++a) {
        for (StateId b = 0; b < lts.size(); ++b) {
          if (coin(rng)) s.insert(a, b);
        }
      }
      Relation r(lts.size());
      for (auto [a, b] : s.intersect(step(kind, lts, s)).pairs()) {
        if (coin(rng)) r.insert(a, b);
      }
      cases.emplace_back(to_term_relation(lts, r), to_term_relation(lts, s));
    }
  }
  std::size_t passed = 0, vacuous = 0;
  std::string witness;
  for (const auto& [r, s] : cases) {
    auto res = test_respectful_instance(engine, f, kind, r, s);
    vacuous += res.vacuous;
    if (res.passed) {
      ++passed;
    } else if (witness.empty()) {
      witness = res.witness;
    }
  }
  if (o.json) {
    nlohmann::ordered_json j;
    j["technique"] = f.str();
    j["kind"] = to_string(kind);
    j["instances"] = cases.size();
    j["passed"] = passed;
    j["vacuous"] = vacuous;
    if (!witness.empty()) j["witness"] = witness;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << passed << "/" << cases.size() << " instances passed (" << vacuous << " vacuous)\n";
    if (!witness.empty()) std::cout << "failing instance: " << witness << "\n";
  }
  return passed == cases.size() ? kOk : kRefuted;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coolcheck: GSOS format classification and up-to bisimulation certificates"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--json", o.json, "machine-readable output");
  app.add_option("--seed", o.seed, "seed for randomised sampling");
  app.add_option("--max-states", o.max_states, "exploration state budget");
  app.add_option("--max-depth", o.max_depth, "exploration depth bound (0 = none)");
  app.add_option("--emit-lts", o.emit_lts, "write the explored LTS (.json or Aldebaran)");

  auto* validate = app.add_subcommand("validate", "check a .gsos specification");
  validate->add_option("spec", o.spec)->required();
  auto* classify = app.add_subcommand("classify", "classify a specification against the cool formats");
  classify->add_option("spec", o.spec)->required();
  auto* exp = app.add_subcommand("explore", "explore the canonical model from closed terms");
  exp->add_option("--spec", o.spec)->required();
  exp->add_option("--term", o.terms, "root term (repeatable)")->required();
  auto* eq = app.add_subcommand("equiv", "decide an equivalence or preorder between two terms");
  eq->add_option("--kind", o.kind);
  eq->add_option("--spec", o.spec)->required();
  eq->add_option("--left", o.left)->required();
  eq->add_option("--right", o.right)->required();
  auto* up = app.add_subcommand("check-upto", "check an up-to certificate");
  up->add_option("--cert", o.cert)->required();
  up->add_flag("--require-verified-laws", o.require_verified);
  auto* vl = app.add_subcommand("verify-laws", "check laws on sample instantiations");
  vl->add_option("--spec", o.spec)->required();
  vl->add_option("--laws", o.laws)->required();
  vl->add_option("--sample", o.samples, "sample closed term (repeatable); default: constants");
  auto* rt = app.add_subcommand("respectful-test", "test f(R) within b(f(S)) on sampled instances");
  rt->add_option("--spec", o.spec)->required();
  rt->add_option("--term", o.terms, "root term of the fragment (repeatable)");
  rt->add_option("--technique", o.technique);
  rt->add_option("--kind", o.kind);
  rt->add_option("--instances", o.instances);
  rt->add_option("--r", o.r_json, "fixed R as [[left, right], ...]");
  rt->add_option("--s", o.s_json, "fixed S as [[left, right], ...]");
  for (auto* sub : {validate, classify, exp, eq, up, vl, rt}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*classify) return cmd_classify(o);
    if (*exp) return cmd_explore(o);
    if (*eq) return cmd_equiv(o);
    if (*up) return cmd_check_upto(o);
    if (*vl) return cmd_verify_laws(o);
    if (*rt) return cmd_respectful(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
