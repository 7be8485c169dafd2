#include <filesystem>
#include <fstream>
#include <sstream>

#include "cool/upto.hpp"
#include "json.hpp"

namespace cool {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(Error::Kind::invalid_argument, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TermRelation pairs_from(const nlohmann::json& j, const Signature& sig) {
  TermRelation out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw Error(Error::Kind::invalid_argument, "relation entries are [left, right]");
    auto l = parse_term(p[0].get<std::string>(), sig), r = parse_term(p[1].get<std::string>(), sig);
    if (!l.closed() || !r.closed()) throw Error(Error::Kind::invalid_argument, "relation terms must be closed");
    out.emplace(std::move(l), std::move(r));
  }
  return out;
}

}  // namespace

Certificate load_certificate(const std::string& path) {
  std::filesystem::path cert_path(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(cert_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Error::Kind::syntax, path + ": " + e.what());
  }
  auto dir = cert_path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : dir / q;
  };

  try {
    Certificate c;
    c.spec_path = resolve(j.at("spec").get<std::string>()).string();
    c.lang = load_language_file(c.spec_path);
    const auto& sig = c.lang.signature;
    c.relation = pairs_from(j.at("relation"), sig);
    c.technique_text = j.at("technique").get<std::string>();
    c.technique = parse_technique(c.technique_text);
    auto kind_text = j.value("kind", std::string("branching_bisim"));
    auto kind = parse_kind(kind_text);
    if (!kind) throw Error(Error::Kind::invalid_argument, "unknown kind '" + kind_text + "'");
    c.kind = *kind;

    if (j.contains("laws")) {
      const auto& l = j["laws"];
      c.context.law_sets = l.is_string() ? load_laws(read_file(resolve(l.get<std::string>())), sig) : load_laws(l.dump(), sig);
    }
    if (j.contains("constants")) {
      for (const auto& [name, rel] : j["constants"].items()) c.context.constants[name] = pairs_from(rel, sig);
    }
    if (j.contains("bounds")) {
      const auto& b = j["bounds"];
      c.context.rewrite_depth = b.value("rewrite_depth", c.context.rewrite_depth);
      c.context.rewrite_budget = b.value("rewrite_budget", c.context.rewrite_budget);
      c.context.pair_budget = b.value("pair_budget", c.context.pair_budget);
      c.budget.max_states = b.value("max_states", c.budget.max_states);
      if (b.contains("max_depth")) c.budget.max_depth = b["max_depth"].get<std::size_t>();
      if (b.contains("rewrite_under")) c.context.rewrite_under = b["rewrite_under"].get<std::vector<std::string>>();
    }
    if (j.contains("verify_laws")) {
      const auto& v = j["verify_laws"];
      for (const auto& t : v.at("samples")) c.law_samples.push_back(parse_term(t.get<std::string>(), sig));
      c.law_budget.max_states = v.value("max_states", c.law_budget.max_states);
      if (v.contains("max_depth")) c.law_budget.max_depth = v["max_depth"].get<std::size_t>();
    }
    c.context.require_verified_laws = j.value("require_verified_laws", false);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Error::Kind::invalid_argument, path + ": " + e.what());
  }
}

CertificateRun run_certificate(const Certificate& cert) {
  std::vector<Term> roots;
  for (const auto& [l, r] : cert.relation) {
    roots.push_back(l);
    roots.push_back(r);
  }
  for (const auto& [name, rel] : cert.context.constants) {
    for (const auto& [l, r] : rel) {
      roots.push_back(l);
      roots.push_back(r);
    }
  }
  CertificateRun run{explore(cert.lang, roots, cert.budget), {}};
  UpToContext ctx = cert.context;
  ctx.lang = &cert.lang;
  if (!cert.law_samples.empty()) {
    for (auto& [name, set] : ctx.law_sets) {
      for (auto& law : set.laws) law.status = verify_law(cert.lang, law, cert.law_samples, cert.law_budget).status;
    }
  }
  run.context = ctx;
  UpToEngine engine(run.universe, ctx);
  run.report = check_up_to(engine, cert.relation, cert.technique, cert.kind);
  return run;
}

}  // namespace cool
