#include "cool/upto.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "json.hpp"

namespace cool {

TermRelation to_term_relation(const Lts& lts, const Relation& r) {
  TermRelation out;
  for (auto [a, b] : r.pairs()) out.emplace(lts.term(a), lts.term(b));
  return out;
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::found: return "found";
    case Membership::not_found: return "not-found";
    case Membership::unknown: return "unknown";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(Advisory::Level l) {
  switch (l) {
    case Advisory::Level::certified: return "certified";
    case Advisory::Level::uncertified: return "uncertified";
    case Advisory::Level::unsound: return "unsound";
  }
  return "?";
}

namespace {

using Base = std::function<MemberResult(const Term&, const Term&)>;

MemberResult found(Derivation d) { return MemberResult{Membership::found, std::move(d), {}}; }

MemberResult missing(std::string reason) {
  MemberResult r;
  r.status = Membership::not_found;
  r.reason = std::move(reason);
  return r;
}

MemberResult unknown(std::string reason) {
  MemberResult r;
  r.status = Membership::unknown;
  r.reason = std::move(reason);
  return r;
}

Derivation leaf(std::string rule, const Term& l, const Term& r) {
  Derivation d;
  d.rule = std::move(rule);
  d.left = l;
  d.right = r;
  return d;
}

/// Breadth-first rewrite closure of one term; nodes are kept in rank order.
struct RewriteTree {
  struct Node {
    Term term;
    std::size_t parent;
    RewriteStep step;
  };
  std::vector<Node> nodes;
  std::vector<std::size_t> layer_start;  // layer d occupies [layer_start[d], layer_start[d+1])
  bool truncated = false;

  std::size_t layers() const { return layer_start.size() - 1; }

  std::vector<RewriteStep> chain(std::size_t i) const {
    std::vector<RewriteStep> out;
    while (i != 0) {
      out.push_back(nodes[i].step);
      i = nodes[i].parent;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }
};

RewriteTree build_tree(const Term& root, const LawSet& laws, std::size_t depth, std::size_t budget,
                       const std::vector<std::string>& under) {
  RewriteTree tree;
  tree.nodes.push_back({root, 0, RewriteStep{}});
  tree.layer_start = {0, 1};
  std::unordered_set<Term> seen{root};
  for (std::size_t d = 0; d < depth && !tree.truncated; ++d) {
    auto begin = tree.layer_start[d], end = tree.layer_start[d + 1];
    for (auto i = begin; i < end && !tree.truncated; ++i) {
      for (auto& s : rewrites(tree.nodes[i].term, laws, under)) {
        if (!seen.insert(s.to).second) continue;
        if (tree.nodes.size() >= budget) {
          tree.truncated = true;
          break;
        }
        auto to = s.to;
        tree.nodes.push_back({to, i, std::move(s)});
      }
    }
    if (tree.nodes.size() == tree.layer_start.back()) break;
    tree.layer_start.push_back(tree.nodes.size());
  }
  return tree;
}

bool replay_step(const RewriteStep& s, const LawSet& laws, const std::vector<std::string>& under) {
  for (const auto& cand : rewrites(s.from, laws, under)) {
    if (cand.to == s.to && cand.law == s.law && cand.grade == s.grade) return true;
  }
  return false;
}

}  // namespace

struct UpToEngine::Impl {
  std::map<FunctionalKind, Relation> gfps;
  std::map<std::pair<std::string, Term>, RewriteTree> trees;

  const Relation* gfp_of(const Lts& lts, FunctionalKind kind) {
    if (lts.truncated()) return nullptr;
    auto it = gfps.find(kind);
    if (it == gfps.end()) it = gfps.emplace(kind, gfp(kind, lts)).first;
    return &it->second;
  }

  const RewriteTree& tree(const UpToContext& ctx, const std::string& set, const Term& t) {
    auto key = std::make_pair(set, t);
    auto it = trees.find(key);
    if (it != trees.end()) return it->second;
    return trees.emplace(key, build_tree(t, laws(ctx, set), ctx.rewrite_depth, ctx.rewrite_budget, ctx.rewrite_under))
        .first->second;
  }

  static const LawSet& laws(const UpToContext& ctx, const std::string& set) {
    auto it = ctx.law_sets.find(set);
    if (it == ctx.law_sets.end()) throw Error(Error::Kind::invalid_argument, "unknown law set '" + set + "'");
    if (ctx.require_verified_laws) {
      for (const auto& l : it->second.laws) {
        if (l.status.rfind("verified", 0) != 0) {
          throw Error(Error::Kind::invalid_argument, "law '" + l.name + "' is not verified");
        }
      }
    }
    return it->second;
  }
};

UpToEngine::UpToEngine(const Lts& lts, const UpToContext& ctx) : lts_(lts), ctx_(ctx), impl_(new Impl) {}
UpToEngine::~UpToEngine() { delete impl_; }

namespace {

class MemberSearch {
 public:
  MemberSearch(const Lts& lts, const UpToContext& ctx, UpToEngine::Impl& impl) : lts_(lts), ctx_(ctx), impl_(impl) {}

  MemberResult run(const TechniqueExpr& f, const Base& base, const Term& p, const Term& q) {
    using K = TechniqueExpr::Kind;
    switch (f.kind) {
      case K::id: return base(p, q);
      case K::constant: {
        auto it = ctx_.constants.find(f.name);
        if (it == ctx_.constants.end()) throw Error(Error::Kind::invalid_argument, "unknown constant relation '" + f.name + "'");
        if (it->second.count({p, q})) {
          auto d = leaf("const", p, q);
          d.note = f.name;
          return found(d);
        }
        return missing("pair not in constant " + f.name);
      }
      case K::unite: {
        bool unsure = false;
        for (std::size_t i = 0; i < f.parts.size(); ++i) {
          auto r = run(f.parts[i], base, p, q);
          if (r.status == Membership::found) {
            auto d = leaf("union", p, q);
            d.note = std::to_string(i);
            d.children.push_back(std::move(r.derivation));
            return found(d);
          }
          unsure = unsure || r.status == Membership::unknown;
        }
        return unsure ? unknown("some union branch undecided") : missing("no union branch applies");
      }
      case K::compose: return compose(f, f.parts.size(), base, p, q);
      case K::ctx: return ctx(base, p, q);
      case K::sandwich_sem: return sandwich_sem(f, base, p, q);
      case K::sandwich_laws: return sandwich_laws(f, base, p, q);
    }
    return missing("?");
  }

 private:
  MemberResult compose(const TechniqueExpr& f, std::size_t n, const Base& base, const Term& p, const Term& q) {
    if (n == 1) return wrap_compose(run(f.parts[0], base, p, q), p, q);
    Base inner = [&, n](const Term& a, const Term& b) { return compose(f, n - 1, base, a, b); };
    return wrap_compose(run(f.parts[n - 1], inner, p, q), p, q);
  }

  static MemberResult wrap_compose(MemberResult r, const Term& p, const Term& q) {
    if (r.status != Membership::found) return r;
    auto d = leaf("compose", p, q);
    d.children.push_back(std::move(r.derivation));
    return found(d);
  }

  MemberResult ctx(const Base& base, const Term& p, const Term& q) {
    auto b = base(p, q);
    if (b.status == Membership::found) return b;
    if (p == q) return found(leaf("refl", p, q));
    bool unsure = b.status == Membership::unknown;
    if (p.is_var() || q.is_var() || p.name() != q.name() || p.args().size() != q.args().size()) {
      return unsure ? b : missing("different head operators and not related");
    }
    auto d = leaf("cong", p, q);
    for (std::size_t i = 0; i < p.args().size(); ++i) {
      auto r = ctx(base, p.args()[i], q.args()[i]);
      if (r.status == Membership::not_found) return unsure ? b : r;
      if (r.status == Membership::unknown) return r;
      d.children.push_back(std::move(r.derivation));
    }
    return found(d);
  }

  MemberResult sandwich_sem(const TechniqueExpr& f, const Base& base, const Term& p, const Term& q) {
    auto sp = lts_.find(p), sq = lts_.find(q);
    if (!sp || !sq) return unknown("sandwich endpoints are not explored states");
    const Relation* gl = impl_.gfp_of(lts_, f.left_kind);
    const Relation* gr = impl_.gfp_of(lts_, f.right_kind);
    if (!gl || !gr) return unknown("semantic sandwich over a truncated universe");
    bool unsure = false;
    for (StateId p0 = 0; p0 < lts_.size(); ++p0) {
      if (!gl->contains(*sp, p0)) continue;
      for (StateId q0 = 0; q0 < lts_.size(); ++q0) {
        if (!gr->contains(*sq, q0)) continue;
        auto r = run(f.parts[0], base, lts_.term(p0), lts_.term(q0));
        if (r.status == Membership::found) {
          auto d = leaf("sandwich", p, q);
          d.note = std::string("gfp:") + to_string(f.left_kind) + " / gfp:" + to_string(f.right_kind);
          d.children.push_back(std::move(r.derivation));
          return found(d);
        }
        unsure = unsure || r.status == Membership::unknown;
      }
    }
    return unsure ? unknown("inner membership undecided") : missing("no related intermediate states");
  }

  MemberResult sandwich_laws(const TechniqueExpr& f, const Base& base, const Term& p, const Term& q) {
    const auto& lt = impl_.tree(ctx_, f.left_laws, p);
    const auto& rt = impl_.tree(ctx_, f.right_laws, q);
    std::size_t attempts = 0;
    for (std::size_t total = 0; total <= lt.layers() - 1 + rt.layers() - 1; ++total) {
      for (std::size_t dl = 0; dl <= total; ++dl) {
        std::size_t dr = total - dl;
        if (dl >= lt.layers() || dr >= rt.layers()) continue;
        for (auto i = lt.layer_start[dl]; i < lt.layer_start[dl + 1]; ++i) {
          for (auto j = rt.layer_start[dr]; j < rt.layer_start[dr + 1]; ++j) {
            if (++attempts > ctx_.pair_budget) return unknown("sandwich search budget exhausted");
            auto r = run(f.parts[0], base, lt.nodes[i].term, rt.nodes[j].term);
            if (r.status != Membership::found) continue;
            auto d = leaf("sandwich", p, q);
            d.note = f.left_laws + " / " + f.right_laws;
            d.left_chain = lt.chain(i);
            d.right_chain = rt.chain(j);
            d.children.push_back(std::move(r.derivation));
            return found(d);
          }
        }
      }
    }
    return unknown(std::string("no law chains within depth ") + std::to_string(ctx_.rewrite_depth) +
                   (lt.truncated || rt.truncated ? " (rewrite budget exhausted)" : ""));
  }

  const Lts& lts_;
  const UpToContext& ctx_;
  UpToEngine::Impl& impl_;
};

Base relation_base(const TermRelation& r) {
  return [&r](const Term& p, const Term& q) {
    if (r.count({p, q})) return found(leaf("base", p, q));
    return missing("pair not in the relation");
  };
}

}  // namespace

MemberResult UpToEngine::member(const TechniqueExpr& f, const TermRelation& r, const Term& p, const Term& q) {
  MemberSearch search(lts_, ctx_, *impl_);
  return search.run(f, relation_base(r), p, q);
}

// ---------------------------------------------------------------------------

namespace {

using Check = std::function<bool(const Derivation&, std::string*)>;

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}

class DerivationChecker {
 public:
  DerivationChecker(UpToEngine& engine, UpToEngine::Impl& impl) : engine_(engine), impl_(impl) {}

  bool run(const TechniqueExpr& f, const Check& base, const Derivation& d, std::string* why) {
    using K = TechniqueExpr::Kind;
    const auto& ctx = engine_.context();
    switch (f.kind) {
      case K::id: return base(d, why);
      case K::constant: {
        auto it = ctx.constants.find(f.name);
        if (d.rule != "const" || it == ctx.constants.end() || !it->second.count({d.left, d.right})) {
          return fail(why, "constant membership of " + d.left.str() + ", " + d.right.str() + " does not hold");
        }
        return true;
      }
      case K::unite: {
        if (d.rule != "union" || d.children.size() != 1) return fail(why, "malformed union step");
        auto idx = std::stoul(d.note);
        if (idx >= f.parts.size() || !same_ends(d, d.children[0])) return fail(why, "union branch mismatch");
        return run(f.parts[idx], base, d.children[0], why);
      }
      case K::compose: return compose(f, f.parts.size(), base, d, why);
      case K::ctx: return ctx_check(base, d, why);
      case K::sandwich_sem: {
        if (d.rule != "sandwich" || d.children.size() != 1) return fail(why, "malformed sandwich step");
        const auto& c = d.children[0];
        auto gl = impl_.gfp_of(engine_.lts(), f.left_kind);
        auto gr = impl_.gfp_of(engine_.lts(), f.right_kind);
        auto sp = engine_.lts().find(d.left), sq = engine_.lts().find(d.right);
        auto s0 = engine_.lts().find(c.left), t0 = engine_.lts().find(c.right);
        if (!gl || !gr || !sp || !sq || !s0 || !t0 || !gl->contains(*sp, *s0) || !gr->contains(*sq, *t0)) {
          return fail(why, "sandwich sides are not related by the greatest fixpoints");
        }
        return run(f.parts[0], base, c, why);
      }
      case K::sandwich_laws: {
        if (d.rule != "sandwich" || d.children.size() != 1) return fail(why, "malformed sandwich step");
        const auto& c = d.children[0];
        if (!chain_ok(d.left, c.left, d.left_chain, UpToEngine::Impl::laws(ctx, f.left_laws), why)) return false;
        if (!chain_ok(d.right, c.right, d.right_chain, UpToEngine::Impl::laws(ctx, f.right_laws), why)) return false;
        return run(f.parts[0], base, c, why);
      }
    }
    return fail(why, "?");
  }

 private:
  static bool same_ends(const Derivation& a, const Derivation& b) { return a.left == b.left && a.right == b.right; }

  bool compose(const TechniqueExpr& f, std::size_t n, const Check& base, const Derivation& d, std::string* why) {
    if (d.rule != "compose" || d.children.size() != 1 || !same_ends(d, d.children[0])) {
      return fail(why, "malformed composition step");
    }
    if (n == 1) return run(f.parts[0], base, d.children[0], why);
    Check inner = [&, n](const Derivation& x, std::string* w) { return compose(f, n - 1, base, x, w); };
    return run(f.parts[n - 1], inner, d.children[0], why);
  }

  bool ctx_check(const Check& base, const Derivation& d, std::string* why) {
    if (d.rule == "refl") return d.left == d.right || fail(why, "reflexivity step on different terms");
    if (d.rule == "cong") {
      const auto& p = d.left;
      const auto& q = d.right;
      if (p.is_var() || q.is_var() || p.name() != q.name() || p.args().size() != q.args().size() ||
          d.children.size() != p.args().size()) {
        return fail(why, "congruence step with mismatched operators");
      }
      for (std::size_t i = 0; i < p.args().size(); ++i) {
        const auto& c = d.children[i];
        if (c.left != p.args()[i] || c.right != q.args()[i]) return fail(why, "congruence child mismatch");
        if (!ctx_check(base, c, why)) return false;
      }
      return true;
    }
    return base(d, why);
  }

  bool chain_ok(const Term& start, const Term& end, const std::vector<RewriteStep>& chain, const LawSet& laws,
                std::string* why) {
    const auto& ctx = engine_.context();
    if (chain.size() > ctx.rewrite_depth) return fail(why, "law chain exceeds the rewrite depth");
    Term cur = start;
    for (const auto& s : chain) {
      if (s.from != cur) return fail(why, "law chain is not contiguous at " + cur.str());
      if (!replay_step(s, laws, ctx.rewrite_under)) return fail(why, "invalid law step " + s.from.str() + " -> " + s.to.str());
      cur = s.to;
    }
    return cur == end || fail(why, "law chain ends at " + cur.str() + " instead of " + end.str());
  }

  UpToEngine& engine_;
  UpToEngine::Impl& impl_;
};

}  // namespace

bool check_derivation(UpToEngine& engine, const TechniqueExpr& f, const TermRelation& r, const Derivation& d,
                      std::string* why) {
  Check base = [&r](const Derivation& x, std::string* w) {
    if (x.rule == "base" && r.count({x.left, x.right})) return true;
    return fail(w, "base pair " + x.left.str() + ", " + x.right.str() + " is not in the relation");
  };
  DerivationChecker checker(engine, engine.impl());
  return checker.run(f, base, d, why);
}

}  // namespace cool
