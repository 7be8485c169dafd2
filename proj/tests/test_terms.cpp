#include "doctest.h"

#include "cool/term.hpp"

using namespace cool;

namespace {

Signature ccs() {
  Signature sig;
  sig.add_label("a");
  sig.add_label("b");
  sig.add_operator("nil", 0);
  sig.add_operator("pre", 1, 1);
  sig.add_operator("par", 2);
  return sig;
}

}  // namespace

TEST_CASE("terms print back to their source") {
  auto sig = ccs();
  for (std::string text : {"nil", "pre[a](nil)", "par(pre[tau](x), pre[b](nil))", "par(x, y)"}) {
    CHECK(parse_term(text, sig).str() == text);
  }
  CHECK(parse_term("  par( nil ,pre[a]( nil ) )", sig).str() == "par(nil, pre[a](nil))");
}

TEST_CASE("undeclared identifiers are variables") {
  auto sig = ccs();
  auto t = parse_term("par(x, pre[a](y))", sig);
  CHECK_FALSE(t.closed());
  CHECK(vars_of(t) == std::set<std::string>{"x", "y"});
  CHECK(t.size() == 4);
}

TEST_CASE("parse errors carry their kind") {
  auto sig = ccs();
  auto kind_of = [&](const char* text) {
    try {
      parse_term(text, sig);
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("no error for " << text);
    return Error::Kind::syntax;
  };
  CHECK(kind_of("par(nil)") == Error::Kind::arity_mismatch);
  CHECK(kind_of("pre[c](nil)") == Error::Kind::unknown_label);
  CHECK(kind_of("seq(nil, nil)") == Error::Kind::unknown_operator);
  CHECK(kind_of("par(nil, nil") == Error::Kind::syntax);
  CHECK(kind_of("nil nil") == Error::Kind::syntax);
}

TEST_CASE("substitution and positional replacement") {
  auto sig = ccs();
  auto t = parse_term("par(x, pre[a](x))", sig);
  auto u = apply_substitution(t, {{"x", parse_term("nil", sig)}});
  CHECK(u.str() == "par(nil, pre[a](nil))");
  CHECK(u.closed());
  CHECK(replace_at(u, {1, 0}, parse_term("pre[b](nil)", sig)).str() == "par(nil, pre[a](pre[b](nil)))");
  CHECK(replace_at(u, {}, parse_term("nil", sig)).str() == "nil");
}

TEST_CASE("structural equality and ordering") {
  auto sig = ccs();
  auto a = parse_term("par(nil, pre[a](nil))", sig);
  auto b = parse_term("par(nil,pre[a](nil))", sig);
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  auto c = parse_term("par(pre[a](nil), nil)", sig);
  CHECK(a != c);
  CHECK(((a < c) != (c < a)));
}

TEST_CASE("opaque state names parse without a signature") {
  auto t = parse_term("s12", nullptr);
  CHECK_FALSE(t.is_var());
  CHECK(t.str() == "s12");
}
