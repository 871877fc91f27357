#include <algorithm>
#include <functional>
#include <map>

#include "lexer.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/logic.hpp"

namespace pnmc {

namespace {

Fo make(FoKind k, std::string x = {}, std::string y = {}, Fo lhs = nullptr, Fo rhs = nullptr) {
  return std::make_shared<const FoNode>(FoNode{k, std::move(x), std::move(y), std::move(lhs), std::move(rhs)});
}

}  // namespace

namespace fo {
Fo truth() { return make(FoKind::True); }
Fo falsity() { return make(FoKind::False); }
Fo edge(std::string x, std::string y) { return make(FoKind::Edge, std::move(x), std::move(y)); }
Fo star(std::string x, std::string y) { return make(FoKind::Star, std::move(x), std::move(y)); }
Fo plus(std::string x, std::string y) { return make(FoKind::Plus, std::move(x), std::move(y)); }
Fo init(std::string x) { return make(FoKind::Init, std::move(x)); }
Fo eq(std::string x, std::string y) { return make(FoKind::Eq, std::move(x), std::move(y)); }
Fo lambda(std::string x, std::string y) { return disj(edge(x, y), edge(y, x)); }
Fo neg(Fo f) { return make(FoKind::Not, {}, {}, std::move(f)); }
Fo conj(Fo a, Fo b) { return make(FoKind::And, {}, {}, std::move(a), std::move(b)); }
Fo disj(Fo a, Fo b) { return make(FoKind::Or, {}, {}, std::move(a), std::move(b)); }
Fo implies(Fo a, Fo b) { return make(FoKind::Implies, {}, {}, std::move(a), std::move(b)); }
Fo iff(Fo a, Fo b) { return conj(implies(a, b), implies(b, a)); }
Fo conj(std::vector<Fo> parts) {
  if (parts.empty()) return truth();
  Fo acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = conj(acc, parts[i]);
  return acc;
}
Fo disj(std::vector<Fo> parts) {
  if (parts.empty()) return falsity();
  Fo acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = disj(acc, parts[i]);
  return acc;
}
Fo forall(std::string v, Fo body) { return make(FoKind::Forall, std::move(v), {}, std::move(body)); }
Fo exists(std::string v, Fo body) { return make(FoKind::Exists, std::move(v), {}, std::move(body)); }
Fo forall(const std::vector<std::string>& vs, Fo body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(*it, body);
  return body;
}
Fo exists(const std::vector<std::string>& vs, Fo body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = exists(*it, body);
  return body;
}
}  // namespace fo

bool is_atom(FoKind k) {
  return k == FoKind::Edge || k == FoKind::Star || k == FoKind::Plus || k == FoKind::Init || k == FoKind::Eq;
}

bool is_quantifier(FoKind k) { return k == FoKind::Forall || k == FoKind::Exists; }

namespace {

bool reserved(const std::string& w) {
  return w == "forall" || w == "exists" || w == "true" || w == "false" || w == "init";
}

class FoParser {
 public:
  explicit FoParser(std::string_view text) : ts_(text) {}

  Fo run() {
    Fo f = formula();
    ts_.expect_end();
    return f;
  }

 private:
  detail::TokenStream ts_;

  Fo formula() {
    Fo a = implication();
    if (ts_.accept_sym("<=>")) a = fo::iff(a, implication());
    return a;
  }
  Fo implication() {
    Fo a = disjunction();
    if (ts_.accept_sym("=>")) return fo::implies(a, implication());
    return a;
  }
  Fo disjunction() {
    Fo a = conjunction();
    while (ts_.accept_sym("|")) a = fo::disj(a, conjunction());
    return a;
  }
  Fo conjunction() {
    Fo a = unary();
    while (ts_.accept_sym("&")) a = fo::conj(a, unary());
    return a;
  }
  std::string variable() {
    std::string v = ts_.expect_ident();
    if (reserved(v)) throw ParseError("keyword '" + v + "' used as variable", ts_.peek().line, ts_.peek().column);
    return v;
  }
  Fo unary() {
    if (ts_.accept_sym("!")) return fo::neg(unary());
    if (ts_.at_word("forall") || ts_.at_word("exists")) {
      bool universal = ts_.next().text == "forall";
      std::vector<std::string> vars{variable()};
      while (!ts_.at_sym(".")) {
        ts_.accept_sym(",");
        vars.push_back(variable());
      }
      ts_.expect_sym(".");
      Fo body = formula();
      return universal ? fo::forall(vars, body) : fo::exists(vars, body);
    }
    return primary();
  }
  Fo primary() {
    if (ts_.accept_sym("(")) {
      Fo f = formula();
      ts_.expect_sym(")");
      return f;
    }
    if (ts_.accept_word("true")) return fo::truth();
    if (ts_.accept_word("false")) return fo::falsity();
    if (ts_.accept_word("init")) {
      ts_.expect_sym("(");
      std::string v = variable();
      ts_.expect_sym(")");
      return fo::init(v);
    }
    if (ts_.peek().kind != detail::Tok::Ident) ts_.fail("expected formula");
    std::string x = variable();
    if (ts_.accept_sym("->")) return fo::edge(x, variable());
    if (ts_.accept_sym("->*")) return fo::star(x, variable());
    if (ts_.accept_sym("->+")) return fo::plus(x, variable());
    if (ts_.accept_sym("=")) return fo::eq(x, variable());
    if (ts_.accept_sym("!=")) return fo::neg(fo::eq(x, variable()));
    if (ts_.accept_sym("~")) return fo::lambda(x, variable());
    ts_.fail("expected '->', '->*', '->+', '=' or '~'");
  }
};

int precedence(FoKind k) {
  switch (k) {
    case FoKind::Implies: return 1;
    case FoKind::Or: return 2;
    case FoKind::And: return 3;
    case FoKind::Forall:
    case FoKind::Exists: return 0;
    default: return 4;
  }
}

void print(const Fo& f, std::string& out) {
  auto child = [&](const Fo& c, bool parens) {
    if (parens) out += '(';
    print(c, out);
    if (parens) out += ')';
  };
  switch (f->kind) {
    case FoKind::True: out += "true"; return;
    case FoKind::False: out += "false"; return;
    case FoKind::Edge: out += f->x + " -> " + f->y; return;
    case FoKind::Star: out += f->x + " ->* " + f->y; return;
    case FoKind::Plus: out += f->x + " ->+ " + f->y; return;
    case FoKind::Eq: out += f->x + " = " + f->y; return;
    case FoKind::Init: out += "init(" + f->x + ")"; return;
    case FoKind::Not:
      out += '!';
      child(f->lhs, precedence(f->lhs->kind) < 4);
      return;
    case FoKind::Forall:
    case FoKind::Exists:
      out += f->kind == FoKind::Forall ? "forall " : "exists ";
      out += f->x + " . ";
      print(f->lhs, out);
      return;
    case FoKind::And:
    case FoKind::Or:
    case FoKind::Implies: {
      int p = precedence(f->kind);
      const char* op = f->kind == FoKind::And ? " & " : f->kind == FoKind::Or ? " | " : " => ";
      int pl = precedence(f->lhs->kind), pr = precedence(f->rhs->kind);
      bool left_parens = pl < p || (pl == p && f->kind == FoKind::Implies);
      bool right_parens = pr < p || (pr == p && f->kind != FoKind::Implies);
      child(f->lhs, left_parens);
      out += op;
      child(f->rhs, right_parens);
      return;
    }
  }
}

using Scope = std::vector<std::string>;

void collect_free(const Fo& f, Scope& scope, std::set<std::string>& out) {
  auto use = [&](const std::string& v) {
    if (std::find(scope.begin(), scope.end(), v) == scope.end()) out.insert(v);
  };
  if (is_atom(f->kind)) {
    use(f->x);
    if (f->kind != FoKind::Init) use(f->y);
    return;
  }
  if (is_quantifier(f->kind)) {
    scope.push_back(f->x);
    collect_free(f->lhs, scope, out);
    scope.pop_back();
    return;
  }
  if (f->lhs) collect_free(f->lhs, scope, out);
  if (f->rhs) collect_free(f->rhs, scope, out);
}

void collect_names(const Fo& f, std::set<std::string>& out) {
  if (!f) return;
  if (!f->x.empty()) out.insert(f->x);
  if (!f->y.empty()) out.insert(f->y);
  collect_names(f->lhs, out);
  collect_names(f->rhs, out);
}

using Binding = std::vector<std::pair<std::string, std::string>>;

int lookup(const Binding& env, const std::string& v, bool left) {
  for (int i = static_cast<int>(env.size()) - 1; i >= 0; --i)
    if ((left ? env[i].first : env[i].second) == v) return i;
  return -1;
}

bool same_var(const Binding& env, const std::string& a, const std::string& b) {
  int ia = lookup(env, a, true), ib = lookup(env, b, false);
  if (ia != ib) return false;
  return ia >= 0 || a == b;
}

bool alpha_eq(const Fo& a, const Fo& b, Binding& env) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case FoKind::True:
    case FoKind::False: return true;
    case FoKind::Init: return same_var(env, a->x, b->x);
    case FoKind::Edge:
    case FoKind::Star:
    case FoKind::Plus:
    case FoKind::Eq: return same_var(env, a->x, b->x) && same_var(env, a->y, b->y);
    case FoKind::Forall:
    case FoKind::Exists: {
      env.emplace_back(a->x, b->x);
      bool r = alpha_eq(a->lhs, b->lhs, env);
      env.pop_back();
      return r;
    }
    case FoKind::Not: return alpha_eq(a->lhs, b->lhs, env);
    default: return alpha_eq(a->lhs, b->lhs, env) && alpha_eq(a->rhs, b->rhs, env);
  }
}

Fo rename_rec(const Fo& f, std::vector<std::pair<std::string, std::string>>& env, std::set<std::string>& used) {
  auto map = [&](const std::string& v) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == v) return it->second;
    return v;
  };
  switch (f->kind) {
    case FoKind::True:
    case FoKind::False: return f;
    case FoKind::Init: return fo::init(map(f->x));
    case FoKind::Edge: return fo::edge(map(f->x), map(f->y));
    case FoKind::Star: return fo::star(map(f->x), map(f->y));
    case FoKind::Plus: return fo::plus(map(f->x), map(f->y));
    case FoKind::Eq: return fo::eq(map(f->x), map(f->y));
    case FoKind::Forall:
    case FoKind::Exists: {
      bool shadows = std::any_of(env.begin(), env.end(), [&](const auto& e) { return e.first == f->x; });
      std::string name = f->x;
      if (shadows) {
        int k = 1;
        while (used.count(f->x + "_" + std::to_string(k))) ++k;
        name = f->x + "_" + std::to_string(k);
      }
      used.insert(name);
      env.emplace_back(f->x, name);
      Fo body = rename_rec(f->lhs, env, used);
      env.pop_back();
      return f->kind == FoKind::Forall ? fo::forall(name, body) : fo::exists(name, body);
    }
    case FoKind::Not: return fo::neg(rename_rec(f->lhs, env, used));
    case FoKind::And: return fo::conj(rename_rec(f->lhs, env, used), rename_rec(f->rhs, env, used));
    case FoKind::Or: return fo::disj(rename_rec(f->lhs, env, used), rename_rec(f->rhs, env, used));
    case FoKind::Implies: return fo::implies(rename_rec(f->lhs, env, used), rename_rec(f->rhs, env, used));
  }
  return f;
}

struct ClassifyState {
  std::set<std::string> names;
  std::set<Predicate> preds;
  bool existential = true;
  bool positive = true;
  bool forward = true;
};

void classify_rec(const Fo& f, bool positive, Scope& scope, ClassifyState& st) {
  auto position = [&](const std::string& v) {
    for (int i = static_cast<int>(scope.size()) - 1; i >= 0; --i)
      if (scope[i] == v) return i;
    return -1;
  };
  switch (f->kind) {
    case FoKind::True:
    case FoKind::False: return;
    case FoKind::Edge:
    case FoKind::Star:
    case FoKind::Plus: {
      st.preds.insert(f->kind == FoKind::Edge ? Predicate::Edge
                      : f->kind == FoKind::Star ? Predicate::Star
                                                : Predicate::Plus);
      if (!positive) st.positive = false;
      if (f->x != f->y && position(f->x) >= position(f->y)) st.forward = false;
      return;
    }
    case FoKind::Init:
    case FoKind::Eq:
      st.preds.insert(f->kind == FoKind::Init ? Predicate::Init : Predicate::Eq);
      if (!positive) st.positive = false;
      return;
    case FoKind::Not: classify_rec(f->lhs, !positive, scope, st); return;
    case FoKind::Implies:
      classify_rec(f->lhs, !positive, scope, st);
      classify_rec(f->rhs, positive, scope, st);
      return;
    case FoKind::And:
    case FoKind::Or:
      classify_rec(f->lhs, positive, scope, st);
      classify_rec(f->rhs, positive, scope, st);
      return;
    case FoKind::Forall:
    case FoKind::Exists: {
      st.names.insert(f->x);
      bool universal_effect = (f->kind == FoKind::Forall) == positive;
      if (universal_effect) st.existential = false;
      scope.push_back(f->x);
      classify_rec(f->lhs, positive, scope, st);
      scope.pop_back();
      return;
    }
  }
}

Fo relativize_rec(const Fo& f, const std::string& g, GuardPredicate pred) {
  auto guard = [&](const std::string& x) { return pred == GuardPredicate::Star ? fo::star(g, x) : fo::edge(g, x); };
  switch (f->kind) {
    case FoKind::Forall: return fo::forall(f->x, fo::implies(guard(f->x), relativize_rec(f->lhs, g, pred)));
    case FoKind::Exists: return fo::exists(f->x, fo::conj(guard(f->x), relativize_rec(f->lhs, g, pred)));
    case FoKind::Not: return fo::neg(relativize_rec(f->lhs, g, pred));
    case FoKind::And: return fo::conj(relativize_rec(f->lhs, g, pred), relativize_rec(f->rhs, g, pred));
    case FoKind::Or: return fo::disj(relativize_rec(f->lhs, g, pred), relativize_rec(f->rhs, g, pred));
    case FoKind::Implies: return fo::implies(relativize_rec(f->lhs, g, pred), relativize_rec(f->rhs, g, pred));
    default: return f;
  }
}

bool binds(const Fo& f, const std::string& v) {
  if (!f) return false;
  if (is_quantifier(f->kind) && f->x == v) return true;
  return binds(f->lhs, v) || binds(f->rhs, v);
}

}  // namespace

Fo parse_fo(std::string_view text) { return FoParser(text).run(); }

Fo parse_fo_sentence(std::string_view text) {
  Fo f = parse_fo(text);
  auto free = free_vars(f);
  if (!free.empty()) throw UnboundVariableError("unbound variable '" + *free.begin() + "'");
  return f;
}

std::string to_string(const Fo& f) {
  std::string out;
  print(f, out);
  return out;
}

std::set<std::string> free_vars(const Fo& f) {
  std::set<std::string> out;
  Scope scope;
  collect_free(f, scope, out);
  return out;
}

bool is_sentence(const Fo& f) { return free_vars(f).empty(); }

bool alpha_equal(const Fo& a, const Fo& b) {
  Binding env;
  return alpha_eq(a, b, env);
}

Fo alpha_rename(const Fo& f) {
  std::set<std::string> used;
  collect_names(f, used);
  std::vector<std::pair<std::string, std::string>> env;
  return rename_rec(f, env, used);
}

std::size_t size(const Fo& f) {
  if (!f) return 0;
  return 1 + size(f->lhs) + size(f->rhs);
}

const char* predicate_symbol(Predicate p) {
  switch (p) {
    case Predicate::Edge: return "->";
    case Predicate::Star: return "->*";
    case Predicate::Plus: return "->+";
    case Predicate::Init: return "init";
    case Predicate::Eq: return "=";
  }
  return "?";
}

FragmentReport classify(const Fo& f) {
  ClassifyState st;
  Scope scope;
  classify_rec(f, true, scope, st);
  FragmentReport r;
  r.variable_count = st.names.size();
  r.predicates_used = st.preds;
  r.is_existential = st.existential;
  r.is_positive = st.positive;
  r.is_forward = st.forward;
  return r;
}

Fo relativize(const Fo& f, const std::string& guard_var, GuardPredicate pred) {
  if (binds(f, guard_var)) throw CaptureError("guard variable '" + guard_var + "' is bound in the formula");
  return relativize_rec(f, guard_var, pred);
}

}  // namespace pnmc
