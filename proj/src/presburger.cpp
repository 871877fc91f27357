#include "pnmc/presburger.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>

#include "lexer.hpp"
#include "pnmc/errors.hpp"

namespace pnmc {

namespace {

BigInt abs_big(const BigInt& a) { return a < 0 ? BigInt(-a) : a; }

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  BigInt r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

BigInt ceil_div(const BigInt& a, const BigInt& b) { return -floor_div(-a, b); }

BigInt mod_floor(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  if (r < 0) r += m;
  return r;
}

BigInt gcd_big(const BigInt& a, const BigInt& b) { return boost::multiprecision::gcd(abs_big(a), abs_big(b)); }

BigInt lcm_big(const BigInt& a, const BigInt& b) {
  if (a == 0 || b == 0) return 0;
  return abs_big(a) / gcd_big(a, b) * abs_big(b);
}

std::size_t hash_big(const BigInt& x) {
  static const BigInt mask = BigInt(std::numeric_limits<std::uint64_t>::max());
  auto lo = static_cast<std::uint64_t>(BigInt(abs_big(x) & mask));
  return std::hash<std::uint64_t>{}(lo) ^ (x < 0 ? 0x5bd1e995ULL : 0);
}

void mix(std::size_t& h, std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); }

std::size_t hash_term(const LinTerm& t) {
  std::size_t h = hash_big(t.constant);
  for (const auto& [v, c] : t.coeffs) {
    mix(h, std::hash<std::string>{}(v));
    mix(h, hash_big(c));
  }
  return h;
}

Pres node(PresKind k, LinTerm term = {}, BigInt modulus = 0, std::string var = {}, std::vector<Pres> kids = {}) {
  auto n = std::make_shared<PresNode>();
  n->kind = k;
  n->term = std::move(term);
  n->modulus = std::move(modulus);
  n->var = std::move(var);
  n->kids = std::move(kids);
  std::size_t h = static_cast<std::size_t>(k) * 0x100000001b3ULL;
  mix(h, hash_term(n->term));
  mix(h, hash_big(n->modulus));
  mix(h, std::hash<std::string>{}(n->var));
  for (const auto& c : n->kids) mix(h, c->hash);
  n->hash = h;
  return n;
}

const Pres& true_node() {
  static const Pres t = node(PresKind::True);
  return t;
}

const Pres& false_node() {
  static const Pres f = node(PresKind::False);
  return f;
}

bool is_atom(const Pres& f) { return f->kind == PresKind::Le || f->kind == PresKind::Eq || f->kind == PresKind::Div; }

std::string fresh_name(const std::string& stem) {
  static std::atomic<std::uint64_t> counter{0};
  return "_" + stem + std::to_string(counter.fetch_add(1));
}

// Raw atoms skip gcd normalization; used while a variable is being eliminated.
Pres raw_atom(PresKind k, LinTerm t, BigInt modulus = 0) { return node(k, std::move(t), std::move(modulus)); }

}  // namespace

// ---------------------------------------------------------------- LinTerm

LinTerm LinTerm::var(const std::string& v, const BigInt& c) {
  LinTerm t;
  if (c != 0) t.coeffs[v] = c;
  return t;
}

LinTerm LinTerm::num(const BigInt& c) {
  LinTerm t;
  t.constant = c;
  return t;
}

BigInt LinTerm::coeff(const std::string& v) const {
  auto it = coeffs.find(v);
  return it == coeffs.end() ? BigInt(0) : it->second;
}

LinTerm& LinTerm::add(const LinTerm& other, const BigInt& scale) {
  for (const auto& [v, c] : other.coeffs) {
    auto& slot = coeffs[v];
    slot += c * scale;
    if (slot == 0) coeffs.erase(v);
  }
  constant += other.constant * scale;
  return *this;
}

LinTerm LinTerm::scaled(const BigInt& k) const {
  LinTerm t;
  if (k == 0) return t;
  for (const auto& [v, c] : coeffs) t.coeffs[v] = c * k;
  t.constant = constant * k;
  return t;
}

LinTerm LinTerm::substituted(const std::string& v, const LinTerm& repl) const {
  auto it = coeffs.find(v);
  if (it == coeffs.end()) return *this;
  BigInt a = it->second;
  LinTerm t = *this;
  t.coeffs.erase(v);
  t.add(repl, a);
  return t;
}

// ---------------------------------------------------------------- constructors

namespace pa {

Pres truth() { return true_node(); }
Pres falsity() { return false_node(); }
Pres boolean(bool b) { return b ? true_node() : false_node(); }

Pres le(LinTerm t) {
  if (t.is_constant()) return boolean(t.constant <= 0);
  BigInt g = 0;
  for (const auto& [v, c] : t.coeffs) g = gcd_big(g, c);
  if (g > 1) {
    for (auto& [v, c] : t.coeffs) c /= g;
    t.constant = ceil_div(t.constant, g);
  }
  return node(PresKind::Le, std::move(t));
}

Pres eq(LinTerm t) {
  if (t.is_constant()) return boolean(t.constant == 0);
  BigInt g = 0;
  for (const auto& [v, c] : t.coeffs) g = gcd_big(g, c);
  if (g > 1) {
    if (t.constant % g != 0) return falsity();
    for (auto& [v, c] : t.coeffs) c /= g;
    t.constant /= g;
  }
  if (t.coeffs.begin()->second < 0) t = t.scaled(-1);
  return node(PresKind::Eq, std::move(t));
}

Pres divides(const BigInt& c_in, LinTerm t) {
  BigInt c = abs_big(c_in);
  if (c == 0) return eq(std::move(t));
  if (c == 1) return truth();
  for (auto it = t.coeffs.begin(); it != t.coeffs.end();) {
    it->second = mod_floor(it->second, c);
    if (it->second == 0) it = t.coeffs.erase(it);
    else ++it;
  }
  t.constant = mod_floor(t.constant, c);
  if (t.is_constant()) return boolean(t.constant == 0);
  BigInt g = gcd_big(c, t.constant);
  for (const auto& [v, k] : t.coeffs) g = gcd_big(g, k);
  if (g > 1) {
    c /= g;
    for (auto& [v, k] : t.coeffs) k /= g;
    t.constant /= g;
  }
  if (c == 1) return truth();
  return node(PresKind::Div, std::move(t), c);
}

Pres le(const LinTerm& a, const LinTerm& b) { return le(a - b); }
Pres lt(const LinTerm& a, const LinTerm& b) { return le(a - b + LinTerm::num(1)); }
Pres ge(const LinTerm& a, const LinTerm& b) { return le(b - a); }
Pres gt(const LinTerm& a, const LinTerm& b) { return le(b - a + LinTerm::num(1)); }
Pres eq(const LinTerm& a, const LinTerm& b) { return eq(a - b); }

Pres neg(const Pres& f) {
  switch (f->kind) {
    case PresKind::True: return falsity();
    case PresKind::False: return truth();
    case PresKind::Le: return le(LinTerm::num(1) - f->term);
    case PresKind::Not: return f->kids[0];
    default: return node(PresKind::Not, {}, 0, {}, {f});
  }
}

namespace {
Pres combine(PresKind k, std::vector<Pres> parts) {
  const Pres& unit = k == PresKind::And ? true_node() : false_node();
  const Pres& zero = k == PresKind::And ? false_node() : true_node();
  std::vector<Pres> flat;
  flat.reserve(parts.size());
  for (auto& p : parts) {
    if (p->kind == unit->kind) continue;
    if (p->kind == zero->kind) return zero;
    if (p->kind == k) flat.insert(flat.end(), p->kids.begin(), p->kids.end());
    else flat.push_back(std::move(p));
  }
  std::sort(flat.begin(), flat.end(), [](const Pres& a, const Pres& b) { return a->hash < b->hash; });
  std::vector<Pres> out;
  out.reserve(flat.size());
  for (auto& p : flat) {
    bool dup = false;
    for (auto it = out.rbegin(); it != out.rend() && (*it)->hash == p->hash; ++it)
      if (structurally_equal(*it, p)) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(std::move(p));
  }
  if (out.empty()) return unit;
  if (out.size() == 1) return out[0];
  return node(k, {}, 0, {}, std::move(out));
}
}  // namespace

Pres conj(std::vector<Pres> parts) { return combine(PresKind::And, std::move(parts)); }
Pres disj(std::vector<Pres> parts) { return combine(PresKind::Or, std::move(parts)); }
Pres conj(const Pres& a, const Pres& b) { return conj(std::vector<Pres>{a, b}); }
Pres disj(const Pres& a, const Pres& b) { return disj(std::vector<Pres>{a, b}); }
Pres implies(const Pres& a, const Pres& b) { return disj(neg(a), b); }

Pres exists(const std::string& v, const Pres& body) {
  if (!free_vars(body).count(v)) return body;
  return node(PresKind::Exists, {}, 0, v, {body});
}

Pres forall(const std::string& v, const Pres& body) {
  if (!free_vars(body).count(v)) return body;
  return node(PresKind::Forall, {}, 0, v, {body});
}

Pres nat(const std::string& v) { return ge(LinTerm::var(v), LinTerm::num(0)); }

Pres naturals(std::span<const std::string> vs) {
  std::vector<Pres> parts;
  for (const auto& v : vs) parts.push_back(nat(v));
  return conj(std::move(parts));
}

Pres exists_nat(const std::string& v, const Pres& body) { return node(PresKind::Exists, {}, 0, v, {conj(nat(v), body)}); }
Pres forall_nat(const std::string& v, const Pres& body) { return node(PresKind::Forall, {}, 0, v, {implies(nat(v), body)}); }

Pres exists_nat(std::span<const std::string> vs, const Pres& body) {
  Pres f = conj(naturals(vs), body);
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = node(PresKind::Exists, {}, 0, *it, {f});
  return f;
}

Pres forall_nat(std::span<const std::string> vs, const Pres& body) {
  Pres f = implies(naturals(vs), body);
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) f = node(PresKind::Forall, {}, 0, *it, {f});
  return f;
}

}  // namespace pa

// ---------------------------------------------------------------- structure

namespace {

void collect_free(const Pres& f, std::vector<std::string>& bound, std::set<std::string>& out) {
  if (is_atom(f)) {
    for (const auto& [v, c] : f->term.coeffs)
      if (std::find(bound.begin(), bound.end(), v) == bound.end()) out.insert(v);
    return;
  }
  if (f->kind == PresKind::Exists || f->kind == PresKind::Forall) {
    bound.push_back(f->var);
    collect_free(f->kids[0], bound, out);
    bound.pop_back();
    return;
  }
  for (const auto& k : f->kids) collect_free(k, bound, out);
}

bool mentions(const Pres& f, const std::string& x) {
  if (is_atom(f)) return f->term.coeffs.count(x) > 0;
  if ((f->kind == PresKind::Exists || f->kind == PresKind::Forall) && f->var == x) return false;
  for (const auto& k : f->kids)
    if (mentions(k, x)) return true;
  return false;
}

Pres rebuild_atom(PresKind k, LinTerm t, const BigInt& modulus) {
  switch (k) {
    case PresKind::Le: return pa::le(std::move(t));
    case PresKind::Eq: return pa::eq(std::move(t));
    default: return pa::divides(modulus, std::move(t));
  }
}

Pres rebuild(const Pres& f, std::vector<Pres> kids) {
  switch (f->kind) {
    case PresKind::Not: return pa::neg(kids[0]);
    case PresKind::And: return pa::conj(std::move(kids));
    case PresKind::Or: return pa::disj(std::move(kids));
    case PresKind::Exists: return node(PresKind::Exists, {}, 0, f->var, std::move(kids));
    case PresKind::Forall: return node(PresKind::Forall, {}, 0, f->var, std::move(kids));
    default: return f;
  }
}

Pres subst_rec(const Pres& f, const std::map<std::string, LinTerm>& repl) {
  if (repl.empty()) return f;
  if (is_atom(f)) {
    bool touched = false;
    for (const auto& [v, c] : f->term.coeffs)
      if (repl.count(v)) {
        touched = true;
        break;
      }
    if (!touched) return f;
    LinTerm t;
    t.constant = f->term.constant;
    for (const auto& [v, c] : f->term.coeffs) {
      auto it = repl.find(v);
      if (it == repl.end()) t.add(LinTerm::var(v, c));
      else t.add(it->second, c);
    }
    return rebuild_atom(f->kind, std::move(t), f->modulus);
  }
  if (f->kind == PresKind::True || f->kind == PresKind::False) return f;
  if (f->kind == PresKind::Exists || f->kind == PresKind::Forall) {
    auto inner = repl;
    inner.erase(f->var);
    bool capture = false;
    for (const auto& [v, t] : inner)
      if (t.coeffs.count(f->var)) capture = true;
    std::string var = f->var;
    Pres body = f->kids[0];
    if (capture) {
      var = fresh_name("b");
      body = subst_rec(body, {{f->var, LinTerm::var(var)}});
    }
    return node(f->kind, {}, 0, var, {subst_rec(body, inner)});
  }
  std::vector<Pres> kids;
  kids.reserve(f->kids.size());
  for (const auto& k : f->kids) kids.push_back(subst_rec(k, repl));
  return rebuild(f, std::move(kids));
}

Pres negate_nnf(const Pres& f);

Pres nnf_rec(const Pres& f) {
  switch (f->kind) {
    case PresKind::Not: return negate_nnf(f->kids[0]);
    case PresKind::And:
    case PresKind::Or: {
      std::vector<Pres> kids;
      for (const auto& k : f->kids) kids.push_back(nnf_rec(k));
      return rebuild(f, std::move(kids));
    }
    case PresKind::Exists:
    case PresKind::Forall: return node(f->kind, {}, 0, f->var, {nnf_rec(f->kids[0])});
    default: return f;
  }
}

Pres negate_nnf(const Pres& f) {
  switch (f->kind) {
    case PresKind::True: return pa::falsity();
    case PresKind::False: return pa::truth();
    case PresKind::Le: return pa::le(LinTerm::num(1) - f->term);
    case PresKind::Eq:
    case PresKind::Div: return node(PresKind::Not, {}, 0, {}, {f});
    case PresKind::Not: return nnf_rec(f->kids[0]);
    case PresKind::And:
    case PresKind::Or: {
      std::vector<Pres> kids;
      for (const auto& k : f->kids) kids.push_back(negate_nnf(k));
      return f->kind == PresKind::And ? pa::disj(std::move(kids)) : pa::conj(std::move(kids));
    }
    case PresKind::Exists: return node(PresKind::Forall, {}, 0, f->var, {negate_nnf(f->kids[0])});
    case PresKind::Forall: return node(PresKind::Exists, {}, 0, f->var, {negate_nnf(f->kids[0])});
  }
  return f;
}

}  // namespace

std::set<std::string> free_vars(const Pres& f) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collect_free(f, bound, out);
  return out;
}

bool is_quantifier_free(const Pres& f) {
  if (f->kind == PresKind::Exists || f->kind == PresKind::Forall) return false;
  return std::all_of(f->kids.begin(), f->kids.end(), [](const Pres& k) { return is_quantifier_free(k); });
}

std::size_t size(const Pres& f) {
  std::size_t n = 1;
  for (const auto& k : f->kids) n += size(k);
  return n;
}

bool structurally_equal(const Pres& a, const Pres& b) {
  if (a == b) return true;
  if (a->hash != b->hash || a->kind != b->kind || a->kids.size() != b->kids.size()) return false;
  if (a->var != b->var || a->modulus != b->modulus || !(a->term == b->term)) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!structurally_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

Pres substitute(const Pres& f, const std::map<std::string, LinTerm>& repl) { return subst_rec(f, repl); }

Pres rename(const Pres& f, std::span<const std::string> from, std::span<const std::string> to) {
  if (from.size() != to.size()) throw DimensionError("rename: vector lengths differ");
  std::map<std::string, LinTerm> repl;
  for (std::size_t i = 0; i < from.size(); ++i)
    if (from[i] != to[i]) repl[from[i]] = LinTerm::var(to[i]);
  return subst_rec(f, repl);
}

Pres nnf(const Pres& f) { return nnf_rec(f); }

// ---------------------------------------------------------------- text

namespace {

void term_text(const LinTerm& t, std::string& out) {
  bool first = true;
  for (const auto& [v, c] : t.coeffs) {
    BigInt a = c;
    if (first) {
      if (a < 0) out += "-";
    } else {
      out += a < 0 ? " - " : " + ";
    }
    a = abs_big(a);
    if (a != 1) out += a.str() + "*";
    out += v;
    first = false;
  }
  if (first) out += t.constant.str();
}

int pres_prec(PresKind k) {
  switch (k) {
    case PresKind::Or: return 2;
    case PresKind::And: return 3;
    case PresKind::Exists:
    case PresKind::Forall: return 0;
    default: return 4;
  }
}

void pres_print(const Pres& f, std::string& out) {
  auto child = [&](const Pres& c, bool parens) {
    if (parens) out += '(';
    pres_print(c, out);
    if (parens) out += ')';
  };
  LinTerm vars_only;
  if (is_atom(f)) {
    vars_only = f->term;
    vars_only.constant = 0;
  }
  switch (f->kind) {
    case PresKind::True: out += "true"; return;
    case PresKind::False: out += "false"; return;
    case PresKind::Le:
      term_text(vars_only, out);
      out += " <= " + BigInt(-f->term.constant).str();
      return;
    case PresKind::Eq:
      term_text(vars_only, out);
      out += " = " + BigInt(-f->term.constant).str();
      return;
    case PresKind::Div:
      term_text(vars_only, out);
      out += " mod " + f->modulus.str() + " = " + mod_floor(-f->term.constant, f->modulus).str();
      return;
    case PresKind::Not:
      if (f->kids[0]->kind == PresKind::Eq) {
        LinTerm v = f->kids[0]->term;
        v.constant = 0;
        term_text(v, out);
        out += " != " + BigInt(-f->kids[0]->term.constant).str();
        return;
      }
      out += '!';
      child(f->kids[0], true);
      return;
    case PresKind::And:
    case PresKind::Or: {
      int p = pres_prec(f->kind);
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out += f->kind == PresKind::And ? " & " : " | ";
        child(f->kids[i], pres_prec(f->kids[i]->kind) <= p);
      }
      return;
    }
    case PresKind::Exists:
    case PresKind::Forall:
      out += f->kind == PresKind::Exists ? "exists " : "forall ";
      out += f->var + " . ";
      pres_print(f->kids[0], out);
      return;
  }
}

class PresParser {
 public:
  explicit PresParser(std::string_view text) : ts_(text) {}

  Pres run() {
    Pres f = formula();
    ts_.expect_end();
    return f;
  }

 private:
  detail::TokenStream ts_;

  static bool reserved(const std::string& w) {
    return w == "exists" || w == "forall" || w == "true" || w == "false" || w == "mod";
  }

  Pres formula() {
    Pres a = disjunction();
    if (ts_.accept_sym("=>")) return pa::implies(a, formula());
    if (ts_.accept_sym("<=>")) {
      Pres b = formula();
      return pa::conj(pa::implies(a, b), pa::implies(b, a));
    }
    return a;
  }
  Pres disjunction() {
    std::vector<Pres> parts{conjunction()};
    while (ts_.accept_sym("|")) parts.push_back(conjunction());
    return pa::disj(std::move(parts));
  }
  Pres conjunction() {
    std::vector<Pres> parts{unary()};
    while (ts_.accept_sym("&")) parts.push_back(unary());
    return pa::conj(std::move(parts));
  }
  Pres unary() {
    if (ts_.accept_sym("!")) return pa::neg(unary());
    if (ts_.at_word("exists") || ts_.at_word("forall")) {
      bool ex = ts_.next().text == "exists";
      std::vector<std::string> vars;
      do {
        ts_.accept_sym(",");
        std::string v = ts_.expect_ident();
        if (reserved(v)) ts_.fail("keyword used as variable");
        vars.push_back(v);
      } while (!ts_.at_sym("."));
      ts_.expect_sym(".");
      Pres body = formula();
      for (auto it = vars.rbegin(); it != vars.rend(); ++it)
        body = node(ex ? PresKind::Exists : PresKind::Forall, {}, 0, *it, {body});
      return body;
    }
    if (ts_.accept_sym("(")) {
      Pres f = formula();
      ts_.expect_sym(")");
      return f;
    }
    if (ts_.accept_word("true")) return pa::truth();
    if (ts_.accept_word("false")) return pa::falsity();
    return comparison();
  }
  Pres comparison() {
    LinTerm lhs = term();
    if (ts_.accept_word("mod")) {
      if (ts_.peek().kind != detail::Tok::Number) ts_.fail("expected modulus");
      BigInt c(ts_.next().text);
      if (c < 2) ts_.fail("modulus must be at least 2");
      ts_.expect_sym("=");
      LinTerm k = term();
      return pa::divides(c, lhs - k);
    }
    std::vector<Pres> parts;
    bool any = false;
    while (true) {
      std::string op;
      for (const char* s : {"<=", ">=", "<", ">", "=", "!="})
        if (ts_.at_sym(s)) op = s;
      if (op.empty()) break;
      ts_.next();
      LinTerm rhs = term();
      if (op == "<=") parts.push_back(pa::le(lhs, rhs));
      else if (op == ">=") parts.push_back(pa::ge(lhs, rhs));
      else if (op == "<") parts.push_back(pa::lt(lhs, rhs));
      else if (op == ">") parts.push_back(pa::gt(lhs, rhs));
      else if (op == "=") parts.push_back(pa::eq(lhs, rhs));
      else parts.push_back(pa::neg(pa::eq(lhs, rhs)));
      lhs = rhs;
      any = true;
    }
    if (!any) ts_.fail("expected comparison");
    return pa::conj(std::move(parts));
  }
  LinTerm term() {
    LinTerm t;
    int sign = 1;
    if (ts_.accept_sym("-")) sign = -1;
    else ts_.accept_sym("+");
    while (true) {
      BigInt coeff = sign;
      std::optional<std::string> var;
      if (ts_.peek().kind == detail::Tok::Number) {
        coeff *= BigInt(ts_.next().text);
        if (ts_.accept_sym("*")) var = ts_.expect_ident();
        else if (ts_.peek().kind == detail::Tok::Ident && !reserved(ts_.peek().text)) var = ts_.next().text;
      } else if (ts_.peek().kind == detail::Tok::Ident && !reserved(ts_.peek().text)) {
        var = ts_.next().text;
        if (ts_.accept_sym("*")) {
          if (ts_.peek().kind != detail::Tok::Number) ts_.fail("expected number");
          coeff *= BigInt(ts_.next().text);
        }
      } else {
        ts_.fail("expected term");
      }
      if (var) t.add(LinTerm::var(*var, coeff));
      else t.constant += coeff;
      if (ts_.accept_sym("+")) sign = 1;
      else if (ts_.accept_sym("-")) sign = -1;
      else break;
    }
    return t;
  }
};

}  // namespace

std::string to_string(const Pres& f) {
  std::string out;
  pres_print(f, out);
  return out;
}

Pres parse_presburger(std::string_view text) { return PresParser(text).run(); }

// ---------------------------------------------------------------- quantifier elimination

namespace {

class Eliminator {
 public:
  explicit Eliminator(const QeOptions& opts) : opts_(opts) {}

  Pres run(const Pres& f) {
    switch (f->kind) {
      case PresKind::Not: return negate_nnf(run(f->kids[0]));
      case PresKind::And:
      case PresKind::Or: {
        std::vector<Pres> kids;
        for (const auto& k : f->kids) kids.push_back(run(k));
        return checked(f->kind == PresKind::And ? pa::conj(std::move(kids)) : pa::disj(std::move(kids)));
      }
      case PresKind::Exists: return checked(exists_elim(f->var, run(f->kids[0])));
      case PresKind::Forall: return checked(negate_nnf(exists_elim(f->var, negate_nnf(run(f->kids[0])))));
      default: return f;
    }
  }

 private:
  QeOptions opts_;

  Pres checked(Pres f) const {
    if (size(f) > opts_.budget) throw ResourceExceeded("Presburger formula exceeds the size budget");
    return f;
  }

  static bool has_equality_on(const Pres& d, const std::string& x) {
    if (d->kind == PresKind::Eq) return d->term.coeffs.count(x) > 0;
    if (d->kind == PresKind::And)
      for (const auto& k : d->kids)
        if (k->kind == PresKind::Eq && k->term.coeffs.count(x)) return true;
    return false;
  }

  Pres exists_elim(const std::string& x, const Pres& input) {
    Pres phi = nnf(input);
    if (!mentions(phi, x)) return phi;
    if (phi->kind == PresKind::Or) {
      std::vector<Pres> parts;
      for (const auto& d : phi->kids) parts.push_back(checked(exists_elim(x, d)));
      return pa::disj(std::move(parts));
    }
    if (phi->kind == PresKind::And) {
      std::vector<Pres> with, without;
      for (const auto& k : phi->kids) (mentions(k, x) ? with : without).push_back(k);
      for (std::size_t i = 0; i < with.size(); ++i) {
        const auto& k = with[i];
        if (k->kind != PresKind::Or) continue;
        bool all = std::all_of(k->kids.begin(), k->kids.end(), [&](const Pres& d) { return has_equality_on(d, x); });
        if (!all) continue;
        std::vector<Pres> rest;
        for (std::size_t j = 0; j < with.size(); ++j)
          if (j != i) rest.push_back(with[j]);
        std::vector<Pres> parts;
        for (const auto& d : k->kids) {
          std::vector<Pres> branch = rest;
          branch.push_back(d);
          parts.push_back(checked(exists_elim(x, pa::conj(std::move(branch)))));
        }
        without.push_back(pa::disj(std::move(parts)));
        return pa::conj(std::move(without));
      }
      without.push_back(cooper(x, pa::conj(std::move(with))));
      return pa::conj(std::move(without));
    }
    return cooper(x, phi);
  }

  // Applies fn to every atom mentioning x. fn receives the atom and whether
  // it sits under a negation.
  static Pres map_atoms(const Pres& f, const std::string& x, const std::function<Pres(const Pres&, bool)>& fn) {
    if (is_atom(f)) return f->term.coeffs.count(x) ? fn(f, false) : f;
    switch (f->kind) {
      case PresKind::Not: {
        const Pres& a = f->kids[0];
        if (is_atom(a)) return a->term.coeffs.count(x) ? fn(a, true) : f;
        return pa::neg(map_atoms(a, x, fn));
      }
      case PresKind::And:
      case PresKind::Or: {
        std::vector<Pres> kids;
        kids.reserve(f->kids.size());
        for (const auto& k : f->kids) kids.push_back(map_atoms(k, x, fn));
        return f->kind == PresKind::And ? pa::conj(std::move(kids)) : pa::disj(std::move(kids));
      }
      default: return f;
    }
  }

  static void visit_atoms(const Pres& f, const std::string& x, const std::function<void(const Pres&, bool)>& fn) {
    if (is_atom(f)) {
      if (f->term.coeffs.count(x)) fn(f, false);
      return;
    }
    if (f->kind == PresKind::Not && is_atom(f->kids[0])) {
      if (f->kids[0]->term.coeffs.count(x)) fn(f->kids[0], true);
      return;
    }
    for (const auto& k : f->kids) visit_atoms(k, x, fn);
  }

  static Pres wrap(const Pres& atom, bool negated) { return negated ? node(PresKind::Not, {}, 0, {}, {atom}) : atom; }

  static Pres substitute_var(const Pres& f, const std::string& x, const LinTerm& t) {
    return map_atoms(f, x, [&](const Pres& a, bool negated) {
      Pres r = rebuild_atom(a->kind, a->term.substituted(x, t), a->modulus);
      return negated ? negate_nnf(r) : r;
    });
  }

  Pres cooper(const std::string& x, const Pres& phi) {
    // Scale every atom so that x has coefficient +-l, then read l*x as x.
    BigInt l = 1;
    visit_atoms(phi, x, [&](const Pres& a, bool) { l = lcm_big(l, a->term.coeff(x)); });
    Pres scaled = map_atoms(phi, x, [&](const Pres& a, bool negated) {
      BigInt c = a->term.coeff(x);
      BigInt m = l / abs_big(c);
      LinTerm t = a->term.scaled(m);
      t.coeffs[x] = c > 0 ? 1 : -1;
      BigInt modulus = a->kind == PresKind::Div ? BigInt(a->modulus * m) : BigInt(0);
      return wrap(raw_atom(a->kind, std::move(t), modulus), negated);
    });
    if (l > 1) scaled = pa::conj(scaled, raw_atom(PresKind::Div, LinTerm::var(x), l));

    // A unit equality fixes x.
    std::vector<Pres> top = scaled->kind == PresKind::And ? scaled->kids : std::vector<Pres>{scaled};
    for (const auto& k : top) {
      if (k->kind != PresKind::Eq || !k->term.coeffs.count(x)) continue;
      LinTerm rest = k->term;
      BigInt c = rest.coeff(x);
      rest.coeffs.erase(x);
      LinTerm value = c > 0 ? rest.scaled(-1) : rest;
      return checked(substitute_var(scaled, x, value));
    }

    std::vector<LinTerm> lower, upper;
    BigInt delta = 1;
    auto push_unique = [](std::vector<LinTerm>& v, LinTerm t) {
      if (std::find(v.begin(), v.end(), t) == v.end()) v.push_back(std::move(t));
    };
    visit_atoms(scaled, x, [&](const Pres& a, bool negated) {
      LinTerm rest = a->term;
      BigInt c = rest.coeff(x);
      rest.coeffs.erase(x);
      switch (a->kind) {
        case PresKind::Le:
          if (c > 0) push_unique(upper, LinTerm::num(1) - rest);  // x <= -rest
          else push_unique(lower, rest - LinTerm::num(1));         // x >= rest
          break;
        case PresKind::Eq: {
          LinTerm r = c > 0 ? rest : rest.scaled(-1);  // x + r = 0
          if (negated) {
            push_unique(lower, r.scaled(-1));
            push_unique(upper, r.scaled(-1));
          } else {
            push_unique(lower, r.scaled(-1) - LinTerm::num(1));
            push_unique(upper, LinTerm::num(1) - r);
          }
          break;
        }
        case PresKind::Div: delta = lcm_big(delta, a->modulus); break;
        default: break;
      }
    });

    bool use_lower = lower.size() <= upper.size();
    Pres at_infinity = map_atoms(scaled, x, [&](const Pres& a, bool negated) -> Pres {
      BigInt c = a->term.coeff(x);
      switch (a->kind) {
        case PresKind::Le: return pa::boolean(use_lower ? c > 0 : c < 0);
        case PresKind::Eq: return pa::boolean(negated);
        default: return wrap(a, negated);
      }
    });
    const auto& bounds = use_lower ? lower : upper;
    std::vector<Pres> parts;
    std::size_t total = 0;
    for (BigInt j = 1; j <= delta; ++j) {
      BigInt shift = use_lower ? j : BigInt(-j);
      Pres p = substitute_var(at_infinity, x, LinTerm::num(shift));
      total += size(p);
      parts.push_back(std::move(p));
      for (const auto& b : bounds) {
        Pres q = substitute_var(scaled, x, b + LinTerm::num(shift));
        if (q->kind == PresKind::True) return q;
        total += size(q);
        if (total > opts_.budget) throw ResourceExceeded("Presburger formula exceeds the size budget");
        parts.push_back(std::move(q));
      }
    }
    return checked(pa::disj(std::move(parts)));
  }
};

}  // namespace

Pres eliminate(const Pres& f, const QeOptions& opts) { return Eliminator(opts).run(f); }

bool decide(const Pres& f, const QeOptions& opts) {
  auto free = free_vars(f);
  if (!free.empty()) throw UnboundVariableError("Presburger sentence has free variable '" + *free.begin() + "'");
  Pres r = eliminate(f, opts);
  if (r->kind == PresKind::True) return true;
  if (r->kind == PresKind::False) return false;
  throw Error("quantifier elimination left a non-ground formula: " + to_string(r));
}

bool evaluate(const Pres& f, const std::map<std::string, BigInt>& env, const QeOptions& opts) {
  std::map<std::string, LinTerm> repl;
  for (const auto& [v, val] : env) repl[v] = LinTerm::num(val);
  return decide(substitute(f, repl), opts);
}

// ---------------------------------------------------------------- point evaluation

struct PointEvaluator::Atom {
  PresKind kind;
  std::vector<std::pair<int, std::int64_t>> small;
  std::int64_t small_constant = 0;
  std::int64_t small_modulus = 0;
  bool fits = true;
  std::vector<std::pair<int, BigInt>> big;
  BigInt constant;
  BigInt modulus;
};

struct PointEvaluator::Node {
  PresKind kind;
  int atom = -1;
  std::vector<int> kids;
  std::shared_ptr<Atom> data;
};

PointEvaluator::PointEvaluator(const Pres& f, std::vector<std::string> vars, const QeOptions& opts)
    : qf_(is_quantifier_free(f) ? f : eliminate(f, opts)),
      vars_(std::move(vars)),
      nodes_(std::make_shared<std::vector<Node>>()) {
  root_ = compile(qf_);
}

int PointEvaluator::compile(const Pres& f) {
  Node n;
  n.kind = f->kind;
  if (is_atom(f)) {
    auto a = std::make_shared<Atom>();
    a->kind = f->kind;
    auto fits = [](const BigInt& v) {
      return v <= std::numeric_limits<std::int64_t>::max() / 4 && v >= std::numeric_limits<std::int64_t>::min() / 4;
    };
    for (const auto& [v, c] : f->term.coeffs) {
      auto it = std::find(vars_.begin(), vars_.end(), v);
      if (it == vars_.end()) throw DimensionError("formula variable '" + v + "' is not a coordinate");
      int idx = static_cast<int>(it - vars_.begin());
      a->big.emplace_back(idx, c);
      if (fits(c)) a->small.emplace_back(idx, static_cast<std::int64_t>(c));
      else a->fits = false;
    }
    a->constant = f->term.constant;
    a->modulus = f->modulus;
    if (fits(f->term.constant) && fits(f->modulus)) {
      a->small_constant = static_cast<std::int64_t>(f->term.constant);
      a->small_modulus = static_cast<std::int64_t>(f->modulus);
    } else {
      a->fits = false;
    }
    n.data = a;
  } else {
    for (const auto& k : f->kids) n.kids.push_back(compile(k));
  }
  nodes_->push_back(std::move(n));
  return static_cast<int>(nodes_->size()) - 1;
}

bool PointEvaluator::eval(int idx, std::span<const Tokens> point) const {
  const Node& n = (*nodes_)[idx];
  switch (n.kind) {
    case PresKind::True: return true;
    case PresKind::False: return false;
    case PresKind::Not: return !eval(n.kids[0], point);
    case PresKind::And:
      for (int k : n.kids)
        if (!eval(k, point)) return false;
      return true;
    case PresKind::Or:
      for (int k : n.kids)
        if (eval(k, point)) return true;
      return false;
    case PresKind::Le:
    case PresKind::Eq:
    case PresKind::Div: {
      const Atom& a = *n.data;
      bool small = a.fits;
      if (small)
        for (const auto& [i, c] : a.small)
          if (point[i] > (Tokens{1} << 32)) small = false;
      if (small) {
        __int128 s = a.small_constant;
        for (const auto& [i, c] : a.small) s += static_cast<__int128>(c) * static_cast<__int128>(point[i]);
        if (n.kind == PresKind::Le) return s <= 0;
        if (n.kind == PresKind::Eq) return s == 0;
        return s % a.small_modulus == 0;
      }
      BigInt s = a.constant;
      for (const auto& [i, c] : a.big) s += c * BigInt(point[i]);
      if (n.kind == PresKind::Le) return s <= 0;
      if (n.kind == PresKind::Eq) return s == 0;
      return s % a.modulus == 0;
    }
    default: throw Error("point evaluation of a quantified formula");
  }
}

bool PointEvaluator::operator()(std::span<const Tokens> point) const {
  if (point.size() != vars_.size()) throw DimensionError("point has wrong dimension");
  return eval(root_, point);
}

// ---------------------------------------------------------------- semilinear sets

SemilinearSet parse_semilinear(std::string_view text, std::size_t dimension) {
  detail::TokenStream ts(text);
  SemilinearSet s;
  s.dimension = dimension;
  auto vec = [&]() {
    std::vector<Tokens> v;
    ts.expect_sym("(");
    if (!ts.at_sym(")")) {
      do {
        if (ts.peek().kind != detail::Tok::Number) ts.fail("expected natural number");
        v.push_back(std::stoull(ts.next().text));
      } while (ts.accept_sym(","));
    }
    ts.expect_sym(")");
    if (v.size() != dimension) ts.fail("vector has " + std::to_string(v.size()) + " entries, expected " + std::to_string(dimension));
    return v;
  };
  if (ts.accept_word("empty")) {
    ts.expect_end();
    return s;
  }
  while (!ts.at_end()) {
    ts.accept_sym("|");
    if (!ts.accept_word("base")) ts.fail("expected 'base'");
    LinearSet l;
    l.base = vec();
    if (ts.accept_word("periods"))
      while (ts.at_sym("(")) l.periods.push_back(vec());
    s.components.push_back(std::move(l));
  }
  return s;
}

std::string to_string(const SemilinearSet& s) {
  if (s.components.empty()) return "empty";
  std::string out;
  auto vec = [&](const std::vector<Tokens>& v) {
    out += '(';
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    out += ')';
  };
  for (std::size_t c = 0; c < s.components.size(); ++c) {
    if (c) out += " | ";
    out += "base ";
    vec(s.components[c].base);
    if (!s.components[c].periods.empty()) {
      out += " periods ";
      for (const auto& p : s.components[c].periods) vec(p);
    }
  }
  return out;
}

Pres to_formula(const SemilinearSet& s, std::span<const std::string> vars) {
  if (vars.size() != s.dimension) throw DimensionError("semilinear set dimension differs from variable count");
  std::vector<Pres> comps;
  for (const auto& l : s.components) {
    if (l.base.size() != s.dimension) throw DimensionError("linear set base has wrong dimension");
    std::vector<std::string> ks;
    for (std::size_t i = 0; i < l.periods.size(); ++i) ks.push_back(fresh_name("k"));
    std::vector<Pres> eqs;
    for (std::size_t d = 0; d < s.dimension; ++d) {
      LinTerm rhs = LinTerm::num(BigInt(l.base[d]));
      for (std::size_t i = 0; i < l.periods.size(); ++i) {
        if (l.periods[i].size() != s.dimension) throw DimensionError("period has wrong dimension");
        rhs.add(LinTerm::var(ks[i], BigInt(l.periods[i][d])));
      }
      eqs.push_back(pa::eq(LinTerm::var(vars[d]), rhs));
    }
    comps.push_back(pa::exists_nat(ks, pa::conj(std::move(eqs))));
  }
  return pa::disj(std::move(comps));
}

namespace {
bool enumerate_periods(const LinearSet& l, std::size_t i, std::vector<Tokens>& rest) {
  if (i == l.periods.size()) return std::all_of(rest.begin(), rest.end(), [](Tokens v) { return v == 0; });
  const auto& y = l.periods[i];
  bool zero = std::all_of(y.begin(), y.end(), [](Tokens v) { return v == 0; });
  if (zero) return enumerate_periods(l, i + 1, rest);
  Tokens max_k = std::numeric_limits<Tokens>::max();
  for (std::size_t d = 0; d < y.size(); ++d)
    if (y[d] > 0) max_k = std::min(max_k, rest[d] / y[d]);
  for (Tokens k = 0;; ++k) {
    if (enumerate_periods(l, i + 1, rest)) {
      for (std::size_t d = 0; d < y.size(); ++d) rest[d] += (k)*y[d];
      return true;
    }
    if (k == max_k) {
      for (std::size_t d = 0; d < y.size(); ++d) rest[d] += k * y[d];
      return false;
    }
    for (std::size_t d = 0; d < y.size(); ++d) rest[d] -= y[d];
  }
}
}  // namespace

bool membership_enumerate(const LinearSet& l, std::span<const Tokens> v) {
  if (l.base.size() != v.size()) throw DimensionError("vector dimension differs from set dimension");
  std::vector<Tokens> rest(v.begin(), v.end());
  for (std::size_t d = 0; d < rest.size(); ++d) {
    if (rest[d] < l.base[d]) return false;
    rest[d] -= l.base[d];
  }
  return enumerate_periods(l, 0, rest);
}

bool membership(const SemilinearSet& s, std::span<const Tokens> v, const QeOptions& opts) {
  if (v.size() != s.dimension) throw DimensionError("vector dimension differs from set dimension");
  for (const auto& l : s.components) {
    if (l.periods.size() <= 8) {
      if (membership_enumerate(l, v)) return true;
      continue;
    }
    std::vector<std::string> vars;
    for (std::size_t d = 0; d < s.dimension; ++d) vars.push_back("v" + std::to_string(d));
    SemilinearSet single{s.dimension, {l}};
    std::map<std::string, LinTerm> repl;
    for (std::size_t d = 0; d < s.dimension; ++d) repl[vars[d]] = LinTerm::num(BigInt(v[d]));
    if (decide(substitute(to_formula(single, vars), repl), opts)) return true;
  }
  return false;
}

std::optional<std::vector<Marking>> upward_bases(const SemilinearSet& s) {
  std::vector<Marking> out;
  for (const auto& l : s.components) {
    for (std::size_t d = 0; d < s.dimension; ++d) {
      bool has_unit = std::any_of(l.periods.begin(), l.periods.end(), [&](const std::vector<Tokens>& y) {
        for (std::size_t e = 0; e < y.size(); ++e)
          if (y[e] != (e == d ? 1u : 0u)) return false;
        return true;
      });
      if (!has_unit) return std::nullopt;
    }
    out.push_back(l.base);
  }
  return out;
}

std::optional<std::vector<Marking>> upward_bases(const Pres& f, std::span<const std::string> vars) {
  Pres g = nnf(f);
  if (!is_quantifier_free(g)) return std::nullopt;
  if (g->kind == PresKind::False) return std::vector<Marking>{};
  std::vector<Pres> disjuncts = g->kind == PresKind::Or ? g->kids : std::vector<Pres>{g};
  std::vector<Marking> out;
  for (const auto& d : disjuncts) {
    std::vector<Pres> conjuncts = d->kind == PresKind::And ? d->kids : std::vector<Pres>{d};
    Marking base(vars.size(), 0);
    for (const auto& a : conjuncts) {
      if (a->kind == PresKind::True) continue;
      if (a->kind != PresKind::Le || a->term.coeffs.size() != 1) return std::nullopt;
      const auto& [v, c] = *a->term.coeffs.begin();
      if (c != -1) return std::nullopt;  // only -v + k <= 0
      auto it = std::find(vars.begin(), vars.end(), v);
      if (it == vars.end()) return std::nullopt;
      BigInt k = a->term.constant;
      if (k > 0) {
        if (k > BigInt(std::numeric_limits<Tokens>::max())) return std::nullopt;
        auto& slot = base[static_cast<std::size_t>(it - vars.begin())];
        slot = std::max(slot, static_cast<Tokens>(k));
      }
    }
    out.push_back(std::move(base));
  }
  return out;
}

// ---------------------------------------------------------------- nets

std::vector<std::string> place_vars(const PetriNet& net) { return net.places(); }

std::vector<std::string> primed(std::span<const std::string> vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(v + "'");
  return out;
}

std::vector<std::string> prefixed(const std::string& prefix, std::span<const std::string> vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(prefix + "." + v);
  return out;
}

Pres marking_equals(std::span<const std::string> vars, std::span<const Tokens> m) {
  if (vars.size() != m.size()) throw DimensionError("marking dimension differs from variable count");
  std::vector<Pres> parts;
  for (std::size_t i = 0; i < vars.size(); ++i) parts.push_back(pa::eq(LinTerm::var(vars[i]), LinTerm::num(BigInt(m[i]))));
  return pa::conj(std::move(parts));
}

Pres vectors_equal(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw DimensionError("vector dimensions differ");
  std::vector<Pres> parts;
  for (std::size_t i = 0; i < a.size(); ++i) parts.push_back(pa::eq(LinTerm::var(a[i]), LinTerm::var(b[i])));
  return pa::conj(std::move(parts));
}

Pres edge_formula(const PetriNet& net, std::span<const std::string> src, std::span<const std::string> dst) {
  if (src.size() != net.num_places() || dst.size() != net.num_places()) throw DimensionError("edge formula dimension");
  std::vector<Pres> options;
  for (std::size_t t = 0; t < net.num_transitions(); ++t) {
    std::vector<Pres> parts;
    for (std::size_t p = 0; p < net.num_places(); ++p) {
      parts.push_back(pa::ge(LinTerm::var(src[p]), LinTerm::num(BigInt(net.pre(t, p)))));
      parts.push_back(pa::eq(LinTerm::var(dst[p]), LinTerm::var(src[p]) + LinTerm::num(BigInt(delta(net, t, p)))));
    }
    options.push_back(pa::conj(std::move(parts)));
  }
  return pa::disj(std::move(options));
}

Pres edge_formula(const PetriNet& net) {
  auto src = place_vars(net);
  return edge_formula(net, src, primed(src));
}

Pres identity_relation(std::span<const std::string> src, std::span<const std::string> dst) {
  return pa::conj(pa::naturals(src), vectors_equal(src, dst));
}

namespace {
void check_place_vars(const PetriNet& net, const Pres& s) {
  for (const auto& v : free_vars(s))
    if (!net.place_index(v)) throw DimensionError("set formula has free variable '" + v + "' that is not a place");
}
}  // namespace

Pres pre_image(const PetriNet& net, const Pres& s) {
  check_place_vars(net, s);
  auto vars = place_vars(net);
  Pres nat = pa::naturals(vars);
  std::vector<Pres> options;
  for (std::size_t t = 0; t < net.num_transitions(); ++t) {
    std::map<std::string, LinTerm> shift;
    std::vector<Pres> guard{nat};
    for (std::size_t p = 0; p < net.num_places(); ++p) {
      if (net.pre(t, p) > 0) guard.push_back(pa::ge(LinTerm::var(vars[p]), LinTerm::num(BigInt(net.pre(t, p)))));
      auto d = delta(net, t, p);
      if (d != 0) shift[vars[p]] = LinTerm::var(vars[p]) + LinTerm::num(BigInt(d));
    }
    guard.push_back(substitute(s, shift));
    options.push_back(pa::conj(std::move(guard)));
  }
  return pa::disj(std::move(options));
}

Pres box_set(const PetriNet& net, const Pres& s) {
  check_place_vars(net, s);
  Pres nat = pa::naturals(place_vars(net));
  return pa::conj(nat, pa::neg(pre_image(net, pa::conj(nat, pa::neg(s)))));
}

Pres compose_relations(const Pres& r1, const Pres& r2, std::span<const std::string> src,
                       std::span<const std::string> dst, const QeOptions& opts) {
  if (src.size() != dst.size()) throw DimensionError("relation dimensions differ");
  std::vector<std::string> mid;
  for (std::size_t i = 0; i < src.size(); ++i) mid.push_back(fresh_name("z"));
  Pres body = pa::conj({rename(r1, dst, mid), rename(r2, src, mid), pa::naturals(mid)});
  for (auto it = mid.rbegin(); it != mid.rend(); ++it) body = node(PresKind::Exists, {}, 0, *it, {body});
  return eliminate(body, opts);
}

Pres to_presburger(const Paml& c) {
  switch (c->kind) {
    case PamlKind::True: return pa::truth();
    case PamlKind::False: return pa::falsity();
    case PamlKind::Not: return pa::neg(to_presburger(c->lhs));
    case PamlKind::And: return pa::conj(to_presburger(c->lhs), to_presburger(c->rhs));
    case PamlKind::Or: return pa::disj(to_presburger(c->lhs), to_presburger(c->rhs));
    case PamlKind::Atom: {
      LinTerm t = LinTerm::num(c->term.constant);
      for (const auto& [v, k] : c->term.coeffs) t.add(LinTerm::var(v, k));
      LinTerm b = LinTerm::num(c->bound);
      switch (c->rel) {
        case PamlRel::Le: return pa::le(t, b);
        case PamlRel::Ge: return pa::ge(t, b);
        case PamlRel::Lt: return pa::lt(t, b);
        case PamlRel::Gt: return pa::gt(t, b);
        case PamlRel::Eq: return pa::eq(t, b);
        case PamlRel::Ne: return pa::neg(pa::eq(t, b));
        case PamlRel::Mod: return pa::divides(c->modulus, t - b);
      }
    }
  }
  return pa::truth();
}

}  // namespace pnmc
