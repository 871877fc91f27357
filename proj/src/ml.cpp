#include <charconv>
#include <map>

#include "lexer.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/logic.hpp"
#include "pnmc/net.hpp"

namespace pnmc {

namespace {

Ml make(MlKind k, Ml lhs = nullptr, Ml rhs = nullptr, Paml atom = nullptr) {
  return std::make_shared<const MlNode>(MlNode{k, std::move(lhs), std::move(rhs), std::move(atom)});
}

Paml make_paml(PamlKind k, Paml lhs = nullptr, Paml rhs = nullptr) {
  auto n = std::make_shared<PamlNode>();
  n->kind = k;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

std::int64_t to_int(const detail::Token& t) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size()) throw ParseError("integer out of range", t.line, t.column);
  return v;
}

class MlParser {
 public:
  explicit MlParser(std::string_view text) : ts_(text) {}

  Ml run() {
    Ml f = implication();
    ts_.expect_end();
    return f;
  }

 private:
  detail::TokenStream ts_;

  Ml implication() {
    Ml a = disjunction();
    if (ts_.accept_sym("=>")) return ml::implies(a, implication());
    if (ts_.accept_sym("<=>")) {
      Ml b = implication();
      return ml::conj(ml::implies(a, b), ml::implies(b, a));
    }
    return a;
  }
  Ml disjunction() {
    Ml a = conjunction();
    while (ts_.accept_sym("|")) a = ml::disj(a, conjunction());
    return a;
  }
  Ml conjunction() {
    Ml a = unary();
    while (ts_.accept_sym("&")) a = ml::conj(a, unary());
    return a;
  }
  Ml unary() {
    if (ts_.accept_sym("!")) return ml::neg(unary());
    if (ts_.accept_word("box")) return ml::box(unary());
    if (ts_.accept_word("dia")) return ml::dia(unary());
    if (ts_.accept_word("boxinv")) return ml::boxinv(unary());
    if (ts_.accept_word("diainv")) return ml::diainv(unary());
    if (ts_.accept_word("top")) return ml::top();
    if (ts_.accept_word("bot")) return ml::bot();
    if (ts_.accept_sym("(")) {
      Ml f = implication();
      ts_.expect_sym(")");
      return f;
    }
    if (ts_.accept_sym("{")) {
      Paml c = constraint();
      ts_.expect_sym("}");
      return ml::atom(c);
    }
    ts_.fail("expected modal formula");
  }

  // constraints inside braces
  Paml constraint() {
    Paml a = c_conj();
    while (ts_.accept_sym("|")) a = make_paml(PamlKind::Or, a, c_conj());
    return a;
  }
  Paml c_conj() {
    Paml a = c_unary();
    while (ts_.accept_sym("&")) a = make_paml(PamlKind::And, a, c_unary());
    return a;
  }
  Paml c_unary() {
    if (ts_.accept_sym("!")) return make_paml(PamlKind::Not, c_unary());
    if (ts_.accept_sym("(")) {
      Paml c = constraint();
      ts_.expect_sym(")");
      return c;
    }
    if (ts_.accept_word("true")) return make_paml(PamlKind::True);
    if (ts_.accept_word("false")) return make_paml(PamlKind::False);
    return c_atom();
  }
  Paml c_atom() {
    PamlTerm lhs = term();
    auto n = std::make_shared<PamlNode>();
    n->kind = PamlKind::Atom;
    if (ts_.accept_word("mod")) {
      auto tok = ts_.peek();
      if (tok.kind != detail::Tok::Number) ts_.fail("expected modulus");
      ts_.next();
      n->modulus = to_int(tok);
      if (n->modulus < 2) throw ParseError("modulus must be at least 2", tok.line, tok.column);
      ts_.expect_sym("=");
      auto k = ts_.peek();
      if (k.kind != detail::Tok::Number) ts_.fail("expected residue");
      ts_.next();
      n->rel = PamlRel::Mod;
      n->bound = to_int(k);
      n->term = lhs;
      return n;
    }
    static const std::pair<const char*, PamlRel> rels[] = {{"<=", PamlRel::Le}, {">=", PamlRel::Ge}, {"<", PamlRel::Lt},
                                                          {">", PamlRel::Gt},  {"=", PamlRel::Eq},  {"!=", PamlRel::Ne}};
    for (auto [sym, rel] : rels) {
      if (ts_.accept_sym(sym)) {
        PamlTerm rhs = term();
        std::map<std::string, std::int64_t> acc;
        std::vector<std::string> order;
        auto add = [&](const PamlTerm& t, std::int64_t sign) {
          for (auto& [v, c] : t.coeffs) {
            if (!acc.count(v)) order.push_back(v);
            acc[v] += sign * c;
          }
        };
        add(lhs, 1);
        add(rhs, -1);
        for (auto& v : order)
          if (acc[v] != 0) n->term.coeffs.emplace_back(v, acc[v]);
        n->rel = rel;
        n->bound = rhs.constant - lhs.constant;
        return n;
      }
    }
    ts_.fail("expected comparison or 'mod'");
  }
  PamlTerm term() {
    PamlTerm t;
    std::int64_t sign = 1;
    if (ts_.accept_sym("-")) sign = -1;
    else ts_.accept_sym("+");
    while (true) {
      std::int64_t coeff = sign;
      std::optional<std::string> var;
      if (ts_.peek().kind == detail::Tok::Number) {
        coeff *= to_int(ts_.next());
        if (ts_.accept_sym("*")) var = ts_.expect_ident();
        else if (ts_.peek().kind == detail::Tok::Ident && ts_.peek().text != "mod") var = ts_.next().text;
      } else if (ts_.peek().kind == detail::Tok::Ident && ts_.peek().text != "mod") {
        var = ts_.next().text;
      } else {
        ts_.fail("expected term");
      }
      if (var) {
        auto it = std::find_if(t.coeffs.begin(), t.coeffs.end(), [&](auto& e) { return e.first == *var; });
        if (it == t.coeffs.end()) t.coeffs.emplace_back(*var, coeff);
        else it->second += coeff;
      } else {
        t.constant += coeff;
      }
      if (ts_.accept_sym("+")) sign = 1;
      else if (ts_.accept_sym("-")) sign = -1;
      else break;
    }
    return t;
  }
};

void term_string(const PamlTerm& t, std::string& out) {
  bool first = true;
  for (auto& [v, c] : t.coeffs) {
    if (c == 0) continue;
    std::int64_t a = c;
    if (first) {
      if (a < 0) out += "-";
    } else {
      out += a < 0 ? " - " : " + ";
    }
    if (a < 0) a = -a;
    if (a != 1) out += std::to_string(a) + "*";
    out += v;
    first = false;
  }
  if (t.constant != 0 || first) {
    if (first) out += std::to_string(t.constant);
    else out += (t.constant < 0 ? " - " : " + ") + std::to_string(t.constant < 0 ? -t.constant : t.constant);
  }
}

int paml_prec(PamlKind k) { return k == PamlKind::Or ? 1 : k == PamlKind::And ? 2 : 3; }

void paml_print(const Paml& c, std::string& out) {
  auto child = [&](const Paml& x, bool parens) {
    if (parens) out += '(';
    paml_print(x, out);
    if (parens) out += ')';
  };
  switch (c->kind) {
    case PamlKind::True: out += "true"; return;
    case PamlKind::False: out += "false"; return;
    case PamlKind::Not:
      out += '!';
      child(c->lhs, paml_prec(c->lhs->kind) < 3 || c->lhs->kind == PamlKind::Atom);
      return;
    case PamlKind::And:
    case PamlKind::Or: {
      int p = paml_prec(c->kind);
      child(c->lhs, paml_prec(c->lhs->kind) < p);
      out += c->kind == PamlKind::And ? " & " : " | ";
      child(c->rhs, paml_prec(c->rhs->kind) <= p);
      return;
    }
    case PamlKind::Atom: {
      term_string(c->term, out);
      if (c->rel == PamlRel::Mod) {
        out += " mod " + std::to_string(c->modulus) + " = " + std::to_string(c->bound);
        return;
      }
      static const char* names[] = {" <= ", " >= ", " < ", " > ", " = ", " != "};
      out += names[static_cast<int>(c->rel)];
      out += std::to_string(c->bound);
      return;
    }
  }
}

int ml_prec(MlKind k) {
  switch (k) {
    case MlKind::Implies: return 1;
    case MlKind::Or: return 2;
    case MlKind::And: return 3;
    default: return 4;
  }
}

void ml_print(const Ml& f, std::string& out) {
  auto child = [&](const Ml& c, bool parens) {
    if (parens) out += '(';
    ml_print(c, out);
    if (parens) out += ')';
  };
  switch (f->kind) {
    case MlKind::Top: out += "top"; return;
    case MlKind::Bot: out += "bot"; return;
    case MlKind::Atom:
      out += '{';
      paml_print(f->atom, out);
      out += '}';
      return;
    case MlKind::Not: out += '!'; child(f->lhs, ml_prec(f->lhs->kind) < 4); return;
    case MlKind::Box: out += "box "; child(f->lhs, ml_prec(f->lhs->kind) < 4); return;
    case MlKind::Dia: out += "dia "; child(f->lhs, ml_prec(f->lhs->kind) < 4); return;
    case MlKind::BoxInv: out += "boxinv "; child(f->lhs, ml_prec(f->lhs->kind) < 4); return;
    case MlKind::DiaInv: out += "diainv "; child(f->lhs, ml_prec(f->lhs->kind) < 4); return;
    case MlKind::And:
    case MlKind::Or:
    case MlKind::Implies: {
      int p = ml_prec(f->kind);
      const char* op = f->kind == MlKind::And ? " & " : f->kind == MlKind::Or ? " | " : " => ";
      int pl = ml_prec(f->lhs->kind), pr = ml_prec(f->rhs->kind);
      child(f->lhs, pl < p || (pl == p && f->kind == MlKind::Implies));
      out += op;
      child(f->rhs, pr < p || (pr == p && f->kind != MlKind::Implies));
      return;
    }
  }
}

void paml_places(const Paml& c, std::set<std::string>& out) {
  if (!c) return;
  for (auto& [v, k] : c->term.coeffs) out.insert(v);
  paml_places(c->lhs, out);
  paml_places(c->rhs, out);
}

void ml_places(const Ml& f, std::set<std::string>& out) {
  if (!f) return;
  if (f->atom) paml_places(f->atom, out);
  ml_places(f->lhs, out);
  ml_places(f->rhs, out);
}

Fo translate(const Ml& f, const std::string& cur, const std::string& other) {
  switch (f->kind) {
    case MlKind::Top: return fo::truth();
    case MlKind::Bot: return fo::falsity();
    case MlKind::Atom: throw FragmentError("modal formula contains a Presburger atom");
    case MlKind::Not: return fo::neg(translate(f->lhs, cur, other));
    case MlKind::And: return fo::conj(translate(f->lhs, cur, other), translate(f->rhs, cur, other));
    case MlKind::Or: return fo::disj(translate(f->lhs, cur, other), translate(f->rhs, cur, other));
    case MlKind::Implies: return fo::implies(translate(f->lhs, cur, other), translate(f->rhs, cur, other));
    case MlKind::Box: return fo::forall(other, fo::implies(fo::edge(cur, other), translate(f->lhs, other, cur)));
    case MlKind::Dia: return fo::exists(other, fo::conj(fo::edge(cur, other), translate(f->lhs, other, cur)));
    case MlKind::BoxInv: return fo::forall(other, fo::implies(fo::edge(other, cur), translate(f->lhs, other, cur)));
    case MlKind::DiaInv: return fo::exists(other, fo::conj(fo::edge(other, cur), translate(f->lhs, other, cur)));
  }
  return nullptr;
}

}  // namespace

namespace ml {
Ml top() { return make(MlKind::Top); }
Ml bot() { return make(MlKind::Bot); }
Ml atom(Paml c) { return make(MlKind::Atom, nullptr, nullptr, std::move(c)); }
Ml neg(Ml f) { return make(MlKind::Not, std::move(f)); }
Ml conj(Ml a, Ml b) { return make(MlKind::And, std::move(a), std::move(b)); }
Ml disj(Ml a, Ml b) { return make(MlKind::Or, std::move(a), std::move(b)); }
Ml implies(Ml a, Ml b) { return make(MlKind::Implies, std::move(a), std::move(b)); }
Ml box(Ml f) { return make(MlKind::Box, std::move(f)); }
Ml dia(Ml f) { return make(MlKind::Dia, std::move(f)); }
Ml boxinv(Ml f) { return make(MlKind::BoxInv, std::move(f)); }
Ml diainv(Ml f) { return make(MlKind::DiaInv, std::move(f)); }
Ml dia_n(std::size_t n, Ml f) {
  for (std::size_t i = 0; i < n; ++i) f = dia(f);
  return f;
}
}  // namespace ml

std::set<std::string> places_of(const Paml& c) {
  std::set<std::string> out;
  paml_places(c, out);
  return out;
}

std::string to_string(const Paml& c) {
  std::string out;
  paml_print(c, out);
  return out;
}

Ml parse_ml(std::string_view text) { return MlParser(text).run(); }

std::string to_string(const Ml& f) {
  std::string out;
  ml_print(f, out);
  return out;
}

std::size_t modal_degree(const Ml& f) {
  if (!f) return 0;
  std::size_t inner = std::max(modal_degree(f->lhs), modal_degree(f->rhs));
  bool modal = f->kind == MlKind::Box || f->kind == MlKind::Dia || f->kind == MlKind::BoxInv || f->kind == MlKind::DiaInv;
  return inner + (modal ? 1 : 0);
}

bool has_inverse(const Ml& f) {
  if (!f) return false;
  if (f->kind == MlKind::BoxInv || f->kind == MlKind::DiaInv) return true;
  return has_inverse(f->lhs) || has_inverse(f->rhs);
}

bool has_paml(const Ml& f) {
  if (!f) return false;
  if (f->kind == MlKind::Atom) return true;
  return has_paml(f->lhs) || has_paml(f->rhs);
}

std::set<std::string> places_of(const Ml& f) {
  std::set<std::string> out;
  ml_places(f, out);
  return out;
}

void check_places(const Ml& f, const PetriNet& net) {
  for (const auto& p : places_of(f))
    if (!net.place_index(p)) throw SemanticError("formula mentions unknown place", p);
}

FragmentReport classify(const Ml& f) {
  FragmentReport r;
  r.modal_degree = modal_degree(f);
  r.has_inverse = has_inverse(f);
  r.has_paml = has_paml(f);
  return r;
}

Fo modal_to_fo(const Ml& f, const std::string& free_var, const std::string& other_var) {
  return translate(f, free_var, other_var);
}

AnyFormula parse_any(std::string_view text) {
  try {
    return {parse_fo(text), nullptr};
  } catch (const ParseError& fo_error) {
    bool looks_fo = text.find("forall") != std::string_view::npos || text.find("exists") != std::string_view::npos ||
                    text.find("->") != std::string_view::npos || text.find("init(") != std::string_view::npos;
    if (looks_fo) throw;
    return {nullptr, parse_ml(text)};
  }
}

}  // namespace pnmc
