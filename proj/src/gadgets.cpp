#include "pnmc/gadgets.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <set>

#include "lexer.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/statespace.hpp"

namespace pnmc {

// ---------------------------------------------------------------- formula texts

namespace {

std::string paren(const std::string& s) { return "(" + s + ")"; }

// exists y . x -> y & y -> y, over an arbitrary edge symbol.
std::string looping_successor(const std::string& x, const std::string& y, const std::string& arrow = "->") {
  return paren("exists " + y + " . " + x + " " + arrow + " " + y + " & " + y + " " + arrow + " " + y);
}

std::string three_cycle(const std::string& x) {
  return paren("exists y3 z3 . " + x + " ~ y3 & y3 ~ z3 & z3 ~ " + x + " & !(" + x + " ~ " + x +
               " | y3 ~ y3 | z3 ~ z3)");
}

std::string dead_lambda(const std::string& z) {
  return paren("!(" + z + " ~ " + z + ") & !" + three_cycle(z) + " & (forall x . " + z + " ~ x => !" +
               three_cycle("x") + ")");
}

std::string no_successor(const std::string& z, const std::string& arrow) {
  return paren("!(exists z' . " + z + " " + arrow + " z')");
}

std::string plus_sl(const std::string& y) {
  return paren(y + " ->+ " + y + " & (forall w . " + y + " ->+ w => w ->+ " + y + ")");
}

std::string plus_left(const std::string& z) {
  return paren("(exists y . " + z + " ->+ y & " + plus_sl("y") + ") & (forall y . " + z + " ->+ y => " +
               plus_sl("y") + " | " + no_successor("y", "->+") + ")");
}

std::string plus_right(const std::string& z) {
  return paren("exists y . " + z + " ->+ y & (forall y . " + z + " ->+ y => " + no_successor("y", "->+") + ")");
}

// Bottom strongly connected component membership; `w` names the bound variable.
std::string star_dl(const std::string& z, const std::string& w) {
  return paren("forall " + w + " . " + z + " ->* " + w + " => " + w + " ->* " + z);
}

std::string star_predl(const std::string& z) {
  return paren("!" + star_dl(z, "w") + " & (forall w . " + z + " ->* w & !(w ->* " + z + ") => " +
               star_dl("w", "u") + ")");
}

std::string star_sentence(bool both_directions) {
  std::string tail = " & !(z1 ->* z2)";
  if (both_directions) tail += " & !(z2 ->* z1)";
  return "forall z . " + star_dl("z", "w") + " => (exists z1 z2 . z1 ->* z & " + star_predl("z1") +
         " & z2 ->* z & " + star_predl("z2") + tail + ")";
}

std::string initial_marker_text(const std::string& x, const std::string& y, const std::string& z) {
  return paren("!(" + x + " -> " + x + ") & (exists " + y + " . forall " + z + " . " + x + " -> " + y + " & !(" + y +
               " -> " + z + "))");
}

std::vector<FixedFormula> build_catalogue() {
  const std::string deadlock = "(!exists z' . z -> z')";
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> texts{
      {"union",
       {"equal reachability sets on the union net",
        "forall z . " + deadlock + " => (exists z1 . z1 -> z & " + looping_successor("z1", "y") +
            ") & (exists z2 . z2 -> z & !" + looping_successor("z2", "y") + ")"}},
      {"union_two_var",
       {"the union sentence over two recycled variable names",
        "forall z . " + deadlock +
            " => (exists z' . z' -> z & (exists z . z' -> z & z -> z)) & (exists z' . z' -> z & !(exists z . z' -> z "
            "& z -> z))"}},
      {"union_lambda",
       {"the union sentence over undirected edges, for 3-cycle augmented nets",
        "forall z . " + dead_lambda("z") + " => (exists z1 . z ~ z1 & " +
            paren("exists y . z1 ~ y & y ~ y") + ") & (exists z2 . z ~ z2 & !" +
            paren("exists y . z2 ~ y & y ~ y") + ")"}},
      {"union_ml", {"modal validity version of the union sentence", "box bot => (diainv dia dia top & diainv box box bot)"}},
      {"union_ml_fo",
       {"first-order reading of the modal union formula",
        "forall z . " + deadlock +
            " => (exists z1 z2 z3 . z1 -> z & z1 -> z2 & z2 -> z3) & (exists z1 . z1 -> z & (forall z2 z3 . !(z1 -> z2 "
            "& z2 -> z3)))"}},
      {"union_positive",
       {"every marking of the second net is reachable in the first",
        "forall z . exists z1 . exists yl . exists z' . z -> z' | (z1 -> z & z1 -> yl & yl -> yl)"}},
      {"union_forward",
       {"equal reachability sets, forward fragment",
        "forall z2 . exists z1 . forall z . exists yl . exists z' . z2 -> z => (z -> z' | (z1 -> z & yl -> yl & (z1 "
        "-> yl <=> !(z2 -> yl))))"}},
      {"union_containment",
       {"every marking of the first net is reachable in the second",
        "forall z . " + deadlock + " => (exists z2 . z2 -> z & !" + looping_successor("z2", "y") + ")"}},
      {"union_plus",
       {"equal reachability sets via strict reachability",
        "forall z . " + no_successor("z", "->+") + " => (exists z1 . z1 ->+ z & " + plus_left("z1") +
            ") & (exists z2 . z2 ->+ z & " + plus_right("z2") + ")"}},
      {"union_star", {"equal reachability sets via reachability, on the loop-free union net", star_sentence(false)}},
      {"union_star_symmetric", {"the reachability sentence with both incomparability directions", star_sentence(true)}},
      {"initial_marker", {"the unique marking with a deadlocked successor and no loop", initial_marker_text("x", "y", "z")}},
      {"loaded_marker",
       {"successor of the initial marker carrying a loop",
        "exists y . " + initial_marker_text("y", "y'", "z") + " & y -> x & x -> x"}},
      {"first_step", {"the initial marking and its non-returning successor", "init(x) & x -> y & !(y ->* x)"}},
      {"reach_witness", {"a deadlocked successor with two steps of history", "dia (box bot & diainv diainv top)"}},
      {"always_enabled", {"some transition is enabled", "dia top"}},
      {"some_deadlock", {"some reachable marking has no self-loop", "exists x . !(x -> x)"}},
  };
  std::vector<FixedFormula> out;
  for (auto& [name, body] : texts) out.push_back({name, body.first, parse_any(body.second)});
  return out;
}

}  // namespace

const std::vector<FixedFormula>& fixed_formulas() {
  static const std::vector<FixedFormula> catalogue = build_catalogue();
  return catalogue;
}

const FixedFormula& fixed_formula(std::string_view name) {
  for (const auto& f : fixed_formulas())
    if (f.name == name) return f;
  throw PreconditionError("unknown fixed formula '" + std::string(name) + "'");
}

Fo fixed_fo(std::string_view name) {
  const auto& f = fixed_formula(name);
  if (!f.formula.is_fo()) throw FragmentError("'" + std::string(name) + "' is a modal formula");
  return f.formula.fo;
}

Ml fixed_ml(std::string_view name) {
  const auto& f = fixed_formula(name);
  if (f.formula.is_fo()) throw FragmentError("'" + std::string(name) + "' is a first-order formula");
  return f.formula.ml;
}

namespace formulas {
Fo has_looping_successor(const std::string& x, const std::string& y) { return parse_fo(looping_successor(x, y)); }
Fo initial_marker(const std::string& x, const std::string& y, const std::string& z) {
  return parse_fo(initial_marker_text(x, y, z));
}
Fo loaded_marker(const std::string& x, const std::string& y) {
  std::string inner_y = y + "'";
  std::string inner_z = y + "''";
  return parse_fo("exists " + y + " . " + initial_marker_text(y, inner_y, inner_z) + " & " + y + " -> " + x + " & " +
                  x + " -> " + x);
}
Fo first_step(const std::string& x, const std::string& y) {
  return fo::conj({fo::init(x), fo::edge(x, y), fo::neg(fo::star(y, x))});
}
}  // namespace formulas

// ---------------------------------------------------------------- net helpers

namespace {

using PlaceMap = std::map<std::string, std::string>;

PlaceMap identity_map(const PetriNet& n) {
  PlaceMap m;
  for (const auto& p : n.places()) m[p] = p;
  return m;
}

// Copies transition t of `src` into `out`, mapping places by name.
std::size_t copy_transition(PetriNet& out, const PetriNet& src, std::size_t t, const std::string& name,
                            const PlaceMap& places) {
  std::size_t nt = out.add_transition(name);
  for (std::size_t p = 0; p < src.num_places(); ++p) {
    std::size_t q = *out.place_index(places.at(src.place_name(p)));
    out.set_pre(nt, q, src.pre(t, p));
    out.set_post(nt, q, src.post(t, p));
  }
  return nt;
}

void self_loop(PetriNet& net, std::size_t t, std::size_t p, Weight w = 1) {
  net.set_pre(t, p, net.pre(t, p) + w);
  net.set_post(t, p, net.post(t, p) + w);
}

bool has_empty_preset(const PetriNet& n, std::string* which) {
  for (std::size_t t = 0; t < n.num_transitions(); ++t) {
    auto pre = n.pre(t);
    if (std::all_of(pre.begin(), pre.end(), [](Weight w) { return w == 0; })) {
      if (which) *which = n.transition_name(t);
      return true;
    }
  }
  return false;
}

void require_no_neutral(const PetriNet& n, const std::string& builder) {
  auto neutral = neutral_transitions(n);
  if (!neutral.empty())
    throw PreconditionError(builder + ": neutral transition '" + n.transition_name(neutral.front()) + "' not allowed");
}

void require_same_places(const PetriNet& n1, const PetriNet& n2) {
  std::set<std::string> a(n1.places().begin(), n1.places().end());
  std::set<std::string> b(n2.places().begin(), n2.places().end());
  if (a != b || a.size() != n1.num_places() || b.size() != n2.num_places())
    throw PreconditionError("place mismatch: both nets must have the same place names");
}

// Shared skeleton of both union nets.
GadgetInstance union_skeleton(const PetriNet& n1_in, const PetriNet& n2_in, bool loop_branch) {
  require_same_places(n1_in, n2_in);
  GadgetInstance g;
  std::vector<std::string> removed1, removed2;
  PetriNet n1 = oracle::without_neutral(n1_in, &removed1);
  PetriNet n2 = oracle::without_neutral(n2_in, &removed2);
  for (const auto& t : removed1) g.notes.push_back("removed neutral transition '" + t + "' of the first net");
  for (const auto& t : removed2) g.notes.push_back("removed neutral transition '" + t + "' of the second net");

  PetriNet& out = g.net;
  out.set_name(loop_branch ? "union" : "star_union");
  for (const auto& p : n1.places()) out.add_place(p, 0);
  // Names checked against both sources so transition copies cannot collide.
  PetriNet names = out;
  for (const auto& t : n1.transitions()) names.add_transition("t1_" + t);
  for (const auto& t : n2.transitions()) names.add_transition("t2_" + t);
  auto fresh = [&](const std::string& stem) {
    std::string s = unused_name(names, stem);
    names.add_place(s);
    return s;
  };
  std::size_t init = out.add_place(fresh("ctl_init"), 1);
  std::size_t c1 = out.add_place(fresh("ctl_1"));
  std::size_t c2 = out.add_place(fresh("ctl_2"));
  std::size_t e1 = out.add_place(fresh("ctl_1_end"));
  std::size_t loop = 0;
  if (loop_branch) loop = out.add_place(fresh("ctl_1_loop"));
  std::size_t e2 = out.add_place(fresh("ctl_2_end"));

  auto start = [&](const PetriNet& src, std::size_t ctl, const std::string& stem) {
    std::size_t t = out.add_transition(fresh(stem));
    out.set_pre(t, init, 1);
    out.set_post(t, ctl, 1);
    for (std::size_t p = 0; p < src.num_places(); ++p)
      out.set_post(t, *out.place_index(src.place_name(p)), src.initial()[p]);
  };
  start(n1, c1, "choose_1");
  start(n2, c2, "choose_2");
  PlaceMap shared = identity_map(n1);
  for (std::size_t t = 0; t < n1.num_transitions(); ++t)
    self_loop(out, copy_transition(out, n1, t, "t1_" + n1.transition_name(t), shared), c1);
  for (std::size_t t = 0; t < n2.num_transitions(); ++t)
    self_loop(out, copy_transition(out, n2, t, "t2_" + n2.transition_name(t), shared), c2);
  auto move = [&](const std::string& stem, std::size_t from, std::optional<std::size_t> to) {
    std::size_t t = out.add_transition(fresh(stem));
    out.set_pre(t, from, 1);
    if (to) out.set_post(t, *to, 1);
    return t;
  };
  move("end_1", c1, e1);
  move("end_2", c2, e2);
  if (loop_branch) {
    move("loop_1", e1, loop);
    std::size_t spin = out.add_transition(fresh("spin"));
    self_loop(out, spin, loop);
  }
  move("halt_1", e1, std::nullopt);
  move("halt_2", e2, std::nullopt);

  g.place_map = {shared, identity_map(n2)};
  return g;
}

std::array<std::string, 3> cycle_names(const std::vector<const PetriNet*>& nets) {
  std::array<std::string, 3> out;
  PetriNet names;
  for (const auto* n : nets) {
    for (const auto& p : n->places())
      if (!names.place_index(p)) names.add_place(p);
    for (const auto& t : n->transitions())
      if (!names.transition_index(t)) names.add_transition(t);
  }
  for (int i = 0; i < 3; ++i) {
    out[i] = unused_name(names, "cyc" + std::to_string(i + 1));
    names.add_place(out[i]);
  }
  return out;
}

PetriNet augment_with(const PetriNet& n, const std::array<std::string, 3>& places) {
  require_no_neutral(n, "3-cycle augmentation");
  PetriNet out = n;
  std::array<std::size_t, 3> idx{};
  for (int i = 0; i < 3; ++i) idx[i] = out.add_place(places[i], i == 0 ? 1 : 0);
  for (int i = 0; i < 3; ++i) {
    std::size_t t = out.add_transition(unused_name(out, "rot" + std::to_string(i + 1)));
    out.set_pre(t, idx[i], 1);
    out.set_post(t, idx[(i + 1) % 3], 1);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- union nets

GadgetInstance build_union_net(const PetriNet& n1, const PetriNet& n2, UnionFormula formula) {
  GadgetInstance g = union_skeleton(n1, n2, true);
  g.kind = "union";
  g.oracle = "explicit comparison of both reachability sets";
  switch (formula) {
    case UnionFormula::Equality:
      g.formula = fixed_formula("union").formula;
      g.contract = "Reach(n1) = Reach(n2) iff the sentence holds on the union net";
      break;
    case UnionFormula::TwoVariable:
      g.kind = "union-two-var";
      g.formula = fixed_formula("union_two_var").formula;
      g.contract = "Reach(n1) = Reach(n2) iff the two-variable sentence holds on the union net";
      break;
    case UnionFormula::Positive:
      g.kind = "union-positive";
      g.formula = fixed_formula("union_positive").formula;
      g.contract = "Reach(n2) is a subset of Reach(n1) iff the positive sentence holds on the union net";
      g.oracle = "explicit inclusion of reachability sets";
      break;
    case UnionFormula::Forward:
      g.kind = "union-forward";
      g.formula = fixed_formula("union_forward").formula;
      g.contract = "Reach(n1) = Reach(n2) iff the forward sentence holds on the union net";
      break;
    case UnionFormula::Containment:
      g.kind = "union-containment";
      g.formula = fixed_formula("union_containment").formula;
      g.contract = "Reach(n1) is a subset of Reach(n2) iff the containment sentence holds on the union net";
      g.oracle = "explicit inclusion of reachability sets";
      break;
    case UnionFormula::Plus:
      g.kind = "union-plus";
      g.formula = fixed_formula("union_plus").formula;
      g.contract = "Reach(n1) = Reach(n2) iff the strict-reachability sentence holds on the union net";
      break;
    case UnionFormula::MlValidity:
      g.kind = "union-ml";
      g.formula = fixed_formula("union_ml").formula;
      g.mode = CheckMode::Validity;
      g.contract = "Reach(n1) = Reach(n2) iff the modal formula holds at every reachable marking of the union net";
      break;
  }
  return g;
}

GadgetInstance build_star_union_net(const PetriNet& n1, const PetriNet& n2) {
  GadgetInstance g = union_skeleton(n1, n2, false);
  g.kind = "star-union";
  g.formula = fixed_formula("union_star").formula;
  g.contract = "Reach(n1) = Reach(n2) iff the reachability sentence holds on the loop-free union net";
  g.oracle = "explicit comparison of both reachability sets";
  return g;
}

PetriNet build_lambda_augment(const PetriNet& n) { return augment_with(n, cycle_names({&n})); }

GadgetInstance build_lambda_union(const PetriNet& n1, const PetriNet& n2) {
  require_same_places(n1, n2);
  std::vector<std::string> removed1, removed2;
  PetriNet s1 = oracle::without_neutral(n1, &removed1);
  PetriNet s2 = oracle::without_neutral(n2, &removed2);
  auto names = cycle_names({&s1, &s2});
  GadgetInstance g = union_skeleton(augment_with(s1, names), augment_with(s2, names), true);
  for (const auto& t : removed1) g.notes.push_back("removed neutral transition '" + t + "' of the first net");
  for (const auto& t : removed2) g.notes.push_back("removed neutral transition '" + t + "' of the second net");
  for (auto& m : g.place_map)
    for (const auto& p : names) m.erase(p);
  g.kind = "union-lambda";
  g.formula = fixed_formula("union_lambda").formula;
  g.contract = "Reach(n1) = Reach(n2) iff the undirected sentence holds on the union of the 3-cycle augmented nets";
  g.oracle = "explicit comparison of both reachability sets";
  return g;
}

// ---------------------------------------------------------------- QBF

namespace {

PropPtr make_prop(Prop::Kind k, PropPtr a = nullptr, PropPtr b = nullptr, std::size_t var = 0) {
  return std::make_shared<const Prop>(Prop{k, var, std::move(a), std::move(b)});
}

class QbfParser {
 public:
  QbfParser(std::string_view text, Qbf& q) : ts_(text), q_(q) {}

  void run() {
    while (true) {
      bool universal;
      if (ts_.at_word("E") || ts_.at_word("exists"))
        universal = false;
      else if (ts_.at_word("A") || ts_.at_word("forall"))
        universal = true;
      else
        break;
      ts_.next();
      std::string v = ts_.expect_ident();
      if (std::find(q_.vars.begin(), q_.vars.end(), v) != q_.vars.end()) ts_.fail("variable '" + v + "' quantified twice");
      q_.vars.push_back(v);
      q_.universal.push_back(universal);
      ts_.accept_sym(".");
    }
    q_.matrix = iff();
    ts_.expect_end();
  }

 private:
  PropPtr iff() {
    auto l = implication();
    while (ts_.accept_sym("<=>")) l = make_prop(Prop::Kind::Iff, l, implication());
    return l;
  }
  PropPtr implication() {
    auto l = disjunction();
    if (ts_.accept_sym("=>")) return make_prop(Prop::Kind::Implies, l, implication());
    return l;
  }
  PropPtr disjunction() {
    auto l = conjunction();
    while (ts_.accept_sym("|")) l = make_prop(Prop::Kind::Or, l, conjunction());
    return l;
  }
  PropPtr conjunction() {
    auto l = unary();
    while (ts_.accept_sym("&")) l = make_prop(Prop::Kind::And, l, unary());
    return l;
  }
  PropPtr unary() {
    if (ts_.accept_sym("!")) return make_prop(Prop::Kind::Not, unary());
    if (ts_.accept_sym("(")) {
      auto p = iff();
      ts_.expect_sym(")");
      return p;
    }
    if (ts_.accept_word("true")) return make_prop(Prop::Kind::True);
    if (ts_.accept_word("false")) return make_prop(Prop::Kind::False);
    std::string v = ts_.expect_ident();
    auto it = std::find(q_.vars.begin(), q_.vars.end(), v);
    if (it == q_.vars.end()) throw UnboundVariableError("unquantified variable '" + v + "'");
    return make_prop(Prop::Kind::Var, nullptr, nullptr, static_cast<std::size_t>(it - q_.vars.begin()));
  }

  detail::TokenStream ts_;
  Qbf& q_;
};

int precedence(Prop::Kind k) {
  switch (k) {
    case Prop::Kind::Iff: return 0;
    case Prop::Kind::Implies: return 1;
    case Prop::Kind::Or: return 2;
    case Prop::Kind::And: return 3;
    default: return 4;
  }
}

std::string print_prop(const Qbf& q, const PropPtr& p, int outer) {
  std::string s;
  switch (p->kind) {
    case Prop::Kind::True: return "true";
    case Prop::Kind::False: return "false";
    case Prop::Kind::Var: return q.vars[p->var];
    case Prop::Kind::Not: return "!" + print_prop(q, p->lhs, 4);
    case Prop::Kind::And: s = print_prop(q, p->lhs, 3) + " & " + print_prop(q, p->rhs, 4); break;
    case Prop::Kind::Or: s = print_prop(q, p->lhs, 2) + " | " + print_prop(q, p->rhs, 3); break;
    case Prop::Kind::Implies: s = print_prop(q, p->lhs, 2) + " => " + print_prop(q, p->rhs, 1); break;
    case Prop::Kind::Iff: s = print_prop(q, p->lhs, 0) + " <=> " + print_prop(q, p->rhs, 1); break;
  }
  return precedence(p->kind) < outer ? paren(s) : s;
}

bool qbf_from(const Qbf& q, std::size_t i, std::vector<bool>& assignment) {
  if (i == q.vars.size()) return eval_prop(q.matrix, assignment);
  bool results[2];
  for (int v = 0; v < 2; ++v) {
    assignment[i] = v == 1;
    results[v] = qbf_from(q, i + 1, assignment);
  }
  return q.universal[i] ? results[0] && results[1] : results[0] || results[1];
}

Ml translate_prop(const PropPtr& p) {
  switch (p->kind) {
    case Prop::Kind::True: return ml::top();
    case Prop::Kind::False: return ml::bot();
    case Prop::Kind::Var: return ml::dia_n(p->var + 1, ml::box(ml::bot()));
    case Prop::Kind::Not: return ml::neg(translate_prop(p->lhs));
    case Prop::Kind::And: return ml::conj(translate_prop(p->lhs), translate_prop(p->rhs));
    case Prop::Kind::Or: return ml::disj(translate_prop(p->lhs), translate_prop(p->rhs));
    case Prop::Kind::Implies: return ml::implies(translate_prop(p->lhs), translate_prop(p->rhs));
    case Prop::Kind::Iff: {
      auto a = translate_prop(p->lhs), b = translate_prop(p->rhs);
      return ml::conj(ml::implies(a, b), ml::implies(b, a));
    }
  }
  throw Error("unreachable proposition kind");
}

}  // namespace

bool eval_prop(const PropPtr& p, const std::vector<bool>& a) {
  switch (p->kind) {
    case Prop::Kind::True: return true;
    case Prop::Kind::False: return false;
    case Prop::Kind::Var: return a.at(p->var);
    case Prop::Kind::Not: return !eval_prop(p->lhs, a);
    case Prop::Kind::And: return eval_prop(p->lhs, a) && eval_prop(p->rhs, a);
    case Prop::Kind::Or: return eval_prop(p->lhs, a) || eval_prop(p->rhs, a);
    case Prop::Kind::Implies: return !eval_prop(p->lhs, a) || eval_prop(p->rhs, a);
    case Prop::Kind::Iff: return eval_prop(p->lhs, a) == eval_prop(p->rhs, a);
  }
  return false;
}

Qbf parse_qbf(std::string_view text) {
  Qbf q;
  QbfParser(text, q).run();
  return q;
}

std::string to_string(const Qbf& q) {
  std::string out;
  for (std::size_t i = 0; i < q.vars.size(); ++i) out += std::string(q.universal[i] ? "A " : "E ") + q.vars[i] + " ";
  return out + paren(print_prop(q, q.matrix, 0));
}

bool qbf_truth(const Qbf& q) {
  std::vector<bool> assignment(q.vars.size(), false);
  return qbf_from(q, 0, assignment);
}

GadgetInstance build_qbf_net(const Qbf& q) {
  std::size_t k = q.vars.size();
  if (k == 0 || k % 2 != 0) throw PreconditionError("alternation shape: an even, nonzero number of variables is required");
  for (std::size_t i = 0; i < k; ++i)
    if (q.universal[i] != (i % 2 == 1))
      throw PreconditionError("alternation shape: quantifiers must alternate starting with an existential");
  GadgetInstance g;
  g.kind = "qbf";
  PetriNet& out = g.net;
  out.set_name("qbf");
  std::vector<std::size_t> ctl(k + 1), val(k), sel(k);
  for (std::size_t i = 0; i <= k; ++i) ctl[i] = out.add_place("c" + std::to_string(i), i == 0 ? 1 : 0);
  for (std::size_t i = 0; i < k; ++i) {
    val[i] = out.add_place("q" + std::to_string(i + 1));
    sel[i] = out.add_place("q" + std::to_string(i + 1) + "_sel");
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::string n = std::to_string(i + 1);
    std::size_t set = out.add_transition("set" + n);
    out.set_pre(set, ctl[i], 1);
    out.set_post(set, ctl[i + 1], 1);
    out.set_post(set, val[i], i + 1);
    std::size_t skip = out.add_transition("skip" + n);
    out.set_pre(skip, ctl[i], 1);
    out.set_post(skip, ctl[i + 1], 1);
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::string n = std::to_string(i + 1);
    std::size_t pick = out.add_transition("pick" + n);
    out.set_pre(pick, ctl[k], 1);
    out.set_pre(pick, val[i], 1);
    out.set_post(pick, sel[i], 1);
    std::size_t drain = out.add_transition("drain" + n);
    self_loop(out, drain, sel[i]);
    out.set_pre(drain, val[i], 1);
  }
  Ml f = translate_prop(q.matrix);
  for (std::size_t i = 0; i < k / 2; ++i) f = ml::dia(ml::box(f));
  g.formula.ml = f;
  g.contract = "the formula holds at the initial marking iff the QBF " + to_string(q) + " is true";
  g.oracle = "brute-force QBF evaluation";
  for (std::size_t i = 0; i < k; ++i) g.notes.push_back("variable " + q.vars[i] + " is q" + std::to_string(i + 1));
  return g;
}

// ---------------------------------------------------------------- hardness gadgets

GadgetInstance build_reach_gadget(const PetriNet& n, const Marking& m1, const Marking& m2) {
  if (m1.size() != n.num_places() || m2.size() != n.num_places())
    throw DimensionError("marking length differs from the place count");
  bool any = false;
  for (std::size_t t = 0; t < n.num_transitions(); ++t) any = any || enabled(n, m1, t);
  if (!any) throw PreconditionError("reach gadget: the source marking enables no transition");
  if (m1 == m2) throw PreconditionError("reach gadget: source and target markings coincide");
  std::string which;
  if (has_empty_preset(n, &which)) throw PreconditionError("reach gadget: transition '" + which + "' has an empty preset");

  GadgetInstance g;
  g.kind = "reach";
  PetriNet& out = g.net;
  out.set_name("reach");
  for (const auto& p : n.places()) out.add_place(p, 0);
  PetriNet names = n;
  auto fresh = [&](const std::string& stem) {
    std::string s = unused_name(names, stem);
    names.add_place(s);
    return s;
  };
  std::size_t idle = out.add_place(fresh("idle"), 1);
  std::size_t sim = out.add_place(fresh("sim"));
  std::size_t win = out.add_place(fresh("win"));
  std::size_t stopped = out.add_place(fresh("stopped"));
  PlaceMap same = identity_map(n);
  for (std::size_t t = 0; t < n.num_transitions(); ++t)
    self_loop(out, copy_transition(out, n, t, n.transition_name(t), same), sim);
  std::size_t t_try = out.add_transition(fresh("try"));
  out.set_pre(t_try, idle, 1);
  out.set_post(t_try, win, 1);
  std::size_t load = out.add_transition(fresh("load"));
  out.set_pre(load, idle, 1);
  out.set_post(load, sim, 1);
  for (std::size_t p = 0; p < n.num_places(); ++p) out.set_post(load, p, m1[p]);
  std::size_t stop = out.add_transition(fresh("stop"));
  out.set_pre(stop, sim, 1);
  for (std::size_t p = 0; p < n.num_places(); ++p) out.set_pre(stop, p, m2[p]);
  out.set_post(stop, stopped, 1);
  std::size_t t_win = out.add_transition(fresh("finish"));
  out.set_pre(t_win, stopped, 1);
  out.set_post(t_win, win, 1);

  g.formula = fixed_formula("reach_witness").formula;
  g.contract = "the target marking is reachable from the source marking iff the formula holds at the initial marking";
  g.oracle = "explicit reachability from the source marking";
  g.place_map = {same};
  g.notes.push_back("stop consumes exactly the target marking; leftover tokens keep the win marking distinct from the one try produces");
  return g;
}

GadgetInstance build_nonreach_gadget(const PetriNet& n) {
  std::string which;
  if (has_empty_preset(n, &which))
    throw PreconditionError("nonreach gadget: transition '" + which + "' has an empty preset");
  GadgetInstance g;
  g.kind = "nonreach";
  g.net = n;
  g.net.set_name("nonreach");
  for (std::size_t p = 0; p < n.num_places(); ++p)
    self_loop(g.net, g.net.add_transition(unused_name(g.net, "witness_" + n.place_name(p))), p);
  g.formula = fixed_formula("always_enabled").formula;
  g.mode = CheckMode::Validity;
  g.contract = "the zero marking is unreachable iff some transition is enabled at every reachable marking";
  g.oracle = "explicit membership of the zero marking";
  g.place_map = {identity_map(n)};
  return g;
}

GadgetInstance build_fo1_gadget(const PetriNet& n) { return build_budget_reduction(n).instance; }

BudgetReduction build_budget_reduction(const PetriNet& n) {
  require_no_neutral(n, "budget reduction");
  BudgetReduction r;
  PetriNet& tracked = r.tracked;
  tracked = n;
  tracked.set_name("budget");
  Tokens total = 0;
  for (Tokens v : n.initial()) total = checked_add(total, v);
  std::size_t b = tracked.add_place(unused_name(n, "budget"), total);
  for (std::size_t t = 0; t < n.num_transitions(); ++t) {
    Weight in = 0, out = 0;
    for (std::size_t p = 0; p < n.num_places(); ++p) {
      in = checked_add(in, n.pre(t, p));
      out = checked_add(out, n.post(t, p));
    }
    tracked.set_pre(t, b, in);
    tracked.set_post(t, b, out);
  }
  GadgetInstance& g = r.instance;
  g.kind = "budget";
  g.net = tracked;
  self_loop(g.net, g.net.add_transition(unused_name(g.net, "idle")), b);
  g.formula = fixed_formula("some_deadlock").formula;
  g.contract = "the zero marking is reachable iff some reachable marking lacks a self-loop";
  g.oracle = "explicit membership of the zero marking";
  g.place_map = {identity_map(n)};
  return r;
}

// ---------------------------------------------------------------- drowning

namespace {

void collect_vars(const Fo& f, std::set<std::string>& out) {
  if (!f) return;
  if (!f->x.empty()) out.insert(f->x);
  if (!f->y.empty()) out.insert(f->y);
  collect_vars(f->lhs, out);
  collect_vars(f->rhs, out);
}

std::string fresh_var(const std::set<std::string>& used, const std::string& stem) {
  std::string v = stem;
  while (used.count(v)) v += "'";
  return v;
}

void require_sentence(const Fo& f) {
  if (!f) throw PreconditionError("no sentence supplied");
  if (!is_sentence(f)) throw UnboundVariableError("the formula to transform must be a sentence");
}

}  // namespace

Fo drown_formula(const Fo& sentence) {
  require_sentence(sentence);
  std::set<std::string> used;
  collect_vars(sentence, used);
  std::string x0 = fresh_var(used, "x0"), x1 = fresh_var(used, "x1");
  return fo::exists({x0, x1}, fo::conj({fo::init(x0), fo::edge(x0, x1), fo::neg(fo::star(x1, x0)),
                                        relativize(sentence, x1, GuardPredicate::Star)}));
}

Fo drown_variant_formula(const Fo& sentence) {
  require_sentence(sentence);
  std::set<std::string> used;
  collect_vars(sentence, used);
  std::string pre = fresh_var(used, "x0'");
  used.insert(pre);
  std::string x0 = fresh_var(used, "x0"), x1 = fresh_var(used, "x1"), y = fresh_var(used, "y");
  return fo::exists({pre, x0, x1},
                    fo::conj({fo::neg(fo::exists(y, fo::edge(y, pre))), fo::edge(pre, x0), fo::edge(x0, x1),
                              fo::neg(fo::star(x1, x0)), relativize(sentence, x1, GuardPredicate::Star)}));
}

DrownGadget build_drown_net(const PetriNet& n, const Fo& sentence) {
  DrownGadget d;
  GadgetInstance& g = d.instance;
  g.kind = "drown";
  PetriNet& out = g.net;
  out.set_name("drown");
  for (std::size_t p = 0; p < n.num_places(); ++p) out.add_place(n.place_name(p), n.initial()[p]);
  PetriNet names = n;
  auto fresh = [&](const std::string& stem) {
    std::string s = unused_name(names, stem);
    names.add_place(s);
    return s;
  };
  std::size_t start = out.add_place(fresh("start"), 1);
  std::size_t sim = out.add_place(fresh("sim"), 1);
  std::size_t edit = out.add_place(fresh("edit"), 0);
  PlaceMap same = identity_map(n);
  for (std::size_t t = 0; t < n.num_transitions(); ++t)
    self_loop(out, copy_transition(out, n, t, n.transition_name(t), same), sim);
  for (std::size_t p = 0; p < n.num_places(); ++p) {
    std::size_t inc = out.add_transition(fresh("inc_" + n.place_name(p)));
    self_loop(out, inc, edit);
    out.set_post(inc, p, 1);
    std::size_t dec = out.add_transition(fresh("dec_" + n.place_name(p)));
    self_loop(out, dec, edit);
    out.set_pre(dec, p, 1);
  }
  std::size_t to_edit = out.add_transition(fresh("to_edit"));
  out.set_pre(to_edit, sim, 1);
  out.set_post(to_edit, edit, 1);
  self_loop(out, to_edit, start);
  std::size_t to_sim = out.add_transition(fresh("to_sim"));
  out.set_pre(to_sim, edit, 1);
  out.set_post(to_sim, sim, 1);
  std::size_t forget = out.add_transition(fresh("forget"));
  out.set_pre(forget, start, 1);

  d.variant = out;
  d.variant.set_name("drown_variant");
  std::size_t pre = d.variant.add_place(unused_name(names, "pre"), 1);
  d.variant.set_initial(start, 0);
  d.variant.set_initial(sim, 0);
  std::size_t boot = d.variant.add_transition(unused_name(d.variant, "boot"));
  d.variant.set_pre(boot, pre, 1);
  d.variant.set_post(boot, start, 1);
  d.variant.set_post(boot, sim, 1);

  if (sentence) g.formula.fo = drown_formula(sentence);
  g.contract = "the sentence holds on the reachability graph of n iff its drowned form holds on the drown net; "
               "Reach = {start <= 1, sim + edit = 1} x N^places";
  g.oracle = "explicit evaluation on the source net against lazy guarded evaluation on the drown net";
  g.place_map = {same};
  return d;
}

// ---------------------------------------------------------------- transition graph

UgGadget build_ug_gadget(const PetriNet& n) {
  UgGadget u;
  PetriNet& looped = u.looped;
  looped = n;
  looped.set_name("looped");
  std::size_t lock = looped.add_place(unused_name(n, "lock"), 1);
  for (std::size_t t = 0; t < n.num_transitions(); ++t) self_loop(looped, t, lock);
  for (std::size_t p = 0; p < looped.num_places(); ++p)
    self_loop(looped, looped.add_transition(unused_name(looped, "witness_" + looped.place_name(p))), p);

  GadgetInstance& g = u.instance;
  g.kind = "ug";
  PetriNet& out = g.net;
  out.set_name("ug");
  std::string seed_name = unused_name(looped, "seed");
  std::size_t seed = out.add_place(seed_name, 1);
  for (const auto& p : looped.places()) out.add_place(p, 0);
  PlaceMap shift = identity_map(looped);
  for (std::size_t t = 0; t < looped.num_transitions(); ++t)
    copy_transition(out, looped, t, looped.transition_name(t), shift);
  std::size_t drop = out.add_transition(unused_name(out, "drop"));
  out.set_pre(drop, seed, 1);
  std::size_t load = out.add_transition(unused_name(out, "load"));
  out.set_pre(load, seed, 1);
  for (std::size_t p = 0; p < looped.num_places(); ++p) out.set_post(load, p + 1, looped.initial()[p]);

  g.formula.fo = formulas::initial_marker("x");
  g.structure = Structure::Ug;
  g.at = out.initial();
  u.loaded = formulas::loaded_marker("x");
  u.loaded_marking = fire(out, out.initial(), load);
  g.contract = "over all markings, the initial-marker formula holds exactly at the marking with one seed token";
  g.oracle = "pointwise guarded evaluation over a box of markings";
  g.place_map = {identity_map(n)};
  return u;
}

PileupGadget build_pileup(const PetriNet& n1, const PetriNet& n2) {
  PileupGadget pg;
  pg.star_union = build_star_union_net(n1, n2).net;
  pg.drowned = build_drown_net(pg.star_union).instance.net;
  UgGadget ug = build_ug_gadget(pg.drowned);
  pg.first_step = formulas::first_step("x", "y");
  pg.drowned_start = pg.drowned.initial();
  pg.drowned_entry = fire(pg.drowned, pg.drowned_start, pg.drowned.require_transition("forget"));

  GadgetInstance& g = pg.instance;
  g = ug.instance;
  g.kind = "pileup";
  g.at.reset();
  Fo inner = fixed_fo("union_star_symmetric");
  std::set<std::string> used;
  collect_vars(inner, used);
  std::string x0 = fresh_var(used, "x0"), x1 = fresh_var(used, "x1");
  g.formula.fo = fo::exists({x0, x1}, fo::conj({formulas::loaded_marker(x0, "v"), fo::edge(x0, x1),
                                                fo::neg(fo::star(x1, x0)),
                                                relativize(inner, x1, GuardPredicate::Star)}));
  g.contract = "documentation only: Reach(n1) = Reach(n2) iff the assembled sentence holds over all markings of the final net";
  g.oracle = "none; structural checks of each stage";
  g.place_map = {identity_map(n1), identity_map(n2)};
  g.notes.push_back("stages: loop-free union, drown net, transition-graph wrapper");
  return pg;
}

// ---------------------------------------------------------------- oracles

namespace oracle {

std::optional<std::vector<Marking>> reach_set(const PetriNet& n, std::size_t cap) {
  auto g = explore(n, cap);
  if (!g.complete) return std::nullopt;
  auto nodes = g.nodes;
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

std::optional<bool> reach_subset(const PetriNet& a, const PetriNet& b, std::size_t cap) {
  auto ra = reach_set(a, cap), rb = reach_set(b, cap);
  if (!ra || !rb) return std::nullopt;
  if (a.places() != b.places()) {
    // Reorder b's markings into a's place order.
    for (auto& m : *rb) {
      Marking r(a.num_places());
      for (std::size_t p = 0; p < b.num_places(); ++p) r[*a.place_index(b.place_name(p))] = m[p];
      m = r;
    }
    std::sort(rb->begin(), rb->end());
  }
  return std::includes(rb->begin(), rb->end(), ra->begin(), ra->end());
}

std::optional<bool> reach_equal(const PetriNet& a, const PetriNet& b, std::size_t cap) {
  auto ab = reach_subset(a, b, cap);
  if (!ab) return std::nullopt;
  if (!*ab) return false;
  return reach_subset(b, a, cap);
}

PetriNet without_neutral(const PetriNet& n, std::vector<std::string>* removed) {
  auto neutral = neutral_transitions(n);
  if (neutral.empty()) return n;
  PetriNet out(n.name());
  for (std::size_t p = 0; p < n.num_places(); ++p) out.add_place(n.place_name(p), n.initial()[p]);
  PlaceMap same = identity_map(n);
  for (std::size_t t = 0; t < n.num_transitions(); ++t) {
    if (std::binary_search(neutral.begin(), neutral.end(), t)) {
      if (removed) removed->push_back(n.transition_name(t));
      continue;
    }
    copy_transition(out, n, t, n.transition_name(t), same);
  }
  return out;
}

}  // namespace oracle

namespace {

std::optional<bool> zero_unreachable(const PetriNet& n, std::size_t cap) {
  auto v = reachable(n, Marking(n.num_places(), 0), cap);
  if (!v.definitive()) return std::nullopt;
  return v.no();
}

}  // namespace

std::optional<bool> expected_verdict(const GadgetInstance& g, const GadgetSources& src, std::size_t cap) {
  const std::string& k = g.kind;
  auto need = [&](std::size_t count) {
    if (src.nets.size() < count) throw PreconditionError("gadget '" + k + "' needs " + std::to_string(count) + " source nets");
  };
  if (k == "union-positive") {
    need(2);
    return oracle::reach_subset(src.nets[1], src.nets[0], cap);
  }
  if (k == "union-containment") {
    need(2);
    return oracle::reach_subset(src.nets[0], src.nets[1], cap);
  }
  if (k.rfind("union", 0) == 0 || k == "star-union") {
    need(2);
    return oracle::reach_equal(src.nets[0], src.nets[1], cap);
  }
  if (k == "qbf") {
    if (!src.qbf) throw PreconditionError("qbf gadget needs its QBF");
    return qbf_truth(*src.qbf);
  }
  if (k == "reach") {
    need(1);
    if (!src.m1 || !src.m2) throw PreconditionError("reach gadget needs both markings");
    PetriNet from = src.nets[0];
    from.set_initial(*src.m1);
    auto v = reachable(from, *src.m2, cap);
    if (!v.definitive()) return std::nullopt;
    return v.yes();
  }
  if (k == "nonreach") {
    need(1);
    return zero_unreachable(src.nets[0], cap);
  }
  if (k == "budget") {
    need(1);
    auto z = zero_unreachable(src.nets[0], cap);
    if (!z) return std::nullopt;
    return !*z;
  }
  if (k == "drown") {
    need(1);
    if (!src.sentence) return std::nullopt;
    auto graph = explore(src.nets[0], cap);
    if (!graph.complete) return std::nullopt;
    return explicit_fo(graph, src.sentence).is_holds();
  }
  if (k == "ug") return true;
  return std::nullopt;
}

}  // namespace pnmc
