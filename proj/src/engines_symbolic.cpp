#include <algorithm>
#include <functional>

#include "compiled_fo.hpp"
#include "pnmc/engines.hpp"
#include "pnmc/errors.hpp"

namespace pnmc {

namespace {

using detail::CNode;
using detail::CompiledFo;

CheckVerdict from_reach(const ReachVerdict& v, const char* engine, bool reachable_means_holds,
                        const std::function<std::string(const Marking&)>& describe) {
  if (!v.definitive()) return CheckVerdict::inconclusive(engine, v.reason.empty() ? "reachability-unknown" : v.reason);
  std::string witness = v.yes() && v.marking ? describe(*v.marking) : std::string{};
  return CheckVerdict::of(v.yes() == reachable_means_holds, engine, witness);
}

std::string plain_marking(const Marking& m) { return format_marking(m); }

}  // namespace

// ---------------------------------------------------------------- PAML validity

Pres paml_sat_set(const PetriNet& net, const Ml& f) {
  if (has_inverse(f)) throw FragmentError("inverse modalities are not supported by this engine");
  check_places(f, net);
  auto rec = [&](auto&& self, const Ml& h) -> Pres {
    switch (h->kind) {
      case MlKind::Top: return pa::truth();
      case MlKind::Bot: return pa::falsity();
      case MlKind::Atom: return to_presburger(h->atom);
      case MlKind::Not: return pa::neg(self(self, h->lhs));
      case MlKind::And: return pa::conj(self(self, h->lhs), self(self, h->rhs));
      case MlKind::Or: return pa::disj(self(self, h->lhs), self(self, h->rhs));
      case MlKind::Implies: return pa::implies(self(self, h->lhs), self(self, h->rhs));
      case MlKind::Dia: return pre_image(net, self(self, h->lhs));
      case MlKind::Box: return box_set(net, self(self, h->lhs));
      default: throw FragmentError("inverse modalities are not supported by this engine");
    }
  };
  auto vars = place_vars(net);
  return pa::conj(pa::naturals(vars), rec(rec, f));
}

CheckVerdict val_paml_forward(const PetriNet& net, const Ml& f, const EngineOptions& opts) {
  const char* name = "val_paml_forward";
  Pres bad = paml_sat_set(net, ml::neg(f));
  try {
    return from_reach(reach_semilinear(net, bad, opts.cap, opts.qe), name, false, plain_marking);
  } catch (const ResourceExceeded&) {
    return CheckVerdict::inconclusive(name, "budget-exceeded");
  }
}

// ---------------------------------------------------------------- existential FO

namespace {

bool only_edge_eq(const FragmentReport& r) {
  return std::all_of(r.predicates_used.begin(), r.predicates_used.end(),
                     [](Predicate p) { return p == Predicate::Edge || p == Predicate::Eq; });
}

bool existential_combination_rec(const Fo& f) {
  switch (f->kind) {
    case FoKind::True:
    case FoKind::False: return true;
    case FoKind::Not: return existential_combination_rec(f->lhs);
    case FoKind::And:
    case FoKind::Or:
    case FoKind::Implies: return existential_combination_rec(f->lhs) && existential_combination_rec(f->rhs);
    case FoKind::Forall:
    case FoKind::Exists: return classify(f).is_existential;
    default: return false;  // an atom outside every quantifier cannot occur in a sentence
  }
}

std::vector<std::string> copy_vars(const PetriNet& net, int slot) {
  std::vector<std::string> out;
  for (const auto& p : net.places()) out.push_back("c" + std::to_string(slot) + "_" + p);
  return out;
}

// Matrix of a prenexed existential sentence; each binder slot is one copy.
Pres existential_matrix(const PetriNet& net, const CompiledFo& c, int i) {
  const CNode& n = c.nodes[i];
  switch (n.kind) {
    case FoKind::True: return pa::truth();
    case FoKind::False: return pa::falsity();
    case FoKind::Edge: return edge_formula(net, copy_vars(net, n.a), copy_vars(net, n.b));
    case FoKind::Eq: return vectors_equal(copy_vars(net, n.a), copy_vars(net, n.b));
    case FoKind::Not: return pa::neg(existential_matrix(net, c, n.lhs));
    case FoKind::And: return pa::conj(existential_matrix(net, c, n.lhs), existential_matrix(net, c, n.rhs));
    case FoKind::Or: return pa::disj(existential_matrix(net, c, n.lhs), existential_matrix(net, c, n.rhs));
    case FoKind::Implies:
      return pa::implies(existential_matrix(net, c, n.lhs), existential_matrix(net, c, n.rhs));
    case FoKind::Forall:
    case FoKind::Exists: return existential_matrix(net, c, n.lhs);
    default: throw FragmentError("predicate outside {->, =}");
  }
}

CheckVerdict solve_existential(const PetriNet& net, const Fo& f, const EngineOptions& opts) {
  const char* name = "mc_exists_fo";
  auto c = detail::FoCompiler::run(f, {});
  // Binder slots are distinct, so every binder can be pulled to the front.
  const std::size_t copies = c.slots();
  PetriNet product = product_net(net, copies);
  Pres matrix = existential_matrix(net, c, c.root);
  auto describe = [&](const Marking& m) {
    std::string s;
    for (std::size_t k = 0; k < copies; ++k) {
      if (k) s += ';';
      auto first = m.begin() + static_cast<std::ptrdiff_t>(k * net.num_places());
      s += c.slot_names[k] + "=" + format_marking(Marking(first, first + static_cast<std::ptrdiff_t>(net.num_places())));
    }
    return s;
  };
  try {
    return from_reach(reach_semilinear(product, matrix, opts.cap, opts.qe), name, true, describe);
  } catch (const ResourceExceeded&) {
    return CheckVerdict::inconclusive(name, "budget-exceeded");
  }
}

CheckVerdict exists_combination(const PetriNet& net, const Fo& f, const EngineOptions& opts) {
  const char* name = "mc_exists_fo";
  switch (f->kind) {
    case FoKind::True: return CheckVerdict::holds(name);
    case FoKind::False: return CheckVerdict::fails(name);
    case FoKind::Not: return exists_combination(net, f->lhs, opts).negated();
    case FoKind::And:
    case FoKind::Or:
    case FoKind::Implies: {
      // Short-circuit on the left operand when it settles the result.
      auto a = exists_combination(net, f->lhs, opts);
      if (f->kind == FoKind::Implies) a = a.negated();
      bool settles_on = f->kind != FoKind::And;  // Or/Implies settle on true, And on false
      if (a.definitive() && a.is_holds() == settles_on) return CheckVerdict::of(settles_on, name, a.witness);
      auto b = exists_combination(net, f->rhs, opts);
      if (b.definitive() && b.is_holds() == settles_on) return CheckVerdict::of(settles_on, name, b.witness);
      if (!a.definitive()) return a;
      if (!b.definitive()) return b;
      return CheckVerdict::of(!settles_on, name);
    }
    default: return solve_existential(net, f, opts);
  }
}

}  // namespace

bool is_existential_combination(const Fo& f) {
  return is_sentence(f) && only_edge_eq(classify(f)) && existential_combination_rec(f);
}

PetriNet product_net(const PetriNet& net, std::size_t copies) {
  PetriNet out(net.name() + "_x" + std::to_string(copies));
  for (std::size_t k = 0; k < copies; ++k) {
    auto names = copy_vars(net, static_cast<int>(k));
    for (std::size_t p = 0; p < net.num_places(); ++p) out.add_place(names[p], net.initial()[p]);
  }
  for (std::size_t k = 0; k < copies; ++k)
    for (std::size_t t = 0; t < net.num_transitions(); ++t) {
      auto u = out.add_transition("c" + std::to_string(k) + "_" + net.transition_name(t));
      for (std::size_t p = 0; p < net.num_places(); ++p) {
        out.set_pre(u, k * net.num_places() + p, net.pre(t, p));
        out.set_post(u, k * net.num_places() + p, net.post(t, p));
      }
    }
  return out;
}

CheckVerdict mc_exists_fo(const PetriNet& net, const Fo& f, const EngineOptions& opts) {
  if (!is_existential_combination(f))
    throw FragmentError("not a Boolean combination of existential sentences over {->, =}");
  return exists_combination(net, f, opts);
}

// ---------------------------------------------------------------- one variable

namespace {

class OneVar {
 public:
  OneVar(const PetriNet& net, const EngineOptions& opts) : net_(net), opts_(opts) {}

  Truth closed(const Fo& f) {
    switch (f->kind) {
      case FoKind::True: return Truth::True;
      case FoKind::False: return Truth::False;
      case FoKind::Not: return truth_not(closed(f->lhs));
      case FoKind::And: return truth_and(closed(f->lhs), closed(f->rhs));
      case FoKind::Or: return truth_or(closed(f->lhs), closed(f->rhs));
      case FoKind::Implies: return truth_or(truth_not(closed(f->lhs)), closed(f->rhs));
      case FoKind::Exists:
      case FoKind::Forall: {
        // The body is a Boolean function of the loop atom and closed parts.
        Truth with_loop = body(f->lhs, Truth::True);
        Truth without_loop = body(f->lhs, Truth::False);
        if (f->kind == FoKind::Exists) {
          Truth a = with_loop == Truth::False ? Truth::False : truth_and(with_loop, some_loop());
          if (a == Truth::True) return a;
          Truth b = without_loop == Truth::False ? Truth::False : truth_and(without_loop, some_loopless());
          return truth_or(a, b);
        }
        Truth a = with_loop == Truth::True ? Truth::True : truth_or(with_loop, truth_not(some_loop()));
        if (a == Truth::False) return a;
        Truth b = without_loop == Truth::True ? Truth::True : truth_or(without_loop, truth_not(some_loopless()));
        return truth_and(a, b);
      }
      default: throw FragmentError("atom outside the scope of its variable");
    }
  }

 private:
  const PetriNet& net_;
  const EngineOptions& opts_;
  std::optional<Truth> some_loop_;
  std::optional<Truth> some_loopless_;

  Truth body(const Fo& f, Truth loop) {
    switch (f->kind) {
      case FoKind::Edge: return loop;
      case FoKind::Not: return truth_not(body(f->lhs, loop));
      case FoKind::And: return truth_and(body(f->lhs, loop), body(f->rhs, loop));
      case FoKind::Or: return truth_or(body(f->lhs, loop), body(f->rhs, loop));
      case FoKind::Implies: return truth_or(truth_not(body(f->lhs, loop)), body(f->rhs, loop));
      default: return closed(f);
    }
  }

  // Exists x. x -> x: some neutral transition's guard is coverable.
  Truth some_loop() {
    if (!some_loop_) {
      some_loop_ = Truth::False;
      for (auto t : neutral_transitions(net_)) {
        Marking guard(net_.pre(t).begin(), net_.pre(t).end());
        if (coverable(net_, guard).yes()) {
          some_loop_ = Truth::True;
          break;
        }
      }
    }
    return *some_loop_;
  }

  // Exists x. !(x -> x): a reachable marking enables no neutral transition.
  Truth some_loopless() {
    if (!some_loopless_) {
      auto vars = place_vars(net_);
      std::vector<Pres> disabled_all;
      for (auto t : neutral_transitions(net_)) {
        std::vector<Pres> disabled;
        for (std::size_t p = 0; p < net_.num_places(); ++p)
          if (net_.pre(t, p) > 0)
            disabled.push_back(pa::lt(LinTerm::var(vars[p]), LinTerm::num(BigInt(net_.pre(t, p)))));
        disabled_all.push_back(pa::disj(std::move(disabled)));
      }
      Pres zone = pa::conj(std::move(disabled_all));
      try {
        auto v = reach_semilinear(net_, zone, opts_.cap, opts_.qe);
        some_loopless_ = v.definitive() ? truth_of(v.yes()) : Truth::Unknown;
      } catch (const ResourceExceeded&) {
        some_loopless_ = Truth::Unknown;
      }
    }
    return *some_loopless_;
  }
};

}  // namespace

CheckVerdict mc_fo_one_var(const PetriNet& net, const Fo& f, const EngineOptions& opts) {
  const char* name = "mc_fo_one_var";
  auto r = classify(f);
  if (!is_sentence(f)) throw UnboundVariableError("one-variable engine needs a sentence");
  if (r.variable_count > 1) throw FragmentError("more than one variable name");
  for (auto p : r.predicates_used)
    if (p != Predicate::Edge) throw FragmentError(std::string("predicate ") + predicate_symbol(p) + " is not ->");
  Truth t = OneVar(net, opts).closed(f);
  if (t == Truth::Unknown) return CheckVerdict::inconclusive(name, "reachability-unknown");
  return CheckVerdict::of(t == Truth::True, name);
}

// ---------------------------------------------------------------- Presburger translation

namespace {

struct Translation {
  const PetriNet& net;
  const CompiledFo& c;
  std::optional<Pres> reach;
  std::optional<Pres> star;
  std::optional<Pres> plus;
  std::vector<std::string> places;
  std::vector<std::string> targets;

  std::vector<std::string> vars(int slot) const { return prefixed("s" + std::to_string(slot), places); }

  Pres relation(const Pres& r, int a, int b) const {
    std::vector<std::string> from = places;
    from.insert(from.end(), targets.begin(), targets.end());
    auto to = vars(a);
    auto vb = vars(b);
    to.insert(to.end(), vb.begin(), vb.end());
    return rename(r, from, to);
  }

  Pres run(int i) const {
    const CNode& n = c.nodes[i];
    switch (n.kind) {
      case FoKind::True: return pa::truth();
      case FoKind::False: return pa::falsity();
      case FoKind::Edge: return edge_formula(net, vars(n.a), vars(n.b));
      case FoKind::Eq: return vectors_equal(vars(n.a), vars(n.b));
      case FoKind::Init: return marking_equals(vars(n.a), net.initial());
      case FoKind::Star:
        if (!star) throw FragmentError("->* needs a star formula");
        return relation(*star, n.a, n.b);
      case FoKind::Plus:
        if (!plus) throw FragmentError("->+ needs a star formula");
        return relation(*plus, n.a, n.b);
      case FoKind::Not: return pa::neg(run(n.lhs));
      case FoKind::And: return pa::conj(run(n.lhs), run(n.rhs));
      case FoKind::Or: return pa::disj(run(n.lhs), run(n.rhs));
      case FoKind::Implies: return pa::implies(run(n.lhs), run(n.rhs));
      case FoKind::Forall:
      case FoKind::Exists: {
        auto vs = vars(n.a);
        Pres body = run(n.lhs);
        if (reach) {
          Pres here = rename(*reach, places, vs);
          body = n.kind == FoKind::Forall ? pa::implies(here, body) : pa::conj(here, body);
        }
        return n.kind == FoKind::Forall ? pa::forall_nat(vs, body) : pa::exists_nat(vs, body);
      }
    }
    return pa::truth();
  }
};

void require_vars(const Pres& f, const std::set<std::string>& allowed, const char* what) {
  for (const auto& v : free_vars(f))
    if (!allowed.count(v)) throw SemanticError(std::string(what) + " mentions an unknown variable", v);
}

}  // namespace

CheckVerdict mc_fo_ug(const PetriNet& net, const Fo& f, const EngineOptions& opts) {
  const char* name = "mc_fo_ug";
  if (!is_sentence(f)) throw UnboundVariableError("unbound variable '" + *free_vars(f).begin() + "'");
  for (auto p : classify(f).predicates_used)
    if (p == Predicate::Star || p == Predicate::Plus)
      throw FragmentError(std::string("predicate ") + predicate_symbol(p) + " is not supported over the transition graph");
  auto c = detail::FoCompiler::run(f, {});
  auto places = place_vars(net);
  Translation tr{net, c, {}, {}, {}, places, primed(places)};
  try {
    return CheckVerdict::of(decide(tr.run(c.root), opts.qe), name);
  } catch (const ResourceExceeded&) {
    return CheckVerdict::inconclusive(name, "budget-exceeded");
  }
}

CheckVerdict mc_fo_semilinear(const PetriNet& net, const Fo& f, const SideInputs& side, const EngineOptions& opts) {
  const char* name = "mc_fo_semilinear";
  if (!side.reach) throw PreconditionError("the semilinear engine needs a reach formula");
  if (!is_sentence(f)) throw UnboundVariableError("unbound variable '" + *free_vars(f).begin() + "'");
  auto places = place_vars(net);
  auto targets = primed(places);
  std::set<std::string> allowed(places.begin(), places.end());
  require_vars(*side.reach, allowed, "reach formula");
  auto preds = classify(f).predicates_used;
  bool needs_star = preds.count(Predicate::Star) || preds.count(Predicate::Plus);
  if (needs_star && !side.star) throw PreconditionError("formula uses ->* or ->+ but no star formula was supplied");
  auto c = detail::FoCompiler::run(f, {});
  Translation tr{net, c, side.reach, {}, {}, places, targets};
  try {
    if (needs_star) {
      allowed.insert(targets.begin(), targets.end());
      require_vars(*side.star, allowed, "star formula");
      tr.star = side.star;
      if (preds.count(Predicate::Plus)) tr.plus = compose_relations(edge_formula(net), *side.star, places, targets, opts.qe);
    }
    return CheckVerdict::of(decide(tr.run(c.root), opts.qe), name);
  } catch (const ResourceExceeded&) {
    return CheckVerdict::inconclusive(name, "budget-exceeded");
  }
}

std::string verify_side_inputs(const PetriNet& net, const SideInputs& side, std::size_t cap) {
  auto g = explore(net, cap);
  auto places = place_vars(net);
  if (side.reach) {
    PointEvaluator in_reach(*side.reach, places);
    for (const auto& m : g.nodes)
      if (!in_reach(m)) return "reach formula rejects reachable marking " + format_marking(m);
    if (g.complete) {
      // Sample a box just beyond the explored markings.
      Marking top(net.num_places(), 0);
      for (const auto& m : g.nodes)
        for (std::size_t p = 0; p < m.size(); ++p) top[p] = std::max(top[p], m[p] + 1);
      Marking m(net.num_places(), 0);
      for (std::size_t budget = 4096; budget > 0; --budget) {
        if (!g.find(m) && in_reach(m)) return "reach formula accepts unreachable marking " + format_marking(m);
        std::size_t p = 0;
        while (p < m.size() && m[p] == top[p]) m[p++] = 0;
        if (p == m.size()) break;
        ++m[p];
      }
    }
  }
  if (side.star && g.complete && g.size() <= 300) {
    auto vars = places;
    auto targets = primed(places);
    vars.insert(vars.end(), targets.begin(), targets.end());
    PointEvaluator in_star(*side.star, vars);
    Closure closure(g);
    Marking point(2 * net.num_places());
    for (std::size_t u = 0; u < g.size(); ++u)
      for (std::size_t v = 0; v < g.size(); ++v) {
        std::copy(g.nodes[u].begin(), g.nodes[u].end(), point.begin());
        std::copy(g.nodes[v].begin(), g.nodes[v].end(), point.begin() + static_cast<std::ptrdiff_t>(net.num_places()));
        if (in_star(point) != closure.star(u, v))
          return "star formula disagrees on " + format_marking(g.nodes[u]) + " ->* " + format_marking(g.nodes[v]);
      }
  }
  return {};
}

}  // namespace pnmc
