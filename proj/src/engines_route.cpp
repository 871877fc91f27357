#include <algorithm>

#include "pnmc/engines.hpp"
#include "pnmc/errors.hpp"

namespace pnmc {

const std::vector<std::string>& engine_names() {
  static const std::vector<std::string> names{
      "explicit_fo",  "explicit_ml",   "mc_ml_forward", "mc_ml_backward",   "val_paml_forward",
      "mc_exists_fo", "mc_fo_one_var", "mc_fo_ug",      "mc_fo_semilinear", "ug_eval_guarded",
  };
  return names;
}

namespace {

bool predicates_within(const FragmentReport& r, std::initializer_list<Predicate> allowed) {
  return std::all_of(r.predicates_used.begin(), r.predicates_used.end(), [&](Predicate p) {
    return std::find(allowed.begin(), allowed.end(), p) != allowed.end();
  });
}

bool bounded(const PetriNet& net, std::size_t cap) { return is_bounded(net, cap).kind == BoundednessResult::Kind::Bounded; }

EngineRoute route_fo(const PetriNet& net, const CheckRequest& req) {
  const Fo& f = req.formula.fo;
  auto r = classify(f);
  if (req.structure == Structure::Ug) {
    if (!is_sentence(f)) {
      if (req.at && is_forward_guarded(f)) return {"ug_eval_guarded", "forward-guarded formula with an evaluation point"};
      return {"", "free variables need a forward-guarded formula and an evaluation point"};
    }
    if (predicates_within(r, {Predicate::Init, Predicate::Edge, Predicate::Eq}))
      return {"mc_fo_ug", "FO(init, ->, =) over the transition graph translates to Presburger arithmetic"};
    return {"", "->* or ->+ over the transition graph has no decision procedure"};
  }
  if (!is_sentence(f)) return {"", "the formula has free variables"};
  bool needs_star = r.predicates_used.count(Predicate::Star) || r.predicates_used.count(Predicate::Plus);
  if (req.side.reach && (!needs_star || req.side.star))
    return {"mc_fo_semilinear", "semilinear reachability set supplied as input"};
  if (is_existential_combination(f)) return {"mc_exists_fo", "existential over {->, =}: product-net reachability"};
  if (r.variable_count <= 1 && predicates_within(r, {Predicate::Edge}))
    return {"mc_fo_one_var", "one variable over ->: coverability and semilinear reachability"};
  if (bounded(net, req.options.cap)) return {"explicit_fo", "bounded net: finite reachability graph"};
  return {"", "unbounded net and no decision procedure for this fragment"};
}

EngineRoute route_ml(const PetriNet& net, const CheckRequest& req) {
  const Ml& f = req.formula.ml;
  bool inverse = has_inverse(f);
  if (req.structure == Structure::Ug) {
    if (req.mode == CheckMode::ModelCheck && !inverse)
      return {"mc_ml_forward", "forward modalities only see the neighbourhood of the evaluation point"};
    return {"", "no decision procedure for this modal problem over the transition graph"};
  }
  if (req.mode == CheckMode::ModelCheck) {
    if (!inverse) return {"mc_ml_forward", "forward modalities: depth-bounded evaluation from M0"};
    return {"mc_ml_backward", "inverse modalities: bounded ball with reachability filtering"};
  }
  if (!inverse) return {"val_paml_forward", "validity of forward formulas: semilinear complement reachability"};
  if (bounded(net, req.options.cap)) return {"explicit_ml", "bounded net: finite reachability graph"};
  return {"", "unbounded net and no decision procedure for validity with inverse modalities"};
}

const Fo& need_fo(const CheckRequest& req, const std::string& engine) {
  if (!req.formula.is_fo()) throw FragmentError(engine + " expects a first-order formula");
  return req.formula.fo;
}

const Ml& need_ml(const CheckRequest& req, const std::string& engine) {
  if (req.formula.is_fo()) throw FragmentError(engine + " expects a modal formula");
  return req.formula.ml;
}

CheckVerdict dispatch(const std::string& e, const PetriNet& net, const CheckRequest& req) {
  const auto& opts = req.options;
  if (e == "explicit_fo") return explicit_fo(explore(net, opts.cap), need_fo(req, e));
  if (e == "explicit_ml") {
    const Ml& f = need_ml(req, e);
    auto g = explore(net, opts.cap);
    return req.mode == CheckMode::Validity ? explicit_ml_valid(g, net, f) : explicit_ml(g, net, f, g.initial);
  }
  if (e == "mc_ml_forward") {
    const Ml& f = need_ml(req, e);
    if (req.mode == CheckMode::Validity) throw FragmentError("mc_ml_forward decides model checking, not validity");
    if (req.at) return CheckVerdict::of(ml_forward_at(net, f, *req.at), e);
    return mc_ml_forward(net, f);
  }
  if (e == "mc_ml_backward") return mc_ml_backward(net, need_ml(req, e), opts);
  if (e == "val_paml_forward") return val_paml_forward(net, need_ml(req, e), opts);
  if (e == "mc_exists_fo") return mc_exists_fo(net, need_fo(req, e), opts);
  if (e == "mc_fo_one_var") return mc_fo_one_var(net, need_fo(req, e), opts);
  if (e == "mc_fo_ug") return mc_fo_ug(net, need_fo(req, e), opts);
  if (e == "mc_fo_semilinear") return mc_fo_semilinear(net, need_fo(req, e), req.side, opts);
  if (e == "ug_eval_guarded") {
    if (!req.at) throw PreconditionError("ug_eval_guarded needs an evaluation marking");
    return ug_eval_guarded(net, need_fo(req, e), *req.at, opts.cap);
  }
  throw PreconditionError("unknown engine '" + e + "'");
}

}  // namespace

EngineRoute route(const PetriNet& net, const CheckRequest& req) {
  return req.formula.is_fo() ? route_fo(net, req) : route_ml(net, req);
}

CheckVerdict run_engine(const std::string& engine, const PetriNet& net, const CheckRequest& req) {
  if (req.formula.is_fo() ? !req.formula.fo : !req.formula.ml) throw PreconditionError("no formula supplied");
  if (!req.formula.is_fo()) check_places(req.formula.ml, net);
  if (req.at && req.at->size() != net.num_places()) throw DimensionError("evaluation marking length differs from the place count");
  try {
    return dispatch(engine, net, req);
  } catch (const IncompleteGraphError&) {
    return CheckVerdict::inconclusive(engine, "cap-exceeded");
  } catch (const ResourceExceeded&) {
    return CheckVerdict::inconclusive(engine, "budget-exceeded");
  }
}

CheckVerdict check(const PetriNet& net, const CheckRequest& req) {
  auto r = route(net, req);
  if (r.engine.empty()) return CheckVerdict::inconclusive("route", "no decidable route");
  return run_engine(r.engine, net, req);
}

}  // namespace pnmc
