// Acceptance run: one PASS/FAIL line per criterion. Every verdict is compared
// against an independent oracle from tests/support; tolerances are exact
// (zero mismatches) and each criterion has a wall-clock limit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/gadgets.hpp"
#include "testkit.hpp"

using namespace pnmc;
using namespace testkit;

namespace {

struct Tally {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::vector<std::string> shortfalls;  // unmet corpus-size requirements
  std::string first_mismatch;
  std::size_t judged = 0, true_cases = 0;  // ground-truth balance

  void note(bool truth) {
    ++judged;
    true_cases += truth;
  }
  void record(bool ok, const std::function<std::string()>& describe) {
    ++cases;
    if (ok) return;
    if (mismatches++ == 0) first_mismatch = describe();
  }
  void require(bool ok, const std::string& what) {
    if (!ok) shortfalls.push_back(what);
  }
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<void(Tally&)> body;
};

bool run_criterion(const Criterion& c) {
  Tally t;
  auto start = std::chrono::steady_clock::now();
  std::string crash;
  try {
    c.body(t);
  } catch (const std::exception& e) {
    crash = e.what();
  }
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool pass = crash.empty() && t.mismatches == 0 && t.shortfalls.empty() && seconds < c.limit_seconds;
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " (cases=" << t.cases
       << ", mismatches=" << t.mismatches;
  if (t.judged) line << ", true=" << t.true_cases << "/" << t.judged;
  line << ", time=" << seconds << "s, limit=" << c.limit_seconds << "s)";
  if (!crash.empty()) line << " error: " << crash;
  for (const auto& s : t.shortfalls) line << " shortfall: " << s;
  if (t.mismatches) line << " first mismatch: " << t.first_mismatch;
  std::cout << line.str() << std::endl;
  return pass;
}

bool holds_on_graph(const GadgetInstance& g) {
  auto graph = explore(g.net);
  if (!graph.complete) throw std::runtime_error(g.kind + " net is not bounded at the default cap");
  if (g.formula.is_fo()) return explicit_fo(graph, g.formula.fo).is_holds();
  if (g.mode == CheckMode::Validity) return explicit_ml_valid(graph, g.net, g.formula.ml).is_holds();
  return explicit_ml(graph, g.net, g.formula.ml, graph.initial).is_holds();
}

std::string pair_text(const NetPair& p) { return serialize(p.first) + "---\n" + serialize(p.second); }

// 20 pairs with equal reachability sets by construction, 20 with unequal sets.
std::vector<NetPair> criterion_corpus() {
  std::mt19937_64 rng(1001);
  std::vector<NetPair> equal, unequal;
  while (equal.size() < 20 || unequal.size() < 20) {
    for (auto& p : pair_corpus(rng, 8)) {
      auto& bucket = p.equal ? equal : unequal;
      if (bucket.size() < 20) bucket.push_back(std::move(p));
    }
  }
  equal.insert(equal.end(), unequal.begin(), unequal.end());
  return equal;
}

// ---------------------------------------------------------------- 1, 2

void criterion_union(Tally& t) {
  auto corpus = criterion_corpus();
  std::size_t equal = 0;
  for (const auto& p : corpus) {
    equal += p.equal;
    t.note(p.equal);
    bool verdict = holds_on_graph(build_union_net(p.first, p.second));
    t.record(verdict == p.equal, [&] { return pair_text(p); });
  }
  t.require(corpus.size() == 40, "40 pairs");
  t.require(equal >= 15, ">= 15 equal pairs");
  t.require(corpus.size() - equal >= 15, ">= 15 unequal pairs");
}

void criterion_variants(Tally& t) {
  auto corpus = criterion_corpus();
  struct Variant {
    const char* name;
    std::function<GadgetInstance(const NetPair&)> build;
    std::function<bool(const NetPair&)> truth;
  };
  auto eq = [](const NetPair& p) { return p.equal; };
  auto make = [](UnionFormula f) {
    return [f](const NetPair& p) { return build_union_net(p.first, p.second, f); };
  };
  std::vector<Variant> variants = {
      {"two-variable", make(UnionFormula::TwoVariable), eq},
      {"lambda", [](const NetPair& p) { return build_lambda_union(p.first, p.second); }, eq},
      {"modal validity", make(UnionFormula::MlValidity), eq},
      {"positive", make(UnionFormula::Positive), [](const NetPair& p) { return p.second_in_first; }},
      {"forward", make(UnionFormula::Forward), eq},
      {"plus", make(UnionFormula::Plus), eq},
      {"star", [](const NetPair& p) { return build_star_union_net(p.first, p.second); }, eq},
      {"containment", make(UnionFormula::Containment), [](const NetPair& p) { return p.first_in_second; }},
  };
  for (const auto& v : variants)
    for (const auto& p : corpus) {
      bool verdict = holds_on_graph(v.build(p));
      t.note(v.truth(p));
      t.record(verdict == v.truth(p), [&] { return std::string(v.name) + "\n" + pair_text(p); });
    }
}

// ---------------------------------------------------------------- 3

void criterion_qbf(Tally& t) {
  auto agree = [&](const Qbf& q) {
    auto g = build_qbf_net(q);
    auto v = mc_ml_forward(g.net, g.formula.ml);
    t.note(qbf_brute(q));
    t.record(v.definitive() && v.is_holds() == qbf_brute(q), [&] { return to_string(q); });
  };
  for (unsigned table = 0; table < 16; ++table) agree(parse_qbf(qbf_prefix(2) + "(" + table_matrix(table, 2) + ")"));
  std::mt19937_64 rng(1003);
  std::size_t random = 0;
  for (; random < 120; ++random) agree(parse_qbf(qbf_prefix(4) + random_matrix(rng, 4, 3)));
  t.require(random >= 100, ">= 100 random 4-variable instances");
}

// ---------------------------------------------------------------- 4

void criterion_engines(Tally& t) {
  std::mt19937_64 rng(1004);
  std::map<std::string, std::size_t> per_family;
  auto record = [&](const std::string& family, const CheckVerdict& v, bool truth, const std::string& what) {
    ++per_family[family];
    t.note(truth);
    t.record(v.definitive() && v.is_holds() == truth, [&] { return family + " " + v.line() + "\n" + what; });
  };

  for (int i = 0; i < 200; ++i) {
    PetriNet net = random_bounded_net(rng, small_shape());
    auto graph = explore(net);
    Ml f = random_ml(rng, MlGen{false, false, {}}, 4);
    record("ml-box", mc_ml_forward(net, f), explicit_ml(graph, net, f, graph.initial).is_holds(),
           to_string(f) + "\n" + serialize(net));
  }
  for (int i = 0; i < 200; ++i) {
    PetriNet net = random_bounded_net(rng, small_shape());
    auto graph = explore(net);
    Ml f = random_ml(rng, MlGen{true, false, {}}, 4);
    record("ml-box-inv", mc_ml_backward(net, f), explicit_ml(graph, net, f, graph.initial).is_holds(),
           to_string(f) + "\n" + serialize(net));
  }
  for (int i = 0; i < 200; ++i) {
    PetriNet net = random_bounded_net(rng, small_shape());
    auto graph = explore(net);
    Ml f = random_ml(rng, MlGen{false, true, net.places()}, 3);
    record("paml-validity", val_paml_forward(net, f), explicit_ml_valid(graph, net, f).is_holds(),
           to_string(f) + "\n" + serialize(net));
  }
  FoGen existential;
  existential.allow_universal = false;
  existential.allow_negation = false;
  for (std::size_t made = 0; made < 150;) {
    PetriNet net = random_bounded_net(rng, small_shape());
    Fo f = random_fo_sentence(rng, existential, 4);
    if (!is_existential_combination(f)) continue;
    ++made;
    record("exists-fo", mc_exists_fo(net, f), explicit_fo(explore(net), f).is_holds(),
           to_string(f) + "\n" + serialize(net));
  }
  FoGen one_var;
  one_var.atoms = {FoKind::Edge};
  one_var.max_vars = 1;
  for (std::size_t made = 0; made < 150;) {
    PetriNet net = random_bounded_net(rng, small_shape());
    Fo f = random_fo_sentence(rng, one_var, 4);
    if (classify(f).variable_count != 1) continue;
    ++made;
    record("one-var", mc_fo_one_var(net, f), explicit_fo(explore(net), f).is_holds(),
           to_string(f) + "\n" + serialize(net));
  }
  FoGen semilinear;
  semilinear.atoms = {FoKind::Edge, FoKind::Eq, FoKind::Star, FoKind::Init};
  semilinear.max_vars = 2;
  NetShape small = small_shape();
  small.max_places = 2;
  small.max_initial = 1;
  for (int i = 0; i < 100; ++i) {
    PetriNet net = random_bounded_net(rng, small);
    auto side = derived_inputs(net, brute_graph(net));
    Fo f = random_fo_sentence(rng, semilinear, 3);
    record("semilinear", mc_fo_semilinear(net, f, side), explicit_fo(explore(net), f).is_holds(),
           to_string(f) + "\n" + serialize(net));
  }
  t.require(t.cases >= 1000, ">= 1000 pairs");
  for (const auto& [family, n] : per_family) t.require(n >= 100, family + " has >= 100 pairs");
  t.require(per_family.size() == 6, "six families");
}

// ---------------------------------------------------------------- 5

void criterion_presburger(Tally& t) {
  std::mt19937_64 rng(1005);
  std::size_t sentences = 0, points = 0;
  for (; sentences < 500; ++sentences) {
    int next = 0;
    auto ast = random_arith(rng, {}, next, 3);
    std::vector<std::int64_t> env(static_cast<std::size_t>(next), 0);
    bool expected = arith_eval(*ast, env, 8);
    t.note(expected);
    Pres f = arith_to_pres(*ast, 8);
    t.record(decide(f) == expected, [&] { return "decide " + to_string(f); });
  }
  for (int i = 0; i < 130; ++i) {
    int next = 2;
    auto ast = random_arith(rng, {0, 1}, next, 3);
    Pres source = arith_to_pres(*ast, 8);
    Pres qf = eliminate(source);
    t.require(is_quantifier_free(qf), "eliminate returns quantifier-free formulas");
    PointEvaluator eval(qf, {"v0", "v1"});
    std::vector<std::int64_t> env(static_cast<std::size_t>(next), 0);
    for (Tokens a = 0; a <= 8; ++a)
      for (Tokens b = 0; b <= 8; ++b) {
        env[0] = static_cast<std::int64_t>(a);
        env[1] = static_cast<std::int64_t>(b);
        std::vector<Tokens> pt{a, b};
        ++points;
        t.record(eval(pt) == arith_eval(*ast, env, 8), [&] {
          return "eliminate " + to_string(source) + " at (" + std::to_string(a) + "," + std::to_string(b) + ")";
        });
      }
  }
  t.require(sentences >= 500, ">= 500 sentences");
  t.require(points >= 10000, ">= 10^4 grid points");
}

// ---------------------------------------------------------------- 6

void criterion_paml_sets(Tally& t) {
  std::mt19937_64 rng(1006);
  NetShape s = small_shape();
  s.max_places = 2;
  std::size_t nets = 0;
  for (; nets < 20; ++nets) {
    PetriNet net = random_bounded_net(rng, s);
    Ml f = random_ml(rng, MlGen{false, true, net.places()}, 3);
    t.require(modal_degree(f) <= 3, "modal degree <= 3");
    PointEvaluator contains(paml_sat_set(net, f), place_vars(net));
    for (const auto& m : box(net.num_places(), 5))
      t.record(contains(m) == ml_point(net, f, m),
               [&] { return to_string(f) + " at " + format_marking(m) + "\n" + serialize(net); });
  }
  t.require(nets == 20, "20 nets");
}

// ---------------------------------------------------------------- 7

void criterion_reach_gadget(Tally& t) {
  std::mt19937_64 rng(1007);
  int yes = 0, no = 0;
  for (int attempt = 0; (yes < 15 || no < 15) && attempt < 5000; ++attempt) {
    PetriNet n = random_bounded_net(rng, small_shape());
    Marking m1 = n.initial();
    Marking m2(n.num_places());
    for (auto& v : m2) v = uniform(rng, 0, 2);
    bool truth = brute_reach(n).count(m2) != 0;
    if ((truth ? yes : no) >= 15) continue;
    GadgetInstance g;
    try {
      g = build_reach_gadget(n, m1, m2);
    } catch (const PreconditionError&) {
      continue;  // m1 dead, m1 = m2 or an empty preset
    }
    (truth ? yes : no)++;
    t.note(truth);
    CheckRequest req;
    req.formula = g.formula;
    auto v = check(g.net, req);
    t.record(v.definitive() && v.is_holds() == truth,
             [&] { return v.line() + " m2=" + format_marking(m2) + "\n" + serialize(n); });
  }
  t.require(yes == 15 && no == 15, "15 reachable and 15 unreachable targets");
}

// ---------------------------------------------------------------- 8

void criterion_drown(Tally& t) {
  std::mt19937_64 rng(1008);
  NetShape s = small_shape();
  s.max_places = 2;
  for (int i = 0; i < 20; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    auto d = build_drown_net(n);
    const PetriNet& net = d.instance.net;
    std::size_t start = *net.place_index("start"), sim = *net.place_index("sim"), edit = *net.place_index("edit");
    auto graph = explore(net, 2000);
    for (const auto& m : graph.nodes)
      t.record(m[sim] + m[edit] == 1 && m[start] <= 1, [&] { return format_marking(m) + "\n" + serialize(net); });
  }
  FoGen gen;
  gen.max_vars = 2;
  for (int i = 0; i < 50; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    Fo f = random_fo_sentence(rng, gen, 3);
    bool expected = explicit_fo(explore(n), f).is_holds();
    t.note(expected);
    auto d = build_drown_net(n, f);
    // The drowned net is unbounded; its sentence is evaluated lazily.
    Truth drowned = guarded_eval(d.instance.net, d.instance.formula.fo, {}, Structure::Urg);
    t.record(drowned != Truth::Unknown && (drowned == Truth::True) == expected,
             [&] { return to_string(f) + "\n" + serialize(n); });
  }
}

// ---------------------------------------------------------------- 9

void criterion_ug(Tally& t) {
  std::mt19937_64 rng(1009);
  NetShape s = small_shape();
  s.max_places = 2;
  s.max_transitions = 3;
  for (int i = 0; i < 10; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    auto u = build_ug_gadget(n);
    const PetriNet& net = u.instance.net;
    Marking seed(net.num_places(), 0);
    seed[0] = 1;
    for (const auto& m : box(net.num_places(), 4)) {
      auto v = ug_eval_guarded(net, u.instance.formula.fo, m);
      t.record(v.definitive() && v.is_holds() == (m == seed), [&] { return format_marking(m) + "\n" + serialize(net); });
    }
  }
}

// ---------------------------------------------------------------- 10

void criterion_honesty(Tally& t) {
  std::mt19937_64 rng(1010);
  reset_audit();
  for (int i = 0; i < 10000; ++i) {
    PetriNet net = random_bounded_net(rng, small_shape());
    bool grows = coin(rng);
    if (grows) net.set_post(net.add_transition("grow"), 0, 1);
    CheckRequest req;
    bool fo = coin(rng);
    if (fo) {
      FoGen gen{{FoKind::Edge, FoKind::Eq, FoKind::Star, FoKind::Init}, 2, true, true};
      req.formula.fo = random_fo_sentence(rng, gen, 3);
    } else {
      req.formula.ml = random_ml(rng, MlGen{coin(rng), coin(rng), net.places()}, 3);
      req.mode = coin(rng) ? CheckMode::Validity : CheckMode::ModelCheck;
    }
    req.options.cap = uniform(rng, 2, 60);
    std::size_t claims_before = audit().truncated_absence_claims.load();
    auto v = check(net, req);
    bool honest = audit().truncated_absence_claims.load() == claims_before;
    bool correct = true;
    // Definitive verdicts on bounded nets are also compared with brute force.
    if (!grows && v.definitive()) {
      auto bg = brute_graph(net);
      bool truth;
      if (fo) {
        truth = fo_brute(bg, req.formula.fo);
      } else if (req.mode == CheckMode::Validity) {
        truth = true;
        for (std::size_t u = 0; u < bg.nodes.size(); ++u) truth = truth && ml_brute(bg, net, req.formula.ml, u);
      } else {
        truth = ml_brute(bg, net, req.formula.ml, bg.index.at(net.initial()));
      }
      correct = v.is_holds() == truth;
      t.note(truth);
    }
    t.record(honest && correct, [&] { return v.line() + (honest ? "" : " (audit flag)") + "\n" + serialize(net); });
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "union-net equality sentence vs reach-set equality on 40 pairs", 120, criterion_union},
      {2, "sentence variants vs reach-set relations on the same corpus", 600, criterion_variants},
      {3, "QBF gadget vs brute-force QBF truth", 120, criterion_qbf},
      {4, "specialized engines vs the explicit oracle", 600, criterion_engines},
      {5, "Presburger decide and eliminate vs bounded enumeration", 180, criterion_presburger},
      {6, "PAML satisfaction sets vs pointwise evaluation on [0..5]^n", 180, criterion_paml_sets},
      {7, "reach gadget vs reachability on 30 balanced triples", 120, criterion_reach_gadget},
      {8, "drown net invariant and truth preservation", 180, criterion_drown},
      {9, "transition-graph initial-marking formula box sweep", 60, criterion_ug},
      {10, "no definitive verdict from a truncated exploration", 600, criterion_honesty},
  };
  bool all = true;
  for (const auto& c : criteria) all = run_criterion(c) && all;
  return all ? 0 : 1;
}
