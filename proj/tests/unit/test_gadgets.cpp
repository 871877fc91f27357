#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/gadgets.hpp"
#include "testkit.hpp"

using namespace pnmc;
using namespace testkit;

namespace {

PetriNet net_of(const char* text) { return parse_net(text); }

bool holds_explicit(const GadgetInstance& g) {
  auto graph = explore(g.net);
  REQUIRE(graph.complete);
  if (g.formula.is_fo()) return explicit_fo(graph, g.formula.fo).is_holds();
  if (g.mode == CheckMode::Validity) return explicit_ml_valid(graph, g.net, g.formula.ml).is_holds();
  return explicit_ml(graph, g.net, g.formula.ml, graph.initial).is_holds();
}

void check_common(const GadgetInstance& g) {
  CHECK(parse_net(serialize(g.net)) == g.net);
  if (!g.formula.is_fo()) CHECK_NOTHROW(check_places(g.formula.ml, g.net));
  for (const auto& m : g.place_map) {
    std::set<std::string> images;
    for (const auto& [src, dst] : m) {
      CHECK(g.net.place_index(dst).has_value());
      images.insert(dst);
    }
    CHECK(images.size() == m.size());
  }
}

// Neighbours in the undirected graph, loops included.
bool on_triangle(const BruteGraph& g, std::size_t u) {
  auto adj = [&](std::size_t a, std::size_t b) { return g.edge(a, b) || g.edge(b, a); };
  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    for (std::size_t w = 0; w < g.nodes.size(); ++w)
      if (u != v && v != w && u != w && adj(u, v) && adj(v, w) && adj(w, u)) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------- catalogue

TEST_CASE("fixed formulas are byte-stable and well-formed") {
  std::set<std::string> names;
  for (const auto& f : fixed_formulas()) {
    CHECK(names.insert(f.name).second);
    if (f.formula.is_fo()) {
      std::string text = to_string(f.formula.fo);
      CHECK(to_string(parse_fo(text)) == text);
    } else {
      std::string text = to_string(f.formula.ml);
      CHECK(to_string(parse_ml(text)) == text);
    }
  }
  CHECK(to_string(fixed_fo("union")) == to_string(fixed_fo("union")));
  CHECK_THROWS_AS(fixed_formula("missing"), PreconditionError);
  CHECK_THROWS_AS(fixed_ml("union"), FragmentError);
}

TEST_CASE("the two-variable sentence is the recycled union sentence") {
  Fo printed = parse_fo(
      "forall z . (!exists z' . z -> z') => (exists z' . z' -> z & (exists z . z' -> z & z -> z)) & "
      "(exists z' . z' -> z & !(exists z . z' -> z & z -> z))");
  CHECK(alpha_equal(fixed_fo("union_two_var"), printed));
  CHECK(alpha_equal(fixed_fo("union_two_var"), fixed_fo("union")));
  CHECK(classify(fixed_fo("union_two_var")).variable_count == 2);
}

TEST_CASE("fragment membership of the fixed sentences") {
  CHECK(classify(fixed_fo("union_positive")).is_positive);
  CHECK(classify(fixed_fo("union_forward")).is_forward);
  CHECK(!classify(fixed_fo("union")).is_positive);
  CHECK(is_sentence(fixed_fo("union_star")));
  CHECK(free_vars(fixed_fo("initial_marker")) == std::set<std::string>{"x"});
  CHECK(free_vars(fixed_fo("first_step")) == std::set<std::string>{"x", "y"});
  CHECK(alpha_equal(formulas::initial_marker("x"), fixed_fo("initial_marker")));
  CHECK(alpha_equal(formulas::loaded_marker("x"), fixed_fo("loaded_marker")));
}

// ---------------------------------------------------------------- union nets

TEST_CASE("union net structure") {
  PetriNet n1 = net_of("net a\nplace p init 1\nplace q init 0\ntrans t\nin p:1\nout q:1\n");
  PetriNet n2 = net_of("net b\nplace q init 0\nplace p init 2\ntrans s\nin p:2\nout q:1\n");
  auto g = build_union_net(n1, n2);
  check_common(g);
  CHECK(g.net.num_places() == 2 + 6);
  Marking m0 = g.net.initial();
  Marking after = fire(g.net, m0, "choose_1");
  CHECK(after[*g.net.place_index("ctl_1")] == 1);
  CHECK(after[*g.net.place_index("ctl_init")] == 0);
  CHECK(after[*g.net.place_index("p")] == 1);
  CHECK(after[*g.net.place_index("q")] == 0);
  Marking other = fire(g.net, m0, "choose_2");
  CHECK(other[*g.net.place_index("p")] == 2);
  CHECK(build_star_union_net(n1, n2).net.num_places() == 2 + 5);
  PetriNet bad = net_of("net c\nplace r init 0\n");
  CHECK_THROWS_AS(build_union_net(n1, bad), PreconditionError);
}

TEST_CASE("union nets drop neutral transitions and record them") {
  PetriNet n1 = net_of("net a\nplace p init 1\ntrans t\nin p:1\ntrans idle\nin p:1\nout p:1\n");
  auto g = build_union_net(n1, n1);
  CHECK(!g.net.transition_index("t1_idle").has_value());
  CHECK(g.notes.size() == 2);
  CHECK(neutral_transitions(g.net).size() == 1);  // the loop branch spin
}

TEST_CASE("union deadlocks are entered only through the halt transitions") {
  std::mt19937_64 rng(31);
  for (const auto& pair : pair_corpus(rng, 12)) {
    auto g = build_union_net(pair.first, pair.second);
    auto bg = brute_graph(g.net);
    std::size_t halt1 = g.net.require_transition("halt_1"), halt2 = g.net.require_transition("halt_2");
    for (std::size_t u = 0; u < bg.nodes.size(); ++u) {
      if (!bg.succ[u].empty()) continue;
      for (auto v : bg.pred[u]) {
        bool via_halt = false;
        for (std::size_t t : {halt1, halt2})
          if (raw_enabled(g.net, bg.nodes[v], t) && raw_fire(g.net, bg.nodes[v], t) == bg.nodes[u]) via_halt = true;
        CHECK(via_halt);
      }
    }
  }
}

TEST_CASE("union contracts on a bounded corpus") {
  std::mt19937_64 rng(32);
  auto corpus = pair_corpus(rng, 24);
  std::size_t equal = 0;
  for (const auto& pair : corpus) {
    equal += pair.equal;
    INFO(serialize(pair.first), "\n", serialize(pair.second));
    CHECK(holds_explicit(build_union_net(pair.first, pair.second)) == pair.equal);
    CHECK(holds_explicit(build_union_net(pair.first, pair.second, UnionFormula::TwoVariable)) == pair.equal);
    CHECK(holds_explicit(build_union_net(pair.first, pair.second, UnionFormula::Forward)) == pair.equal);
    CHECK(holds_explicit(build_union_net(pair.first, pair.second, UnionFormula::Plus)) == pair.equal);
    CHECK(holds_explicit(build_union_net(pair.first, pair.second, UnionFormula::MlValidity)) == pair.equal);
    CHECK(holds_explicit(build_union_net(pair.first, pair.second, UnionFormula::Positive)) == pair.second_in_first);
    CHECK(holds_explicit(build_union_net(pair.first, pair.second, UnionFormula::Containment)) == pair.first_in_second);
    CHECK(holds_explicit(build_star_union_net(pair.first, pair.second)) == pair.equal);
  }
  CHECK(equal >= 8);
  CHECK(equal <= corpus.size() - 6);
}

TEST_CASE("the modal union formula is checked at every node") {
  PetriNet n1 = net_of("net a\nplace p init 1\ntrans t\nin p:1\n");
  PetriNet n2 = net_of("net b\nplace p init 1\n");
  auto g = build_union_net(n1, n2, UnionFormula::MlValidity);
  CHECK(g.mode == CheckMode::Validity);
  CHECK(!holds_explicit(g));
  CHECK(holds_explicit(build_union_net(n1, n1, UnionFormula::MlValidity)));
}

TEST_CASE("3-cycle augmentation") {
  std::mt19937_64 rng(33);
  NetShape s = small_shape();
  s.allow_neutral = false;
  for (int i = 0; i < 10; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    PetriNet a = build_lambda_augment(n);
    CHECK(a.num_places() == n.num_places() + 3);
    CHECK(a.num_transitions() == n.num_transitions() + 3);
    auto bg = brute_graph(a);
    for (std::size_t u = 0; u < bg.nodes.size(); ++u) CHECK(on_triangle(bg, u));
    CHECK(brute_reach(n).size() * 3 == bg.nodes.size());
  }
  CHECK_THROWS_AS(build_lambda_augment(net_of("net n\nplace p init 1\ntrans t\nin p:1\nout p:1\n")), PreconditionError);
}

TEST_CASE("undirected union contract") {
  std::mt19937_64 rng(34);
  NetShape s = small_shape();
  s.max_places = 2;
  s.max_initial = 1;
  for (const auto& pair : pair_corpus(rng, 12, s)) {
    auto g = build_lambda_union(pair.first, pair.second);
    check_common(g);
    INFO(serialize(pair.first), "\n", serialize(pair.second));
    CHECK(holds_explicit(g) == pair.equal);
  }
}

// ---------------------------------------------------------------- QBF

TEST_CASE("QBF parsing and printing") {
  Qbf q = parse_qbf("E p1 A p2 (p1 | p2)");
  CHECK(q.vars == std::vector<std::string>{"p1", "p2"});
  CHECK(q.universal == std::vector<bool>{false, true});
  CHECK(to_string(q) == "E p1 A p2 (p1 | p2)");
  CHECK(to_string(parse_qbf(to_string(q))) == to_string(q));
  CHECK(qbf_truth(q));
  CHECK(!qbf_truth(parse_qbf("exists p1 . forall p2 . p1 & p2")));
  CHECK_THROWS_AS(parse_qbf("E p1 (p1 | p2)"), UnboundVariableError);
  CHECK_THROWS_AS(build_qbf_net(parse_qbf("A p1 E p2 (p1)")), PreconditionError);
  CHECK_THROWS_AS(build_qbf_net(parse_qbf("E p1 (p1)")), PreconditionError);
  CHECK_THROWS_AS(build_qbf_net(parse_qbf("E p1 E p2 (p1)")), PreconditionError);
}

TEST_CASE("QBF gadget examples") {
  auto holds = parse_qbf("E p1 A p2 (p1 | p2)");
  auto fails = parse_qbf("E p1 A p2 (p1 & p2)");
  CHECK(mc_ml_forward(build_qbf_net(holds).net, build_qbf_net(holds).formula.ml).is_holds());
  CHECK(mc_ml_forward(build_qbf_net(fails).net, build_qbf_net(fails).formula.ml).is_fails());
  auto g = build_qbf_net(holds);
  check_common(g);
  CHECK(is_bounded(g.net).kind == BoundednessResult::Kind::Bounded);
}

TEST_CASE("QBF net successors after the last choice") {
  auto g = build_qbf_net(parse_qbf("E p1 A p2 E p3 A p4 (p1 | p4)"));
  // Choose p1 and p3 true.
  Marking m = g.net.initial();
  for (const char* t : {"set1", "skip2", "set3", "skip4"}) m = fire(g.net, m, t);
  auto succ = successors(g.net, m);
  std::set<Marking> expected;
  for (const char* t : {"pick1", "pick3"}) expected.insert(fire(g.net, m, t));
  CHECK(std::set<Marking>(succ.begin(), succ.end()) == expected);
}

TEST_CASE("QBF gadget agrees with brute force") {
  for (unsigned table = 0; table < 16; ++table) {
    Qbf q = parse_qbf(qbf_prefix(2) + "(" + table_matrix(table, 2) + ")");
    auto g = build_qbf_net(q);
    CHECK(mc_ml_forward(g.net, g.formula.ml).is_holds() == qbf_brute(q));
    CHECK(qbf_truth(q) == qbf_brute(q));
  }
  std::mt19937_64 rng(35);
  for (int i = 0; i < 30; ++i) {
    Qbf q = parse_qbf(qbf_prefix(4) + random_matrix(rng, 4, 3));
    auto g = build_qbf_net(q);
    INFO(to_string(q));
    CHECK(mc_ml_forward(g.net, g.formula.ml).is_holds() == qbf_brute(q));
  }
}

// ---------------------------------------------------------------- hardness gadgets

TEST_CASE("reach gadget examples and preconditions") {
  PetriNet n = net_of("net d\nplace p init 0\ntrans t\nin p:1\n");
  auto yes = build_reach_gadget(n, {2}, {0});
  check_common(yes);
  CHECK(explicit_ml(explore(yes.net), yes.net, yes.formula.ml, 0).is_holds());
  CHECK(mc_ml_backward(yes.net, yes.formula.ml).is_holds());
  auto no = build_reach_gadget(n, {2}, {3});
  CHECK(explicit_ml(explore(no.net), no.net, no.formula.ml, 0).is_fails());
  CHECK_THROWS_AS(build_reach_gadget(n, {0}, {1}), PreconditionError);
  CHECK_THROWS_AS(build_reach_gadget(n, {2}, {2}), PreconditionError);
  PetriNet source = net_of("net s\nplace p init 0\ntrans t\nin p:1\ntrans make\nout p:1\n");
  CHECK_THROWS_AS(build_reach_gadget(source, {1}, {0}), PreconditionError);
}

TEST_CASE("reach gadget agrees with reachability") {
  std::mt19937_64 rng(36);
  NetShape s = small_shape();
  int yes = 0, no = 0;
  for (int i = 0; (yes < 10 || no < 10) && i < 500; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    Marking m1 = n.initial();
    auto reach = brute_reach(n);
    bool any = false;
    for (std::size_t t = 0; t < n.num_transitions(); ++t) any = any || raw_enabled(n, m1, t);
    if (!any) continue;
    Marking m2(n.num_places());
    for (auto& v : m2) v = uniform(rng, 0, 2);
    if (m2 == m1) continue;
    bool truth = reach.count(m2) != 0;
    if ((truth ? yes : no) >= 10) continue;
    (truth ? yes : no)++;
    auto g = build_reach_gadget(n, m1, m2);
    auto graph = explore(g.net);
    INFO(serialize(n), " ", format_marking(m2));
    CHECK(explicit_ml(graph, g.net, g.formula.ml, graph.initial).is_holds() == truth);
    CHECK(mc_ml_backward(g.net, g.formula.ml).is_holds() == truth);
  }
  CHECK(yes == 10);
  CHECK(no == 10);
}

TEST_CASE("nonreach gadget") {
  PetriNet drain = net_of("net d\nplace p init 2\ntrans t\nin p:1\n");
  auto g = build_nonreach_gadget(drain);
  check_common(g);
  CHECK(g.mode == CheckMode::Validity);
  CHECK(val_paml_forward(g.net, g.formula.ml).is_fails());
  PetriNet keep = net_of("net k\nplace p init 1\nplace q init 0\ntrans t\nin p:1\nout q:1\ntrans u\nin q:1\nout p:1\n");
  CHECK(val_paml_forward(build_nonreach_gadget(keep).net, fixed_ml("always_enabled")).is_holds());
  CHECK_THROWS_AS(build_nonreach_gadget(net_of("net f\nplace p init 0\ntrans t\nout p:1\n")), PreconditionError);
  std::mt19937_64 rng(37);
  for (int i = 0; i < 20; ++i) {
    PetriNet n = random_bounded_net(rng, small_shape());
    bool zero_unreachable = brute_reach(n).count(Marking(n.num_places(), 0)) == 0;
    auto gi = build_nonreach_gadget(n);
    CHECK(val_paml_forward(gi.net, gi.formula.ml).is_holds() == zero_unreachable);
    CHECK(holds_explicit(gi) == zero_unreachable);
  }
}

TEST_CASE("budget reduction") {
  PetriNet drain = net_of("net d\nplace p init 2\nplace q init 1\ntrans t\nin p:1\ntrans u\nin q:1\n");
  auto r = build_budget_reduction(drain);
  check_common(r.instance);
  CHECK(neutral_transitions(r.instance.net).size() == 1);
  CHECK(neutral_transitions(build_fo1_gadget(drain).net).size() == 1);
  CHECK(r.tracked.initial().back() == 3);
  CHECK(holds_explicit(r.instance));
  CHECK(mc_fo_one_var(r.instance.net, r.instance.formula.fo).is_holds());
  PetriNet swap = net_of("net s\nplace p init 1\nplace q init 0\ntrans t\nin p:1\nout q:1\ntrans u\nin q:1\nout p:1\n");
  CHECK(!holds_explicit(build_budget_reduction(swap).instance));
  CHECK_THROWS_AS(build_budget_reduction(net_of("net n\nplace p init 1\ntrans t\nin p:1\nout p:1\n")),
                  PreconditionError);
  std::mt19937_64 rng(38);
  NetShape s = small_shape();
  s.allow_neutral = false;
  for (int i = 0; i < 20; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    bool zero = brute_reach(n).count(Marking(n.num_places(), 0)) != 0;
    auto red = build_budget_reduction(n);
    // The budget place always equals the token sum.
    for (const auto& m : brute_reach(red.tracked)) {
      Tokens sum = 0;
      for (std::size_t p = 0; p + 1 < m.size(); ++p) sum += m[p];
      CHECK(m.back() == sum);
    }
    CHECK(holds_explicit(red.instance) == zero);
    CHECK(mc_fo_one_var(red.instance.net, red.instance.formula.fo).is_holds() == zero);
  }
}

// ---------------------------------------------------------------- drowning

TEST_CASE("drown net invariant and first step") {
  PetriNet n = net_of("net a\nplace p init 1\nplace q init 0\ntrans t\nin p:1\nout q:1\n");
  auto d = build_drown_net(n);
  check_common(d.instance);
  std::size_t start = *d.instance.net.place_index("start"), sim = *d.instance.net.place_index("sim"),
              edit = *d.instance.net.place_index("edit");
  auto g = explore(d.instance.net, 3000);
  for (const auto& m : g.nodes) {
    CHECK(m[start] <= 1);
    CHECK(m[sim] + m[edit] == 1);
  }
  const Marking& m0 = d.instance.net.initial();
  Marking entry = fire(d.instance.net, m0, "forget");
  for (const auto& s : successors(d.instance.net, m0)) {
    Truth back = reaches(d.instance.net, s, m0);
    REQUIRE(back != Truth::Unknown);
    CHECK((back == Truth::True) == (s != entry));
  }
}

TEST_CASE("drown variant structure") {
  PetriNet n = net_of("net a\nplace p init 1\ntrans t\nin p:1\n");
  auto d = build_drown_net(n, parse_fo("exists x . !(x -> x)"));
  const PetriNet& v = d.variant;
  std::size_t pre = *v.place_index("pre");
  CHECK(v.initial()[pre] == 1);
  CHECK(v.initial()[*v.place_index("start")] == 0);
  for (std::size_t t = 0; t < v.num_transitions(); ++t) CHECK(v.post(t, pre) == 0);
  CHECK(successors(v, v.initial()).size() == 1);
  Fo vf = drown_variant_formula(parse_fo("exists x . !(x -> x)"));
  CHECK(is_sentence(vf));
  CHECK(is_sentence(d.instance.formula.fo));
  CHECK_THROWS_AS(drown_formula(parse_fo("x -> x")), UnboundVariableError);
}

TEST_CASE("drowned sentences keep their truth value") {
  std::mt19937_64 rng(39);
  FoGen gen;
  gen.max_vars = 2;
  NetShape s = small_shape();
  s.max_places = 2;
  int checked = 0;
  for (int i = 0; i < 30; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    Fo f = random_fo_sentence(rng, gen, 3);
    bool expected = fo_brute(brute_graph(n), f);
    auto d = build_drown_net(n, f);
    Truth t = guarded_eval(d.instance.net, d.instance.formula.fo, {}, Structure::Urg);
    INFO(to_string(f), "\n", serialize(n));
    REQUIRE(t != Truth::Unknown);
    CHECK((t == Truth::True) == expected);
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("drowned sentence avoids variable capture") {
  Fo f = parse_fo("exists x0 . exists x1 . x0 -> x1");
  Fo d = drown_formula(f);
  CHECK(is_sentence(d));
  CHECK(to_string(d).find("x0'") != std::string::npos);
}

// ---------------------------------------------------------------- transition graph

TEST_CASE("transition-graph gadget identifies its initial marking") {
  std::mt19937_64 rng(40);
  NetShape s = small_shape();
  s.max_places = 2;
  s.max_transitions = 2;
  for (int i = 0; i < 3; ++i) {
    PetriNet n = random_bounded_net(rng, s);
    auto u = build_ug_gadget(n);
    check_common(u.instance);
    const PetriNet& net = u.instance.net;
    Marking one(net.num_places(), 0);
    one[0] = 1;
    CHECK(net.initial() == one);
    CHECK(*u.instance.at == one);
    for (std::size_t p = 0; p < u.looped.num_places(); ++p) CHECK(self_loop_pairs(u.looped).size() >= u.looped.num_places());
    for (const auto& m : box(net.num_places(), 3)) {
      auto v = ug_eval_guarded(net, u.instance.formula.fo, m);
      REQUIRE(v.definitive());
      CHECK(v.is_holds() == (m == one));
      auto w = ug_eval_guarded(net, u.loaded, m);
      REQUIRE(w.definitive());
      CHECK(w.is_holds() == (m == u.loaded_marking));
    }
    Marking two = one;
    two[0] = 2;
    CHECK(ug_eval_guarded(net, u.instance.formula.fo, two).is_fails());
  }
}

// ---------------------------------------------------------------- pileup

TEST_CASE("pileup structure") {
  PetriNet n1 = net_of("net a\nplace p init 1\nplace q init 0\ntrans t\nin p:1\nout q:1\n");
  PetriNet n2 = net_of("net b\nplace p init 1\nplace q init 0\n");
  auto pg = build_pileup(n1, n2);
  check_common(pg.instance);
  CHECK(pg.instance.net.num_places() == 2 + 5 + 3 + 1 + 1);
  CHECK(pg.star_union.num_places() == 2 + 5);
  CHECK(pg.drowned.num_places() == 2 + 5 + 3);
  CHECK(is_sentence(pg.instance.formula.fo));
  CHECK(pg.instance.structure == Structure::Ug);
  // The first step out of the drowned start is unique among its successors.
  for (const auto& s : successors(pg.drowned, pg.drowned_start)) {
    Truth t = guarded_eval(pg.drowned, pg.first_step, {{"x", pg.drowned_start}, {"y", s}}, Structure::Urg);
    REQUIRE(t != Truth::Unknown);
    CHECK((t == Truth::True) == (s == pg.drowned_entry));
  }
}

// ---------------------------------------------------------------- contracts

TEST_CASE("expected verdicts come from the named oracle") {
  PetriNet n1 = net_of("net a\nplace p init 1\ntrans t\nin p:1\n");
  PetriNet n2 = net_of("net b\nplace p init 1\n");
  GadgetSources src{{n1, n2}, std::nullopt, std::nullopt, std::nullopt, nullptr};
  CHECK(expected_verdict(build_union_net(n1, n2), src) == false);
  CHECK(expected_verdict(build_union_net(n1, n2, UnionFormula::Positive), src) == true);
  CHECK(expected_verdict(build_union_net(n1, n2, UnionFormula::Containment), src) == false);
  GadgetSources qsrc;
  qsrc.qbf = parse_qbf("E p1 A p2 (p1 | p2)");
  CHECK(expected_verdict(build_qbf_net(*qsrc.qbf), qsrc) == true);
}
