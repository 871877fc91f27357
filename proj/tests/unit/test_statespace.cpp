#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pnmc/errors.hpp"
#include "pnmc/statespace.hpp"
#include "testkit.hpp"

using namespace pnmc;

namespace {
PetriNet counter() { return parse_net("net inc\nplace p init 0\ntrans t\nout p:1\n"); }

// Replays a witness with net-core and returns the final marking.
Marking replay(const PetriNet& net, const std::vector<std::string>& w) {
  Marking m = net.initial();
  for (const auto& t : w) m = fire(net, m, t);
  return m;
}

// Per-node BFS reachability in >= 1 steps.
std::set<std::size_t> bfs_plus(const ReachGraph& g, std::size_t u) {
  std::set<std::size_t> seen;
  std::deque<std::size_t> work(g.edges[u].begin(), g.edges[u].end());
  for (auto v : g.edges[u]) seen.insert(v);
  while (!work.empty()) {
    auto x = work.front();
    work.pop_front();
    for (auto y : g.edges[x])
      if (seen.insert(y).second) work.push_back(y);
  }
  return seen;
}
}  // namespace

TEST_CASE("explore basics") {
  PetriNet dead = parse_net("net d\nplace p init 0\ntrans t\nin p:1\n");
  ReachGraph g = explore(dead, 10);
  CHECK(g.size() == 1);
  CHECK(g.edges[0].empty());
  CHECK(g.complete);

  ReachGraph c = explore(counter(), 100);
  CHECK(c.size() == 100);
  CHECK_FALSE(c.complete);
  CHECK_THROWS_AS(explore(counter(), 0), PreconditionError);
}

TEST_CASE("explore matches brute force and is deterministic") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    PetriNet net = testkit::random_bounded_net(rng);
    ReachGraph g = explore(net);
    REQUIRE(g.complete);
    auto reach = testkit::brute_reach(net);
    CHECK(std::set<Marking>(g.nodes.begin(), g.nodes.end()) == reach);
    for (std::size_t u = 0; u < g.size(); ++u) {
      std::set<Marking> succ;
      for (auto v : g.edges[u]) succ.insert(g.nodes[v]);
      CHECK(succ == testkit::raw_successors(net, g.nodes[u]));
      CHECK(replay(net, g.path_to(u, net)) == g.nodes[u]);
    }
    ReachGraph again = explore(net);
    CHECK(again.nodes == g.nodes);
    auto km = is_bounded(net);
    CHECK(km.kind == BoundednessResult::Kind::Bounded);
    CHECK(km.reach_size == g.size());
  }
}

TEST_CASE("dot export") {
  PetriNet net = parse_net("net a\nplace p init 1\ntrans t\nin p:1\n");
  std::string dot = to_dot(explore(net), net);
  CHECK(dot.find("n0 [label=\"(1)\", shape=doublecircle]") != std::string::npos);
  CHECK(dot.find("n0 -> n1;") != std::string::npos);
}

TEST_CASE("closure") {
  PetriNet single = parse_net("net s\nplace p init 0\n");
  Closure a(explore(single));
  CHECK(a.star(0, 0));
  CHECK_FALSE(a.plus(0, 0));
  PetriNet loop = parse_net("net l\nplace p init 1\ntrans t\nin p:1\nout p:1\n");
  Closure b(explore(loop));
  CHECK(b.plus(0, 0));
  CHECK_THROWS_AS(Closure(explore(counter(), 5)), IncompleteGraphError);

  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    PetriNet net = testkit::random_bounded_net(rng);
    ReachGraph g = explore(net);
    Closure cl(g);
    for (std::size_t u = 0; u < g.size(); ++u) {
      auto plus = bfs_plus(g, u);
      for (std::size_t v = 0; v < g.size(); ++v) {
        CHECK(cl.plus(u, v) == (plus.count(v) > 0));
        CHECK(cl.star(u, v) == (u == v || plus.count(v) > 0));
      }
    }
  }
}

TEST_CASE("boundedness") {
  CHECK(is_bounded(counter()).kind == BoundednessResult::Kind::Unbounded);
  PetriNet shrink = parse_net("net s\nplace p init 3\nplace q init 2\ntrans t\nin p:1\ntrans u\nin q:2 p:1\nout p:1\n");
  auto r = is_bounded(shrink);
  CHECK(r.kind == BoundednessResult::Kind::Bounded);
  CHECK(r.reach_size == testkit::brute_reach(shrink).size());
  // Unbounded behind a bounded prefix.
  PetriNet late = parse_net("net l\nplace a init 1\nplace b init 0\ntrans go\nin a:1\nout b:1\ntrans pump\nin b:1\nout b:2\n");
  CHECK(is_bounded(late).kind == BoundednessResult::Kind::Unbounded);
  CHECK(is_bounded(shrink, 2).kind == BoundednessResult::Kind::Inconclusive);
}

TEST_CASE("coverability") {
  PetriNet net = counter();
  CHECK(coverable(net, Marking{0}).yes());
  auto v = coverable(net, Marking{7});
  REQUIRE(v.yes());
  CHECK(replay(net, v.witness)[0] >= 7);

  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    PetriNet n = testkit::random_bounded_net(rng);
    auto reach = testkit::brute_reach(n);
    for (int j = 0; j < 5; ++j) {
      Marking target(n.num_places());
      for (auto& x : target) x = testkit::uniform(rng, 0, 3);
      bool expected = std::any_of(reach.begin(), reach.end(), [&](const Marking& m) {
        for (std::size_t p = 0; p < m.size(); ++p)
          if (m[p] < target[p]) return false;
        return true;
      });
      auto c = coverable(n, target);
      CHECK(c.definitive());
      CHECK(c.yes() == expected);
      if (c.yes()) {
        Marking end = replay(n, c.witness);
        for (std::size_t p = 0; p < end.size(); ++p) CHECK(end[p] >= target[p]);
      }
    }
  }
}

TEST_CASE("reachability") {
  PetriNet net = counter();
  CHECK(reachable(net, Marking{0}).yes());
  auto r = reachable(net, Marking{5}, 100);
  REQUIRE(r.yes());
  CHECK(replay(net, r.witness) == Marking{5});
  // absent but coverable target in an unbounded net, small cap
  PetriNet even = parse_net("net e\nplace p init 0\ntrans t\nout p:2\n");
  auto odd = reachable(even, Marking{3}, 10);
  CHECK(odd.kind == ReachVerdict::Kind::Inconclusive);
  CHECK(odd.reason == "cap-exceeded");

  std::mt19937_64 rng(24);
  for (int i = 0; i < 100; ++i) {
    PetriNet n = testkit::random_bounded_net(rng);
    auto reach = testkit::brute_reach(n);
    Marking target(n.num_places());
    for (auto& x : target) x = testkit::uniform(rng, 0, 2);
    auto v = reachable(n, target);
    REQUIRE(v.definitive());
    CHECK(v.yes() == (reach.count(target) > 0));
    if (v.yes()) CHECK(replay(n, v.witness) == target);
  }
}

TEST_CASE("semilinear targets") {
  PetriNet net = parse_net("net a\nplace p init 2\nplace q init 0\ntrans t\nin p:1\nout q:1\n");
  CHECK(reach_semilinear(net, pa::truth()).yes());
  CHECK(reach_semilinear(net, marking_equals(place_vars(net), net.initial())).yes());
  CHECK(reach_semilinear(net, parse_presburger("p = 0 & q = 2")).yes());
  CHECK(reach_semilinear(net, parse_presburger("p + q = 3")).no());
  CHECK(reach_semilinear(net, parse_semilinear("base (0,1) periods (1,0)", 2)).yes());
  CHECK(reach_semilinear(net, parse_semilinear("empty", 2)).no());
  CHECK_THROWS_AS(reach_semilinear(net, parse_presburger("r = 1")), DimensionError);
  CHECK_THROWS_AS(reach_semilinear(net, parse_semilinear("base (1)", 1)), DimensionError);
  // upward-closed target in an unbounded net is answered by coverability
  auto up = reach_semilinear(counter(), parse_presburger("p >= 1000"), 5);
  CHECK(up.yes());
  auto never = reach_semilinear(parse_net("net d\nplace p init 1\ntrans t\nin p:1\nout p:2\n"), parse_presburger("p = 0"), 5);
  CHECK(never.kind == ReachVerdict::Kind::Inconclusive);
  CHECK(reach_semilinear(counter(), parse_presburger("p < 0"), 5).no());

  // deadlock-set target: no neutral transition enabled
  std::mt19937_64 rng(25);
  for (int i = 0; i < 50; ++i) {
    PetriNet n = testkit::random_bounded_net(rng);
    auto vars = place_vars(n);
    std::vector<Pres> parts;
    bool any_enabled_everywhere = true;
    for (auto t : neutral_transitions(n)) {
      std::vector<Pres> guard;
      for (std::size_t p = 0; p < n.num_places(); ++p)
        guard.push_back(pa::ge(LinTerm::var(vars[p]), LinTerm::num(BigInt(n.pre(t, p)))));
      parts.push_back(pa::neg(pa::conj(guard)));
    }
    (void)any_enabled_everywhere;
    Pres z = pa::conj(parts);
    bool expected = false;
    for (const auto& m : testkit::brute_reach(n)) {
      bool none = true;
      for (auto t : neutral_transitions(n))
        if (testkit::raw_enabled(n, m, t)) none = false;
      if (none) expected = true;
    }
    auto v = reach_semilinear(n, z);
    REQUIRE(v.definitive());
    CHECK(v.yes() == expected);
  }
}

TEST_CASE("hack reduction") {
  PetriNet net = parse_net("net a\nplace p init 2\nplace q init 0\ntrans t\nin p:1\nout q:1\n");
  SemilinearSet m0{2, {LinearSet{{2, 0}, {}}}};
  auto h = hack_reduce(net, m0);
  CHECK(reachable(h.net, h.target).yes());
  SemilinearSet absent{2, {LinearSet{{0, 3}, {}}}};
  auto h2 = hack_reduce(net, absent);
  CHECK(reachable(h2.net, h2.target).no());
  CHECK(parse_net(serialize(h.net)) == h.net);

  std::mt19937_64 rng(26);
  int compared = 0;
  for (int i = 0; i < 50; ++i) {
    PetriNet n = testkit::random_bounded_net(rng);
    LinearSet l;
    l.base.resize(n.num_places());
    for (auto& x : l.base) x = testkit::uniform(rng, 0, 2);
    for (std::size_t k = testkit::uniform(rng, 0, 2); k > 0; --k) {
      std::vector<Tokens> y(n.num_places());
      for (auto& x : y) x = testkit::uniform(rng, 0, 1);
      l.periods.push_back(y);
    }
    SemilinearSet s{n.num_places(), {l}};
    auto direct = reach_semilinear(n, s);
    auto hr = hack_reduce(n, s);
    auto reduced = reachable(hr.net, hr.target);
    bool expected = false;
    for (const auto& m : testkit::brute_reach(n))
      if (membership_enumerate(l, m)) expected = true;
    REQUIRE(direct.definitive());
    CHECK(direct.yes() == expected);
    if (reduced.definitive()) {
      ++compared;
      CHECK(reduced.yes() == expected);
    }
  }
  CHECK(compared >= 40);
}

TEST_CASE("reach oracle") {
  PetriNet net = parse_net("net a\nplace p init 2\nplace q init 0\ntrans t\nin p:1\nout q:1\n");
  ReachOracle o(net, 100);
  CHECK(o.contains(Marking{1, 1}).yes());
  CHECK(o.contains(Marking{1, 0}).no());
  ReachOracle c(counter(), 5);
  CHECK(c.contains(Marking{3}).yes());
  CHECK(c.contains(Marking{30}).kind == ReachVerdict::Kind::Inconclusive);
}

TEST_CASE("audit counters") {
  reset_audit();
  explore(counter(), 3);
  CHECK(audit().truncated_explorations == 1);
  reachable(parse_net("net e\nplace p init 0\ntrans t\nout p:2\n"), Marking{3}, 10);
  CHECK(audit().truncated_absence_claims == 0);
}
