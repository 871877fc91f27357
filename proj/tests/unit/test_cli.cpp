#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "pnmc/gadgets.hpp"
#include "testkit.hpp"

using namespace pnmc;
using namespace testkit;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// A fresh directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / ("pnmc_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

Json json_of(const Outcome& o) {
  REQUIRE_MESSAGE(o.code <= 2, o.err);
  return Json::parse(o.out);
}

const char* kDeadlock = "net dl\nplace p init 1\ntrans t\nin p:1\n";
const char* kCounter = "net inc\nplace p init 0\ntrans t\nout p:1\n";

}  // namespace

TEST_CASE("check: deadlock on a bounded net fails with the marking as witness") {
  Scratch s("deadlock");
  auto o = run_cli({"check", s.write("dl.net", kDeadlock), "-e", "forall x . exists y . x -> y"});
  CHECK(o.code == 1);
  CHECK(o.out.rfind("FAILS explicit_fo", 0) == 0);
  CHECK(o.out.find("(0)") != std::string::npos);
  auto j = json_of(run_cli({"--format", "json", "check", s.path("dl.net"), "-e", "forall x . exists y . x -> y"}));
  CHECK(j["verdict"] == "fails");
  CHECK(j["exit_code"] == 1);
  CHECK(j["witness"].get<std::string>().find("(0)") != std::string::npos);
}

TEST_CASE("check: reading the formula from a file") {
  Scratch s("formula_file");
  auto o = run_cli({"check", s.write("dl.net", kDeadlock), s.write("f.fo", "exists x . init(x) & exists y . x -> y\n")});
  CHECK(o.code == 0);
}

TEST_CASE("check: reachability atoms on an unbounded net have no decidable route") {
  Scratch s("undec");
  auto o = run_cli({"check", s.write("inc.net", kCounter), "-e", "forall x y . x -> y | y ->* x"});
  CHECK(o.code == 2);
  CHECK(o.out.find("reason=\"no decidable route\"") != std::string::npos);
  auto j = json_of(run_cli({"--format", "json", "check", s.path("inc.net"), "-e", "forall x y . x -> y | y ->* x"}));
  CHECK(j["reason"] == "no decidable route");
  CHECK(j["route"]["engine"].is_null());
}

TEST_CASE("check: semilinear side inputs open a route and are verified on request") {
  Scratch s("side");
  std::string net = s.write("inc.net", kCounter);
  std::string reach = s.write("reach.pres", "p >= 0");
  std::string star = s.write("star.pres", "p' >= p");
  auto o = run_cli({"check", net, "-e", "forall x y . x ->* y | y ->* x", "--reach-formula", reach, "--star-formula",
                    star, "--verify-inputs"});
  CHECK(o.code == 0);
  CHECK(o.out.find("mc_fo_semilinear") != std::string::npos);
  std::string wrong = s.write("wrong.pres", "p <= 2");
  auto bad = run_cli({"check", net, "-e", "exists x . x = x", "--reach-formula", wrong, "--verify-inputs"});
  CHECK(bad.code == 4);
  CHECK(bad.err.find("disagree") != std::string::npos);
}

TEST_CASE("check: QBF gadget replays to the QBF truth value") {
  Scratch s("qbf");
  std::mt19937_64 rng(51);
  for (unsigned table = 0; table < 16; ++table) {
    std::string text = "E p1 A p2 (";
    bool first = true;
    for (unsigned row = 0; row < 4; ++row) {
      if (!((table >> row) & 1u)) continue;
      text += std::string(first ? "" : " | ") + "(" + ((row & 1u) ? "p1" : "!p1") + " & " + ((row & 2u) ? "p2" : "!p2") + ")";
      first = false;
    }
    text += first ? "false)" : ")";
    std::string dir = s.path("q" + std::to_string(table));
    REQUIRE(run_cli({"gadget", "qbf", text, "--out", dir}).code == 0);
    auto o = run_cli({"check", "--contract", dir + "/contract.json"});
    INFO(text);
    CHECK(o.code == (qbf_truth(parse_qbf(text)) ? 0 : 1));
    CHECK(o.out.find("(match)") != std::string::npos);
  }
}

TEST_CASE("explore: output shapes") {
  Scratch s("explore");
  std::string single = s.write("e.net", "net e\nplace p init 3\n");
  auto dot = run_cli({"--format", "dot", "explore", single});
  CHECK(dot.code == 0);
  CHECK(dot.out.find("n0 [") != std::string::npos);
  CHECK(dot.out.find("n1 [") == std::string::npos);
  CHECK(dot.out.find("->") == std::string::npos);

  auto inc = json_of(run_cli({"--format", "json", "--cap", "7", "explore", s.write("inc.net", kCounter)}));
  CHECK(inc["complete"] == false);
  CHECK(inc["nodes"].size() == 7);
  CHECK(inc["boundedness"]["verdict"] == "unbounded");
}

TEST_CASE("explore: union gadget graphs match the library exploration") {
  Scratch s("explore_union");
  std::mt19937_64 rng(52);
  auto corpus = pair_corpus(rng, 6);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::string a = s.write("a.net", serialize(corpus[i].first)), b = s.write("b.net", serialize(corpus[i].second));
    std::string dir = s.path("u" + std::to_string(i));
    REQUIRE(run_cli({"gadget", "union", a, b, "--out", dir}).code == 0);
    auto j = json_of(run_cli({"--format", "json", "explore", dir + "/union.net"}));
    auto g = explore(build_union_net(corpus[i].first, corpus[i].second).net);
    std::size_t edges = 0;
    for (const auto& e : g.edges) edges += e.size();
    CHECK(j["nodes"].size() == g.size());
    CHECK(j["edges"].size() == edges);
    CHECK(j["complete"] == true);
    auto dot = run_cli({"--format", "dot", "explore", dir + "/union.net"});
    std::size_t arrows = 0;
    for (std::size_t pos = dot.out.find(" -> "); pos != std::string::npos; pos = dot.out.find(" -> ", pos + 1)) ++arrows;
    CHECK(arrows == edges);
  }
}

TEST_CASE("gadget: every replayable contract replays to its advertised verdict") {
  Scratch s("replay");
  std::mt19937_64 rng(53);
  NetShape shape = small_shape();
  shape.allow_neutral = false;
  const std::vector<std::string> pair_kinds = {"union",         "union-two-var", "union-positive",
                                               "union-forward", "union-containment", "union-plus",
                                               "union-ml",      "star-union",    "union-lambda"};
  std::size_t replayed = 0, i = 0;
  for (const auto& pair : pair_corpus(rng, 8, shape)) {
    std::string a = s.write("a.net", serialize(pair.first)), b = s.write("b.net", serialize(pair.second));
    for (const auto& kind : pair_kinds) {
      std::string dir = s.path(kind + std::to_string(i));
      auto made = run_cli({"gadget", kind, a, b, "--out", dir});
      REQUIRE_MESSAGE(made.code == 0, made.err);
      Json c = Json::parse(std::ifstream(dir + "/contract.json"));
      if (!c["replayable"].get<bool>()) continue;
      auto o = run_cli({"check", "--contract", dir + "/contract.json"});
      INFO(kind, "\n", serialize(pair.first), serialize(pair.second));
      CHECK(o.code == (c["expected"] == "holds" ? 0 : 1));
      ++replayed;
    }
    PetriNet single = oracle::without_neutral(pair.first);
    std::string net = s.write("n.net", serialize(single));
    for (const std::string kind : {"nonreach", "budget", "ug"}) {
      std::string dir = s.path(kind + std::to_string(i));
      bool empty_preset = false;
      for (std::size_t t = 0; t < single.num_transitions(); ++t) {
        bool any = false;
        for (std::size_t p = 0; p < single.num_places(); ++p) any = any || single.pre(t, p) > 0;
        empty_preset = empty_preset || !any;
      }
      int made = run_cli({"gadget", kind, net, "--out", dir}).code;
      if (kind == std::string("nonreach") && empty_preset) {
        CHECK(made == 3);
        continue;
      }
      REQUIRE(made == 0);
      Json c = Json::parse(std::ifstream(dir + "/contract.json"));
      REQUIRE(c["replayable"].get<bool>());
      auto o = run_cli({"check", "--contract", dir + "/contract.json"});
      INFO(kind, "\n", serialize(single));
      CHECK(o.code == (c["expected"] == "holds" ? 0 : 1));
      ++replayed;
    }
    ++i;
  }
  CHECK(replayed >= 8 * 2 + 8 * 8);
}

TEST_CASE("gadget: reach instance from marking flags") {
  Scratch s("reach");
  std::string net = s.write("d.net", "net d\nplace p init 0\ntrans t\nin p:1\n");
  REQUIRE(run_cli({"gadget", "reach", net, "--m1", "2", "--m2", "0", "--out", s.path("yes")}).code == 0);
  CHECK(run_cli({"check", "--contract", s.path("yes/contract.json")}).code == 0);
  REQUIRE(run_cli({"gadget", "reach", net, "--m1", "2", "--m2", "3", "--out", s.path("no")}).code == 0);
  CHECK(run_cli({"check", "--contract", s.path("no/contract.json")}).code == 1);
  auto c = Json::parse(std::ifstream(s.path("yes/contract.json")));
  CHECK(c["sources"]["m1"] == "(2)");
  CHECK(c["expected"] == "holds");
}

TEST_CASE("gadget: drown and pileup write their files") {
  Scratch s("drown");
  std::string net = s.write("d.net", kDeadlock);
  auto made = run_cli({"gadget", "drown", net, "--sentence-text", "exists x . !(x -> x)", "--out", s.path("d")});
  REQUIRE_MESSAGE(made.code == 0, made.err);
  auto c = Json::parse(std::ifstream(s.path("d/contract.json")));
  CHECK(c["expected"] == "holds");
  CHECK(c["replayable"] == false);
  CHECK(fs::exists(s.path("d/drown.formula")));
  CHECK(run_cli({"gadget", "drown", net, "--out", s.path("d2")}).code == 3);
  std::string other = s.write("o.net", "net o\nplace p init 1\n");
  CHECK(run_cli({"gadget", "pileup", net, other, "--out", s.path("p")}).code == 0);
}

TEST_CASE("gadget list names every catalogue entry") {
  auto j = json_of(run_cli({"--format", "json", "gadget", "list"}));
  CHECK(j["gadgets"].size() == 16);
  CHECK(j["formulas"].size() == fixed_formulas().size());
}

TEST_CASE("classify surfaces the fragment report") {
  auto base = json_of(run_cli({"--format", "json", "classify", "-e", to_string(fixed_fo("union"))}));
  CHECK(base["predicates"] == Json::array({"->"}));
  CHECK(base["existential"] == false);
  CHECK(base["positive"] == false);
  CHECK(base["forward"] == false);
  auto small = json_of(run_cli({"--format", "json", "classify", "-e", "exists x . !(x -> x)"}));
  CHECK(small["existential"] == true);
  CHECK(small["positive"] == false);
  CHECK(small["variable_count"] == 1);
  auto pos = json_of(run_cli({"--format", "json", "classify", "-e", to_string(fixed_fo("union_positive"))}));
  CHECK(pos["positive"] == true);
  auto ml = json_of(run_cli({"--format", "json", "classify", "-e", "dia box {p >= 1}"}));
  CHECK(ml["kind"] == "ml");
  CHECK(ml["modal_degree"] == 2);
  CHECK(ml["has_paml"] == true);
}

TEST_CASE("presburger subcommand") {
  auto yes = run_cli({"presburger", "decide", "-e", "forall x . exists y . x = 2*y | x = 2*y + 1"});
  CHECK(yes.code == 0);
  CHECK(yes.out == "true\n");
  CHECK(run_cli({"presburger", "decide", "-e", "exists x . 2*x = 1"}).code == 1);
  CHECK(run_cli({"presburger", "decide", "-e", "x = 1"}).code == 3);
  auto qf = run_cli({"presburger", "eliminate", "-e", "exists y . x = 2*y"});
  CHECK(qf.code == 0);
  Pres back = parse_presburger(qf.out);
  CHECK(is_quantifier_free(back));
  for (int x = 0; x < 10; ++x) CHECK(evaluate(back, {{"x", x}}) == (x % 2 == 0));
}

TEST_CASE("exit codes for errors") {
  Scratch s("errors");
  std::string net = s.write("dl.net", kDeadlock);
  CHECK(run_cli({"check", net, "-e", "forall x ."}).code == 3);
  CHECK(run_cli({"check", s.path("missing.net"), "-e", "true"}).code == 4);
  CHECK(run_cli({"--engine", "nope", "check", net, "-e", "true"}).code == 3);
  CHECK(run_cli({"--format", "dot", "check", net, "-e", "true"}).code == 3);
  CHECK(run_cli({"--cap", "0", "explore", net}).code == 3);
  CHECK(run_cli({"gadget", "nosuch", net, "--out", s.path("x")}).code == 3);
  CHECK(run_cli({"gadget", "reach", net, "--m1", "1,2", "--m2", "0", "--out", s.path("x")}).code == 3);
  CHECK(run_cli({"gadget", "reach", net, "--m1", "0", "--m2", "1", "--out", s.path("x")}).code == 3);
  CHECK(run_cli({"gadget", "qbf", "A p1 E p2 (p1)", "--out", s.path("x")}).code == 3);
  CHECK(run_cli({"check", s.write("bad.net", "net b\nplace p init -1\n"), "-e", "true"}).code == 3);
  CHECK(run_cli({}).code == 3);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("engine override runs the named engine") {
  Scratch s("override");
  std::string net = s.write("dl.net", kDeadlock);
  auto o = run_cli({"--engine", "mc_exists_fo", "check", net, "-e", "exists x . x = x"});
  CHECK(o.code == 0);
  CHECK(o.out.find("mc_exists_fo") != std::string::npos);
  CHECK(run_cli({"--engine", "mc_exists_fo", "check", net, "-e", "forall x . exists y . x -> y"}).code == 3);
}

TEST_CASE("transition-graph structure with an evaluation point") {
  Scratch s("ug");
  std::string net = s.write("dl.net", kDeadlock);
  REQUIRE(run_cli({"gadget", "ug", net, "--out", s.path("g")}).code == 0);
  auto j = json_of(run_cli({"--format", "json", "check", "--contract", s.path("g/contract.json")}));
  CHECK(j["verdict"] == "holds");
  CHECK(j["structure"] == "ug");
  CHECK(j["matches"] == true);
  std::string formula = s.path("g/ug.formula");
  CHECK(run_cli({"check", s.path("g/ug.net"), formula, "--structure", "ug", "--at", "(2,0,0)"}).code == 1);
}
