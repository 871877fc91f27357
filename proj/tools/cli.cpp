#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "pnmc/engines.hpp"
#include "pnmc/errors.hpp"
#include "pnmc/gadgets.hpp"
#include "pnmc/logic.hpp"
#include "pnmc/net.hpp"
#include "pnmc/presburger.hpp"
#include "pnmc/statespace.hpp"

namespace pnmc::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::size_t node_cap = kDefaultCap;
  std::size_t formula_budget = QeOptions{}.budget;
  std::string output = "text";
  std::string engine;  // override; empty means route
};

std::string read_text(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// A path argument or inline text given with -e.
struct TextSource {
  std::string path;
  std::string text;
  bool given() const { return !path.empty() || !text.empty(); }
  std::string get(const char* what) const {
    if (!text.empty()) return text;
    if (!path.empty()) return read_text(path);
    throw UsageError(std::string("no ") + what + " given");
  }
};

PetriNet load_net(const std::string& path) { return parse_net(read_text(path)); }

std::string formula_text(const AnyFormula& f) { return f.is_fo() ? to_string(f.fo) : to_string(f.ml); }

const char* verdict_word(CheckVerdict::Kind k) {
  switch (k) {
    case CheckVerdict::Kind::Holds: return "holds";
    case CheckVerdict::Kind::Fails: return "fails";
    case CheckVerdict::Kind::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const char* boundedness_word(BoundednessResult::Kind k) {
  switch (k) {
    case BoundednessResult::Kind::Bounded: return "bounded";
    case BoundednessResult::Kind::Unbounded: return "unbounded";
    case BoundednessResult::Kind::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Structure parse_structure(const std::string& s) { return s == "ug" ? Structure::Ug : Structure::Urg; }
const char* structure_word(Structure s) { return s == Structure::Ug ? "ug" : "urg"; }
CheckMode parse_mode(const std::string& s) { return s == "validity" ? CheckMode::Validity : CheckMode::ModelCheck; }
const char* mode_word(CheckMode m) { return m == CheckMode::Validity ? "validity" : "check"; }

Json marking_json(const Marking& m) { return Json(std::vector<Tokens>(m.begin(), m.end())); }

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::string net_path;
  TextSource formula;
  std::string reach_path, star_path;
  bool verify_inputs = false;
  std::string structure = "urg";
  std::string mode = "check";
  std::string at;
  std::string contract_path;
};

int cmd_check(CheckArgs a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::optional<bool> expected;
  if (!a.contract_path.empty()) {
    if (!a.net_path.empty() || a.formula.given())
      throw UsageError("--contract supplies the net and formula; do not pass them as well");
    Json c = Json::parse(read_text(a.contract_path));
    fs::path base = fs::path(a.contract_path).parent_path();
    a.net_path = (base / c.at("net").get<std::string>()).string();
    a.formula.path = (base / c.at("formula").get<std::string>()).string();
    a.mode = c.at("mode").get<std::string>();
    a.structure = c.at("structure").get<std::string>();
    a.at = c.at("at").is_null() ? "" : c.at("at").get<std::string>();
    if (!c.at("expected").is_null()) expected = c.at("expected").get<std::string>() == "holds";
  }
  if (a.net_path.empty()) throw UsageError("no net given");
  PetriNet net = load_net(a.net_path);

  CheckRequest req;
  req.formula = parse_any(a.formula.get("formula"));
  req.structure = parse_structure(a.structure);
  req.mode = parse_mode(a.mode);
  req.options.cap = cfg.node_cap;
  req.options.qe.budget = cfg.formula_budget;
  if (!a.at.empty()) req.at = parse_marking(a.at, net.num_places());
  if (!a.reach_path.empty()) req.side.reach = parse_presburger(read_text(a.reach_path));
  if (!a.star_path.empty()) req.side.star = parse_presburger(read_text(a.star_path));

  if (a.verify_inputs && (req.side.reach || req.side.star)) {
    std::string disagreement = verify_side_inputs(net, req.side, cfg.node_cap);
    if (!disagreement.empty()) {
      err << "side inputs disagree with exploration: " << disagreement << "\n";
      return kOtherError;
    }
  }

  EngineRoute r = route(net, req);
  CheckVerdict v;
  if (!cfg.engine.empty()) {
    r = {cfg.engine, "selected with --engine"};
    v = run_engine(cfg.engine, net, req);
  } else {
    v = check(net, req);
  }
  int code = exit_code(v);

  if (cfg.output == "json") {
    Json j;
    j["net"] = net.name();
    j["formula"] = formula_text(req.formula);
    j["structure"] = structure_word(req.structure);
    j["mode"] = mode_word(req.mode);
    j["verdict"] = verdict_word(v.kind);
    j["engine"] = v.engine;
    j["reason"] = v.reason.empty() ? Json() : Json(v.reason);
    j["witness"] = v.witness.empty() ? Json() : Json(v.witness);
    j["route"] = {{"engine", r.engine.empty() ? Json() : Json(r.engine)}, {"justification", r.justification}};
    if (!a.contract_path.empty()) {
      j["expected"] = expected ? Json(*expected ? "holds" : "fails") : Json();
      j["matches"] = expected && v.definitive() ? Json(v.is_holds() == *expected) : Json();
    }
    j["exit_code"] = code;
    out << j.dump(2) << "\n";
  } else {
    out << v.line() << "\n";
    err << "route: " << (r.engine.empty() ? "none" : r.engine) << " (" << r.justification << ")\n";
    if (!a.contract_path.empty()) {
      out << "expected: " << (expected ? (*expected ? "holds" : "fails") : "unknown");
      if (expected && v.definitive()) out << (v.is_holds() == *expected ? " (match)" : " (MISMATCH)");
      out << "\n";
    }
  }
  return code;
}

// ---------------------------------------------------------------- explore

int cmd_explore(const std::string& net_path, const RunConfig& cfg, std::ostream& out) {
  PetriNet net = load_net(net_path);
  ReachGraph g = explore(net, cfg.node_cap);
  BoundednessResult b = is_bounded(net, cfg.node_cap);
  std::size_t edge_count = 0;
  for (const auto& e : g.edges) edge_count += e.size();

  if (cfg.output == "json") {
    Json j;
    j["net"] = net.name();
    Json places = Json::array();
    for (std::size_t p = 0; p < net.num_places(); ++p) places.push_back(net.place_name(p));
    j["places"] = places;
    j["complete"] = g.complete;
    j["initial"] = g.initial;
    Json nodes = Json::array();
    for (std::size_t i = 0; i < g.size(); ++i) nodes.push_back({{"id", i}, {"marking", marking_json(g.nodes[i])}});
    j["nodes"] = nodes;
    Json edges = Json::array();
    for (std::size_t i = 0; i < g.size(); ++i)
      for (auto k : g.edges[i]) edges.push_back({i, k});
    j["edges"] = edges;
    j["boundedness"] = {{"verdict", boundedness_word(b.kind)},
                        {"reach_size", b.kind == BoundednessResult::Kind::Bounded ? Json(b.reach_size) : Json()},
                        {"coverability_nodes", b.nodes}};
    out << j.dump(2) << "\n";
  } else if (cfg.output == "dot") {
    out << "// boundedness: " << boundedness_word(b.kind) << "\n" << to_dot(g, net);
  } else {
    out << "net " << net.name() << "\n"
        << "nodes " << g.size() << "\n"
        << "edges " << edge_count << "\n"
        << "complete " << (g.complete ? "yes" : "no") << "\n"
        << "boundedness " << boundedness_word(b.kind);
    if (b.kind == BoundednessResult::Kind::Bounded) out << " (" << b.reach_size << " reachable markings)";
    out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- gadget

struct GadgetKind {
  const char* name;
  const char* inputs;
  const char* summary;
};

const std::vector<GadgetKind>& gadget_kinds() {
  static const std::vector<GadgetKind> kinds = {
      {"union", "NET1 NET2", "union net with the equality sentence"},
      {"union-two-var", "NET1 NET2", "union net with the two-variable sentence"},
      {"union-positive", "NET1 NET2", "union net with the positive sentence (Reach(NET2) within Reach(NET1))"},
      {"union-forward", "NET1 NET2", "union net with the forward sentence"},
      {"union-containment", "NET1 NET2", "union net with the containment sentence (Reach(NET1) within Reach(NET2))"},
      {"union-plus", "NET1 NET2", "union net with the ->+ sentence"},
      {"union-ml", "NET1 NET2", "union net with the modal formula, checked for validity"},
      {"star-union", "NET1 NET2", "loop-free union net with the ->* sentence"},
      {"union-lambda", "NET1 NET2", "3-cycle augmented union with the undirected-edge sentence"},
      {"qbf", "QBF", "modal formula true at M0 iff the QBF is true"},
      {"reach", "NET --m1 M --m2 M", "modal witness for M2 reachable from M1"},
      {"nonreach", "NET", "modal validity iff the zero marking is unreachable"},
      {"budget", "NET", "budget place plus one neutral transition"},
      {"drown", "NET --sentence FILE", "drowned net and sentence with the same truth value"},
      {"ug", "NET", "transition-graph gadget with a definable initial marking"},
      {"pileup", "NET1 NET2", "star union, drowned, then lifted to the transition graph"},
  };
  return kinds;
}

struct GadgetArgs {
  std::string kind;
  std::vector<std::string> inputs;
  std::string m1, m2;
  TextSource sentence;
  std::string out_dir;
};

std::optional<UnionFormula> union_variant(const std::string& kind) {
  static const std::map<std::string, UnionFormula> table = {
      {"union", UnionFormula::Equality},        {"union-two-var", UnionFormula::TwoVariable},
      {"union-positive", UnionFormula::Positive}, {"union-forward", UnionFormula::Forward},
      {"union-containment", UnionFormula::Containment}, {"union-plus", UnionFormula::Plus},
      {"union-ml", UnionFormula::MlValidity},
  };
  auto it = table.find(kind);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

int cmd_gadget_list(const RunConfig& cfg, std::ostream& out) {
  if (cfg.output == "json") {
    Json j;
    Json kinds = Json::array();
    for (const auto& k : gadget_kinds()) kinds.push_back({{"name", k.name}, {"inputs", k.inputs}, {"summary", k.summary}});
    j["gadgets"] = kinds;
    Json fixed = Json::array();
    for (const auto& f : fixed_formulas())
      fixed.push_back({{"name", f.name}, {"summary", f.summary}, {"formula", formula_text(f.formula)}});
    j["formulas"] = fixed;
    out << j.dump(2) << "\n";
    return 0;
  }
  out << "gadgets:\n";
  for (const auto& k : gadget_kinds()) out << "  " << k.name << " " << k.inputs << "\n      " << k.summary << "\n";
  out << "fixed formulas:\n";
  for (const auto& f : fixed_formulas()) out << "  " << f.name << ": " << formula_text(f.formula) << "\n";
  return 0;
}

int cmd_gadget(const GadgetArgs& a, const RunConfig& cfg, std::ostream& out) {
  if (a.kind == "list") return cmd_gadget_list(cfg, out);
  auto known = std::find_if(gadget_kinds().begin(), gadget_kinds().end(),
                            [&](const GadgetKind& k) { return a.kind == k.name; });
  if (known == gadget_kinds().end()) throw UsageError("unknown gadget '" + a.kind + "' (see 'gadget list')");
  if (a.out_dir.empty()) throw UsageError("--out is required");

  auto expect_inputs = [&](std::size_t n) {
    if (a.inputs.size() != n)
      throw UsageError("gadget '" + a.kind + "' takes " + known->inputs + ", got " + std::to_string(a.inputs.size()) +
                       " positional arguments");
  };

  GadgetSources src;
  GadgetInstance g;
  if (auto variant = union_variant(a.kind)) {
    expect_inputs(2);
    src.nets = {load_net(a.inputs[0]), load_net(a.inputs[1])};
    g = build_union_net(src.nets[0], src.nets[1], *variant);
  } else if (a.kind == "star-union" || a.kind == "union-lambda" || a.kind == "pileup") {
    expect_inputs(2);
    src.nets = {load_net(a.inputs[0]), load_net(a.inputs[1])};
    if (a.kind == "star-union") g = build_star_union_net(src.nets[0], src.nets[1]);
    else if (a.kind == "union-lambda") g = build_lambda_union(src.nets[0], src.nets[1]);
    else g = build_pileup(src.nets[0], src.nets[1]).instance;
  } else if (a.kind == "qbf") {
    expect_inputs(1);
    src.qbf = parse_qbf(a.inputs[0]);
    g = build_qbf_net(*src.qbf);
  } else {
    expect_inputs(1);
    src.nets = {load_net(a.inputs[0])};
    const PetriNet& n = src.nets[0];
    if (a.kind == "reach") {
      if (a.m1.empty() || a.m2.empty()) throw UsageError("gadget 'reach' needs --m1 and --m2");
      src.m1 = parse_marking(a.m1, n.num_places());
      src.m2 = parse_marking(a.m2, n.num_places());
      g = build_reach_gadget(n, *src.m1, *src.m2);
    } else if (a.kind == "nonreach") {
      g = build_nonreach_gadget(n);
    } else if (a.kind == "budget") {
      g = build_budget_reduction(n).instance;
    } else if (a.kind == "drown") {
      src.sentence = parse_fo_sentence(a.sentence.get("sentence (--sentence FILE or --sentence-text TEXT)"));
      g = build_drown_net(n, src.sentence).instance;
    } else {
      g = build_ug_gadget(n).instance;
    }
  }

  std::optional<bool> expected = expected_verdict(g, src, cfg.node_cap);
  bool replayable = expected.has_value() &&
                    (g.structure == Structure::Ug ? g.at.has_value()
                                                  : is_bounded(g.net, cfg.node_cap).kind == BoundednessResult::Kind::Bounded);

  fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::string net_file = a.kind + ".net", formula_file = a.kind + ".formula";
  write_text(dir / net_file, serialize(g.net));
  write_text(dir / formula_file, formula_text(g.formula) + "\n");

  Json c;
  c["gadget"] = g.kind;
  c["net"] = net_file;
  c["formula"] = formula_file;
  c["formula_kind"] = g.formula.is_fo() ? "fo" : "ml";
  c["contract"] = g.contract;
  c["oracle"] = g.oracle;
  c["mode"] = mode_word(g.mode);
  c["structure"] = structure_word(g.structure);
  c["at"] = g.at ? Json(format_marking(*g.at)) : Json();
  c["expected"] = expected ? Json(*expected ? "holds" : "fails") : Json();
  c["replayable"] = replayable;
  Json sources;
  Json nets = Json::array();
  for (const auto& n : src.nets) nets.push_back(n.name());
  sources["nets"] = nets;
  sources["qbf"] = src.qbf ? Json(to_string(*src.qbf)) : Json();
  sources["m1"] = src.m1 ? Json(format_marking(*src.m1)) : Json();
  sources["m2"] = src.m2 ? Json(format_marking(*src.m2)) : Json();
  sources["sentence"] = src.sentence ? Json(to_string(src.sentence)) : Json();
  c["sources"] = sources;
  Json maps = Json::array();
  for (const auto& m : g.place_map) maps.push_back(Json(m));
  c["place_map"] = maps;
  c["notes"] = g.notes;
  write_text(dir / "contract.json", c.dump(2) + "\n");

  if (cfg.output == "json") {
    Json j = {{"gadget", g.kind},
              {"files", {(dir / net_file).string(), (dir / formula_file).string(), (dir / "contract.json").string()}},
              {"expected", c["expected"]}};
    out << j.dump(2) << "\n";
  } else {
    out << (dir / net_file).string() << "\n" << (dir / formula_file).string() << "\n"
        << (dir / "contract.json").string() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const TextSource& src, const RunConfig& cfg, std::ostream& out) {
  AnyFormula f = parse_any(src.get("formula"));
  FragmentReport r = f.is_fo() ? classify(f.fo) : classify(f.ml);
  std::vector<std::string> preds;
  for (auto p : r.predicates_used) preds.emplace_back(predicate_symbol(p));
  if (cfg.output == "json") {
    Json j;
    j["formula"] = formula_text(f);
    j["kind"] = f.is_fo() ? "fo" : "ml";
    j["variable_count"] = r.variable_count;
    j["predicates"] = preds;
    j["existential"] = r.is_existential;
    j["positive"] = r.is_positive;
    j["forward"] = r.is_forward;
    j["modal_degree"] = r.modal_degree ? Json(*r.modal_degree) : Json();
    j["has_inverse"] = r.has_inverse;
    j["has_paml"] = r.has_paml;
    out << j.dump(2) << "\n";
    return 0;
  }
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  out << "formula " << formula_text(f) << "\n";
  if (f.is_fo()) {
    out << "variables " << r.variable_count << "\npredicates";
    for (const auto& p : preds) out << " " << p;
    out << "\nexistential " << yn(r.is_existential) << "\npositive " << yn(r.is_positive) << "\nforward "
        << yn(r.is_forward) << "\n";
  } else {
    out << "modal-degree " << r.modal_degree.value_or(0) << "\ninverse " << yn(r.has_inverse) << "\npresburger-atoms "
        << yn(r.has_paml) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- presburger

int cmd_presburger(const std::string& action, const TextSource& src, const RunConfig& cfg, std::ostream& out) {
  Pres f = parse_presburger(src.get("Presburger formula"));
  QeOptions opts{cfg.formula_budget};
  if (action == "eliminate") {
    Pres qf = eliminate(f, opts);
    if (cfg.output == "json") out << Json{{"input", to_string(f)}, {"quantifier_free", to_string(qf)}}.dump(2) << "\n";
    else out << to_string(qf) << "\n";
    return 0;
  }
  auto free = free_vars(f);
  if (!free.empty()) throw UnboundVariableError("decide needs a sentence; free variable " + *free.begin());
  bool value = decide(f, opts);
  if (cfg.output == "json") out << Json{{"input", to_string(f)}, {"value", value}}.dump(2) << "\n";
  else out << (value ? "true" : "false") << "\n";
  return value ? kHolds : kFails;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model checking of reachability graphs of Petri nets", "pnmc"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_option("--cap", cfg.node_cap, "node cap for explicit explorations")->check(CLI::PositiveNumber);
  app.add_option("--budget", cfg.formula_budget, "maximal Presburger formula size")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.output, "output format")->check(CLI::IsMember({"text", "json", "dot"}));
  app.add_option("--engine", cfg.engine, "run this engine instead of routing")->check(CLI::IsMember(engine_names()));

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "check a formula on a net; exit 0 holds, 1 fails, 2 inconclusive");
  check_cmd->add_option("net", check_args.net_path, "net file");
  check_cmd->add_option("formula", check_args.formula.path, "formula file ('-' for stdin)");
  check_cmd->add_option("-e,--formula-text", check_args.formula.text, "formula given inline");
  check_cmd->add_option("--reach-formula", check_args.reach_path, "Presburger formula for the reachability set");
  check_cmd->add_option("--star-formula", check_args.star_path, "Presburger formula for the reachability relation");
  check_cmd->add_flag("--verify-inputs", check_args.verify_inputs, "compare side inputs with a capped exploration");
  check_cmd->add_option("--structure", check_args.structure, "urg or ug")->check(CLI::IsMember({"urg", "ug"}));
  check_cmd->add_option("--mode", check_args.mode, "check or validity")->check(CLI::IsMember({"check", "validity"}));
  check_cmd->add_option("--at", check_args.at, "evaluation marking on the transition graph, e.g. (1,0)");
  check_cmd->add_option("--contract", check_args.contract_path, "replay a contract.json written by 'gadget'");

  std::string explore_net;
  auto* explore_cmd = app.add_subcommand("explore", "dump the (possibly partial) reachability graph");
  explore_cmd->add_option("net", explore_net, "net file")->required();

  GadgetArgs gadget_args;
  auto* gadget_cmd = app.add_subcommand("gadget", "write a gadget net, its formula and contract.json; 'gadget list'");
  gadget_cmd->add_option("kind", gadget_args.kind, "gadget name")->required();
  gadget_cmd->add_option("inputs", gadget_args.inputs, "source nets or QBF text");
  gadget_cmd->add_option("--m1", gadget_args.m1, "start marking (reach)");
  gadget_cmd->add_option("--m2", gadget_args.m2, "target marking (reach)");
  gadget_cmd->add_option("--sentence", gadget_args.sentence.path, "sentence file (drown)");
  gadget_cmd->add_option("--sentence-text", gadget_args.sentence.text, "sentence given inline (drown)");
  gadget_cmd->add_option("-o,--out", gadget_args.out_dir, "output directory");

  TextSource classify_src;
  auto* classify_cmd = app.add_subcommand("classify", "report the fragment a formula belongs to");
  classify_cmd->add_option("formula", classify_src.path, "formula file");
  classify_cmd->add_option("-e,--formula-text", classify_src.text, "formula given inline");

  std::string pres_action;
  TextSource pres_src;
  auto* pres_cmd = app.add_subcommand("presburger", "decide a sentence or eliminate quantifiers");
  pres_cmd->add_option("action", pres_action, "decide or eliminate")
      ->required()
      ->check(CLI::IsMember({"decide", "eliminate"}));
  pres_cmd->add_option("formula", pres_src.path, "formula file");
  pres_cmd->add_option("-e,--formula-text", pres_src.text, "formula given inline");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (cfg.output == "dot" && !explore_cmd->parsed()) throw UsageError("--format dot applies to explore only");
    if (check_cmd->parsed()) return cmd_check(check_args, cfg, out, err);
    if (explore_cmd->parsed()) return cmd_explore(explore_net, cfg, out);
    if (gadget_cmd->parsed()) return cmd_gadget(gadget_args, cfg, out);
    if (classify_cmd->parsed()) return cmd_classify(classify_src, cfg, out);
    return cmd_presburger(pres_action, pres_src, cfg, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ResourceExceeded& e) {
    err << "resource limit exceeded: " << e.what() << "\n";
    return kInconclusive;
  } catch (const IncompleteGraphError& e) {
    err << "exploration incomplete: " << e.what() << "\n";
    return kInconclusive;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kOtherError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    err << "malformed contract: " << e.what() << "\n";
    return kUsageError;
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << "\n";
    return kOtherError;
  } catch (const Error& e) {
    // Semantic, dimension, fragment, capture and precondition errors all
    // describe a problem with what was asked for.
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kOtherError;
  }
}

}  // namespace pnmc::cli
