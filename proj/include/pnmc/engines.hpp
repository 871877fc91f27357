#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnmc/logic.hpp"
#include "pnmc/net.hpp"
#include "pnmc/presburger.hpp"
#include "pnmc/statespace.hpp"

namespace pnmc {

// ---------------------------------------------------------------- verdicts

struct CheckVerdict {
  enum class Kind { Holds, Fails, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::string engine;
  std::string reason;   // Inconclusive only
  std::string witness;  // valuation, counterexample marking or firing sequence

  static CheckVerdict holds(std::string engine, std::string witness = {});
  static CheckVerdict fails(std::string engine, std::string witness = {});
  static CheckVerdict inconclusive(std::string engine, std::string reason);
  static CheckVerdict of(bool value, std::string engine, std::string witness = {});

  bool is_holds() const { return kind == Kind::Holds; }
  bool is_fails() const { return kind == Kind::Fails; }
  bool definitive() const { return kind != Kind::Inconclusive; }
  // Holds and Fails swap; Inconclusive stays.
  CheckVerdict negated() const;
  // HOLDS|FAILS|INCONCLUSIVE <engine>[ reason=..][ witness=..]
  std::string line() const;
};

const char* to_string(CheckVerdict::Kind k);
// 0 Holds, 1 Fails, 2 Inconclusive.
int exit_code(const CheckVerdict& v);

// Kleene three-valued truth, used wherever a sub-answer may be unknown.
enum class Truth { False, True, Unknown };
Truth truth_not(Truth a);
Truth truth_and(Truth a, Truth b);
Truth truth_or(Truth a, Truth b);
inline Truth truth_of(bool b) { return b ? Truth::True : Truth::False; }

struct EngineOptions {
  std::size_t cap = kDefaultCap;
  QeOptions qe;
};

// ---------------------------------------------------------------- explicit engines

// Sentence evaluation over a complete graph. Throws IncompleteGraphError.
CheckVerdict explicit_fo(const ReachGraph& g, const Fo& f);
CheckVerdict explicit_fo(const ReachGraph& g, const Closure& closure, const Fo& f);
// Evaluation with free variables bound to node indices.
bool explicit_fo_at(const ReachGraph& g, const Closure& closure, const Fo& f,
                    const std::map<std::string, std::size_t>& valuation);

// Kripke evaluation at one node; PAML atoms read the node's marking.
CheckVerdict explicit_ml(const ReachGraph& g, const PetriNet& net, const Ml& f, std::size_t node);
// Truth value of f at every node.
std::vector<bool> explicit_ml_all(const ReachGraph& g, const PetriNet& net, const Ml& f);
CheckVerdict explicit_ml_valid(const ReachGraph& g, const PetriNet& net, const Ml& f);

bool eval_paml(const Paml& c, const PetriNet& net, std::span<const Tokens> m);

// ---------------------------------------------------------------- modal engines

// Depth-bounded recursive evaluation from M0 (or any marking) over the
// transition graph; forward modalities only. Definitive for every net.
CheckVerdict mc_ml_forward(const PetriNet& net, const Ml& f);
bool ml_forward_at(const PetriNet& net, const Ml& f, std::span<const Tokens> m);

// The depth-d unrolling from M0 as a tree-shaped graph: node i is a firing
// path of length <= d. Evaluating f at node 0 of the unrolling of depth
// modal_degree(f) agrees with mc_ml_forward.
ReachGraph ml_unrolling(const PetriNet& net, std::size_t depth, std::size_t cap = kDefaultCap);

// Ball of radius modal_degree(f) around M0 in the net extended with formal
// inverse transitions, filtered to reachable markings.
CheckVerdict mc_ml_backward(const PetriNet& net, const Ml& f, const EngineOptions& opts = {});

// Markings of N^n satisfying f over the transition graph, as a Presburger
// formula over the place names. Forward modalities only.
Pres paml_sat_set(const PetriNet& net, const Ml& f);
// f holds at every reachable marking.
CheckVerdict val_paml_forward(const PetriNet& net, const Ml& f, const EngineOptions& opts = {});

// ---------------------------------------------------------------- first-order engines

// Boolean combination of sentences that are existential over {->, =}.
bool is_existential_combination(const Fo& f);
CheckVerdict mc_exists_fo(const PetriNet& net, const Fo& f, const EngineOptions& opts = {});
// Product net simulating `copies` runs side by side; places are `c<i>_<place>`.
PetriNet product_net(const PetriNet& net, std::size_t copies);

CheckVerdict mc_fo_one_var(const PetriNet& net, const Fo& f, const EngineOptions& opts = {});

// FO(init, ->, =) over the transition graph on all of N^n.
CheckVerdict mc_fo_ug(const PetriNet& net, const Fo& f, const EngineOptions& opts = {});

struct SideInputs {
  std::optional<Pres> reach;  // over the place names
  std::optional<Pres> star;   // over place names (source) and primed place names (target)
};
// Semilinear route: quantifiers relativized to the supplied reach formula.
CheckVerdict mc_fo_semilinear(const PetriNet& net, const Fo& f, const SideInputs& side,
                              const EngineOptions& opts = {});

// Compares supplied side inputs with a capped exploration. Returns an empty
// string when no disagreement was found, else a description of the first one.
std::string verify_side_inputs(const PetriNet& net, const SideInputs& side, std::size_t cap = kDefaultCap);

// ---------------------------------------------------------------- guarded evaluation

enum class Structure { Urg, Ug };

// Lazy three-valued evaluation over a possibly infinite structure. Each
// quantifier ranges over the finite candidate sets implied by atoms linking
// its variable to already bound ones; all other values are handled together
// as one symbolic value on which those atoms are false.
Truth guarded_eval(const PetriNet& net, const Fo& f, const std::map<std::string, Marking>& valuation,
                   Structure structure, std::size_t cap = kDefaultCap);

// Every quantified variable is linked by an -> atom (either direction) to a
// variable bound before it, and only init, -> and = occur.
bool is_forward_guarded(const Fo& f);
CheckVerdict ug_eval_guarded(const PetriNet& net, const Fo& f, const Marking& m, std::size_t cap = kDefaultCap);

// Three-valued reachability between two markings: exact when found or when
// a bidirectional search or a coverability check rules it out.
Truth reaches(const PetriNet& net, const Marking& from, const Marking& to, std::size_t cap = kDefaultCap);

// ---------------------------------------------------------------- routing

enum class CheckMode { ModelCheck, Validity };

struct CheckRequest {
  AnyFormula formula;
  Structure structure = Structure::Urg;
  CheckMode mode = CheckMode::ModelCheck;
  SideInputs side;
  std::optional<Marking> at;  // evaluation point for ug_eval_guarded
  EngineOptions options;
};

struct EngineRoute {
  std::string engine;         // empty when no engine applies
  std::string justification;
};

const std::vector<std::string>& engine_names();
EngineRoute route(const PetriNet& net, const CheckRequest& req);
// Runs one engine by name; incomplete explorations become Inconclusive.
CheckVerdict run_engine(const std::string& engine, const PetriNet& net, const CheckRequest& req);
// route + run_engine.
CheckVerdict check(const PetriNet& net, const CheckRequest& req);

}  // namespace pnmc
