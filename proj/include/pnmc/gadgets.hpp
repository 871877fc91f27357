#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pnmc/engines.hpp"
#include "pnmc/logic.hpp"
#include "pnmc/net.hpp"

namespace pnmc {

// A net paired with a formula and the equivalence the pair is built to witness.
struct GadgetInstance {
  std::string kind;  // catalogue name, e.g. "union"
  PetriNet net;
  AnyFormula formula;
  std::string contract;  // the claimed equivalence
  std::string oracle;    // how the claim is checked on bounded instances
  CheckMode mode = CheckMode::ModelCheck;
  Structure structure = Structure::Urg;
  std::optional<Marking> at;  // evaluation point for formulas with a free variable
  // One map per source net: source place -> gadget place.
  std::vector<std::map<std::string, std::string>> place_map;
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------- fixed formulas

struct FixedFormula {
  std::string name;
  std::string summary;
  AnyFormula formula;
};

// Every constant formula of the catalogue, in a fixed order.
const std::vector<FixedFormula>& fixed_formulas();
const FixedFormula& fixed_formula(std::string_view name);
Fo fixed_fo(std::string_view name);
Ml fixed_ml(std::string_view name);

// Building blocks with caller-chosen variable names.
namespace formulas {
// exists y . x -> y & y -> y
Fo has_looping_successor(const std::string& x, const std::string& y);
// (!x -> x) & exists y . forall z . x -> y & !(y -> z)
Fo initial_marker(const std::string& x, const std::string& y = "y", const std::string& z = "z");
// exists y . initial_marker(y) & y -> x & x -> x
Fo loaded_marker(const std::string& x, const std::string& y = "y");
// init(x) & x -> y & !(y ->* x)
Fo first_step(const std::string& x, const std::string& y);
}  // namespace formulas

// ---------------------------------------------------------------- union nets

enum class UnionFormula {
  Equality,     // the base sentence
  TwoVariable,  // the same sentence with recycled variable names
  Positive,     // Reach(n2) subset of Reach(n1)
  Forward,      // equality, forward fragment
  Containment,  // Reach(n1) subset of Reach(n2)
  Plus,         // equality over ->+
  MlValidity,   // modal, valid iff equal
};

// Choice between two simulations that share all places, each ending in a
// branch whose local shape tells the branches apart.
GadgetInstance build_union_net(const PetriNet& n1, const PetriNet& n2, UnionFormula formula = UnionFormula::Equality);
// The same without the loop branch, paired with the ->* sentence.
GadgetInstance build_star_union_net(const PetriNet& n1, const PetriNet& n2);
// Adds a token circulating on a fresh 3-cycle of places.
PetriNet build_lambda_augment(const PetriNet& n);
// Union of the two augmented nets with the undirected-edge sentence.
GadgetInstance build_lambda_union(const PetriNet& n1, const PetriNet& n2);

// ---------------------------------------------------------------- QBF

struct Prop;
using PropPtr = std::shared_ptr<const Prop>;
struct Prop {
  enum class Kind { True, False, Var, Not, And, Or, Implies, Iff };
  Kind kind;
  std::size_t var = 0;  // index into Qbf::vars
  PropPtr lhs;
  PropPtr rhs;
};

struct Qbf {
  std::vector<std::string> vars;  // in quantifier order
  std::vector<bool> universal;
  PropPtr matrix;
};

// "E p1 A p2 (p1 | p2)"; `exists`/`forall` are accepted for E/A.
Qbf parse_qbf(std::string_view text);
std::string to_string(const Qbf& q);
bool qbf_truth(const Qbf& q);
bool eval_prop(const PropPtr& p, const std::vector<bool>& assignment);

// Strict alternation starting with an existential, even length.
GadgetInstance build_qbf_net(const Qbf& q);

// ---------------------------------------------------------------- hardness gadgets

// m2 reachable from m1 in n iff the fixed modal formula holds at M0.
GadgetInstance build_reach_gadget(const PetriNet& n, const Marking& m1, const Marking& m2);
// The zero marking is unreachable iff every reachable marking has a successor.
GadgetInstance build_nonreach_gadget(const PetriNet& n);

struct BudgetReduction {
  PetriNet tracked;          // n plus the budget place
  GadgetInstance instance;   // plus the unique neutral transition
};
BudgetReduction build_budget_reduction(const PetriNet& n);
// The second stage alone: exactly one neutral transition.
GadgetInstance build_fo1_gadget(const PetriNet& n);

// ---------------------------------------------------------------- drowning

struct DrownGadget {
  GadgetInstance instance;  // formula set only when a sentence was supplied
  PetriNet variant;         // initial marking without predecessors instead of init
};
DrownGadget build_drown_net(const PetriNet& n, const Fo& sentence = nullptr);
// exists x0 x1 . init(x0) & x0 -> x1 & !(x1 ->* x0) & phi relativized to x1 ->* _
Fo drown_formula(const Fo& sentence);
// The same with the initial marking singled out by having no predecessor.
Fo drown_variant_formula(const Fo& sentence);

// ---------------------------------------------------------------- transition graph

struct UgGadget {
  GadgetInstance instance;  // formula: initial_marker(x), at the unique marking satisfying it
  Fo loaded;                // loaded_marker(x)
  PetriNet looped;          // n with the lock place and per-place witness loops
  Marking loaded_marking;   // the successor of M0 that starts the simulation
};
UgGadget build_ug_gadget(const PetriNet& n);

struct PileupGadget {
  GadgetInstance instance;  // final net and the assembled sentence
  PetriNet star_union;      // stage 1
  PetriNet drowned;         // stage 2
  Fo first_step;            // init(x) & x -> y & !(y ->* x)
  Marking drowned_start;    // initial marking of stage 2
  Marking drowned_entry;    // its successor that starts simulating stage 1
};
PileupGadget build_pileup(const PetriNet& n1, const PetriNet& n2);

// ---------------------------------------------------------------- desk-scale oracles

namespace oracle {
// Empty when either exploration hits the cap.
std::optional<std::vector<Marking>> reach_set(const PetriNet& n, std::size_t cap = kDefaultCap);
std::optional<bool> reach_equal(const PetriNet& a, const PetriNet& b, std::size_t cap = kDefaultCap);
std::optional<bool> reach_subset(const PetriNet& a, const PetriNet& b, std::size_t cap = kDefaultCap);
// Drops neutral transitions; they do not change the reachability set.
PetriNet without_neutral(const PetriNet& n, std::vector<std::string>* removed = nullptr);
}  // namespace oracle

// Expected verdict of a gadget's own formula on its net, computed from the
// source instance with the oracle named in the contract. Empty if the
// oracle cannot decide at desk scale.
struct GadgetSources {
  std::vector<PetriNet> nets;
  std::optional<Qbf> qbf;
  std::optional<Marking> m1, m2;
  Fo sentence;  // drown: the source sentence
};
std::optional<bool> expected_verdict(const GadgetInstance& g, const GadgetSources& src, std::size_t cap = kDefaultCap);

}  // namespace pnmc
