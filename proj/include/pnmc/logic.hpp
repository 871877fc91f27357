#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pnmc {

class PetriNet;

// ---------------------------------------------------------------- first order

enum class FoKind { True, False, Edge, Star, Plus, Init, Eq, Not, And, Or, Implies, Forall, Exists };

struct FoNode;
using Fo = std::shared_ptr<const FoNode>;

// Atoms use `x` (and `y` for binary atoms); quantifiers bind `x` over `lhs`.
// Unary and binary connectives use `lhs` and `rhs`. Variables keep the names
// they were written with; a nested quantifier over an already bound name
// shadows it for its own scope.
struct FoNode {
  FoKind kind;
  std::string x;
  std::string y;
  Fo lhs;
  Fo rhs;
};

namespace fo {
Fo truth();
Fo falsity();
Fo edge(std::string x, std::string y);
Fo star(std::string x, std::string y);
Fo plus(std::string x, std::string y);
Fo init(std::string x);
Fo eq(std::string x, std::string y);
// Undirected edge, x -> y | y -> x.
Fo lambda(std::string x, std::string y);
Fo neg(Fo f);
Fo conj(Fo a, Fo b);
Fo disj(Fo a, Fo b);
Fo implies(Fo a, Fo b);
// (a => b) & (b => a)
Fo iff(Fo a, Fo b);
Fo conj(std::vector<Fo> parts);
Fo disj(std::vector<Fo> parts);
Fo forall(std::string v, Fo body);
Fo exists(std::string v, Fo body);
Fo forall(const std::vector<std::string>& vs, Fo body);
Fo exists(const std::vector<std::string>& vs, Fo body);
}  // namespace fo

bool is_atom(FoKind k);
bool is_quantifier(FoKind k);

Fo parse_fo(std::string_view text);
// Same as parse_fo but rejects free variables.
Fo parse_fo_sentence(std::string_view text);
std::string to_string(const Fo& f);

std::set<std::string> free_vars(const Fo& f);
bool is_sentence(const Fo& f);
bool alpha_equal(const Fo& a, const Fo& b);
// Renames every binder that shadows an enclosing one of the same name, so no
// name is quantified twice on one branch.
Fo alpha_rename(const Fo& f);
std::size_t size(const Fo& f);

enum class Predicate { Edge, Star, Plus, Init, Eq };
const char* predicate_symbol(Predicate p);

struct FragmentReport {
  std::size_t variable_count = 0;
  std::set<Predicate> predicates_used;
  bool is_existential = false;
  bool is_positive = false;
  bool is_forward = false;
  std::optional<std::size_t> modal_degree;
  // modal formulas only
  bool has_inverse = false;
  bool has_paml = false;
};

FragmentReport classify(const Fo& f);

enum class GuardPredicate { Star, Edge };
// Forall x . b  ->  Forall x . (guard(g, x) => b)
// Exists x . b  ->  Exists x . (guard(g, x) & b)
Fo relativize(const Fo& f, const std::string& guard_var, GuardPredicate pred = GuardPredicate::Star);

// ---------------------------------------------------------------- Presburger-style atoms inside modal formulas

struct PamlTerm {
  std::vector<std::pair<std::string, std::int64_t>> coeffs;
  std::int64_t constant = 0;
};

enum class PamlRel { Le, Ge, Lt, Gt, Eq, Ne, Mod };

struct PamlNode;
using Paml = std::shared_ptr<const PamlNode>;

enum class PamlKind { True, False, Atom, Not, And, Or };

struct PamlNode {
  PamlKind kind;
  PamlTerm term;              // Atom: term REL bound, or term mod modulus = bound
  PamlRel rel = PamlRel::Le;
  std::int64_t bound = 0;
  std::int64_t modulus = 0;
  Paml lhs;
  Paml rhs;
};

std::set<std::string> places_of(const Paml& c);
std::string to_string(const Paml& c);

// ---------------------------------------------------------------- modal

enum class MlKind { Top, Bot, Atom, Not, And, Or, Implies, Box, Dia, BoxInv, DiaInv };

struct MlNode;
using Ml = std::shared_ptr<const MlNode>;

struct MlNode {
  MlKind kind;
  Ml lhs;
  Ml rhs;
  Paml atom;
};

namespace ml {
Ml top();
Ml bot();
Ml atom(Paml c);
Ml neg(Ml f);
Ml conj(Ml a, Ml b);
Ml disj(Ml a, Ml b);
Ml implies(Ml a, Ml b);
Ml box(Ml f);
Ml dia(Ml f);
Ml boxinv(Ml f);
Ml diainv(Ml f);
Ml dia_n(std::size_t n, Ml f);
}  // namespace ml

Ml parse_ml(std::string_view text);
std::string to_string(const Ml& f);
std::size_t modal_degree(const Ml& f);
bool has_inverse(const Ml& f);
bool has_paml(const Ml& f);
std::set<std::string> places_of(const Ml& f);
// Throws SemanticError naming the first place the net lacks.
void check_places(const Ml& f, const PetriNet& net);
FragmentReport classify(const Ml& f);

// Standard translation with two alternating variable names; `free_var` is
// free in the result.
Fo modal_to_fo(const Ml& f, const std::string& free_var = "x", const std::string& other_var = "y");

// Either kind of formula, as read from a file.
struct AnyFormula {
  Fo fo;
  Ml ml;
  bool is_fo() const { return fo != nullptr; }
};
// Tries FO first, then ML; reports the FO error if both fail and the text
// looks first-order.
AnyFormula parse_any(std::string_view text);

}  // namespace pnmc
