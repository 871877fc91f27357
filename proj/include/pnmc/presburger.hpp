#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pnmc/logic.hpp"
#include "pnmc/net.hpp"

namespace pnmc {

using BigInt = boost::multiprecision::cpp_int;

struct LinTerm {
  std::map<std::string, BigInt> coeffs;  // zero coefficients are never stored
  BigInt constant = 0;

  static LinTerm var(const std::string& v, const BigInt& c = 1);
  static LinTerm num(const BigInt& c);

  BigInt coeff(const std::string& v) const;
  bool is_constant() const { return coeffs.empty(); }
  LinTerm& add(const LinTerm& other, const BigInt& scale = 1);
  LinTerm scaled(const BigInt& k) const;
  LinTerm substituted(const std::string& v, const LinTerm& repl) const;

  friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a.add(b); }
  friend LinTerm operator-(LinTerm a, const LinTerm& b) { return a.add(b, -1); }
  friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

// t <= 0, t = 0, c | t, connectives and integer quantifiers.
enum class PresKind { True, False, Le, Eq, Div, Not, And, Or, Exists, Forall };

struct PresNode;
using Pres = std::shared_ptr<const PresNode>;

struct PresNode {
  PresKind kind;
  LinTerm term;
  BigInt modulus;
  std::string var;
  std::vector<Pres> kids;
  std::size_t hash = 0;
};

namespace pa {
Pres truth();
Pres falsity();
Pres boolean(bool b);
Pres le(LinTerm t);  // t <= 0
Pres eq(LinTerm t);  // t = 0
Pres divides(const BigInt& c, LinTerm t);
Pres le(const LinTerm& a, const LinTerm& b);
Pres lt(const LinTerm& a, const LinTerm& b);
Pres ge(const LinTerm& a, const LinTerm& b);
Pres gt(const LinTerm& a, const LinTerm& b);
Pres eq(const LinTerm& a, const LinTerm& b);
Pres neg(const Pres& f);
Pres conj(std::vector<Pres> parts);
Pres disj(std::vector<Pres> parts);
Pres conj(const Pres& a, const Pres& b);
Pres disj(const Pres& a, const Pres& b);
Pres implies(const Pres& a, const Pres& b);
Pres exists(const std::string& v, const Pres& body);
Pres forall(const std::string& v, const Pres& body);
Pres nat(const std::string& v);
Pres naturals(std::span<const std::string> vs);
Pres exists_nat(const std::string& v, const Pres& body);
Pres forall_nat(const std::string& v, const Pres& body);
Pres exists_nat(std::span<const std::string> vs, const Pres& body);
Pres forall_nat(std::span<const std::string> vs, const Pres& body);
}  // namespace pa

std::set<std::string> free_vars(const Pres& f);
bool is_quantifier_free(const Pres& f);
std::size_t size(const Pres& f);
bool structurally_equal(const Pres& a, const Pres& b);
// Capture-avoiding simultaneous substitution of terms for variables.
Pres substitute(const Pres& f, const std::map<std::string, LinTerm>& repl);
Pres rename(const Pres& f, std::span<const std::string> from, std::span<const std::string> to);
Pres nnf(const Pres& f);

std::string to_string(const Pres& f);
Pres parse_presburger(std::string_view text);

struct QeOptions {
  std::size_t budget = 2'000'000;  // maximal node count of any intermediate formula
};

Pres eliminate(const Pres& f, const QeOptions& opts = {});
bool decide(const Pres& f, const QeOptions& opts = {});
bool evaluate(const Pres& f, const std::map<std::string, BigInt>& env, const QeOptions& opts = {});

// Evaluates a formula at many points over a fixed variable order. Quantifiers
// are eliminated once at construction.
class PointEvaluator {
 public:
  PointEvaluator(const Pres& f, std::vector<std::string> vars, const QeOptions& opts = {});
  bool operator()(std::span<const Tokens> point) const;
  const Pres& formula() const { return qf_; }

 private:
  struct Atom;
  struct Node;
  Pres qf_;
  std::vector<std::string> vars_;
  std::shared_ptr<std::vector<Node>> nodes_;  // shared so copies stay cheap
  int root_ = 0;
  int compile(const Pres& f);
  bool eval(int node, std::span<const Tokens> point) const;
};

// ---------------------------------------------------------------- semilinear sets

struct LinearSet {
  std::vector<Tokens> base;
  std::vector<std::vector<Tokens>> periods;
};

struct SemilinearSet {
  std::size_t dimension = 0;
  std::vector<LinearSet> components;
};

SemilinearSet parse_semilinear(std::string_view text, std::size_t dimension);
std::string to_string(const SemilinearSet& s);
Pres to_formula(const SemilinearSet& s, std::span<const std::string> vars);
bool membership(const SemilinearSet& s, std::span<const Tokens> v, const QeOptions& opts = {});
bool membership_enumerate(const LinearSet& l, std::span<const Tokens> v);
// Bases of an upward-closed set when every component's periods contain all
// unit vectors; empty optional otherwise.
std::optional<std::vector<Marking>> upward_bases(const SemilinearSet& s);
std::optional<std::vector<Marking>> upward_bases(const Pres& f, std::span<const std::string> vars);

// ---------------------------------------------------------------- nets as arithmetic

std::vector<std::string> place_vars(const PetriNet& net);
std::vector<std::string> primed(std::span<const std::string> vars);
std::vector<std::string> prefixed(const std::string& prefix, std::span<const std::string> vars);
Pres marking_equals(std::span<const std::string> vars, std::span<const Tokens> m);
Pres vectors_equal(std::span<const std::string> a, std::span<const std::string> b);
Pres edge_formula(const PetriNet& net, std::span<const std::string> src, std::span<const std::string> dst);
// Over place names (source) and primed place names (target).
Pres edge_formula(const PetriNet& net);
Pres identity_relation(std::span<const std::string> src, std::span<const std::string> dst);
Pres pre_image(const PetriNet& net, const Pres& s);
Pres box_set(const PetriNet& net, const Pres& s);
Pres compose_relations(const Pres& r1, const Pres& r2, std::span<const std::string> src,
                       std::span<const std::string> dst, const QeOptions& opts = {});
// Constraint atoms of modal formulas, with place names as variables.
Pres to_presburger(const Paml& c);

}  // namespace pnmc
