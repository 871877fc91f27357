#pragma once

#include <atomic>
#include <boost/dynamic_bitset.hpp>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "pnmc/net.hpp"
#include "pnmc/presburger.hpp"

namespace pnmc {

inline constexpr std::size_t kDefaultCap = 100000;

struct ReachGraph {
  std::vector<Marking> nodes;
  std::vector<std::vector<std::size_t>> edges;  // sorted successor indices
  std::vector<std::vector<std::size_t>> preds;  // sorted predecessor indices among explored nodes
  std::size_t initial = 0;
  bool complete = false;
  // BFS tree: parent of the initial node is itself.
  std::vector<std::size_t> parent;
  std::vector<std::size_t> parent_transition;
  std::unordered_map<Marking, std::size_t, MarkingHash> index;

  std::size_t size() const { return nodes.size(); }
  std::optional<std::size_t> find(const Marking& m) const;
  // Transition names leading from the initial node to `node`.
  std::vector<std::string> path_to(std::size_t node, const PetriNet& net) const;
};

// Breadth-first from `start` (default: the initial marking); transitions are
// tried in declaration order. Stops once `cap` nodes exist.
ReachGraph explore(const PetriNet& net, std::size_t cap = kDefaultCap);
ReachGraph explore_from(const PetriNet& net, const Marking& start, std::size_t cap = kDefaultCap);

std::string to_dot(const ReachGraph& g, const PetriNet& net);

// Reflexive-transitive and strict closures of a complete graph, computed on
// the strongly connected component condensation.
class Closure {
 public:
  explicit Closure(const ReachGraph& g);
  bool star(std::size_t u, std::size_t v) const;
  bool plus(std::size_t u, std::size_t v) const;
  std::size_t component(std::size_t u) const { return comp_[u]; }
  bool on_cycle(std::size_t u) const { return cyclic_[comp_[u]]; }
  // Nodes v with u ->* v / v ->* u, in index order.
  std::vector<std::size_t> star_successors(std::size_t u) const;
  std::vector<std::size_t> star_predecessors(std::size_t v) const;

 private:
  std::vector<std::size_t> comp_;
  std::vector<bool> cyclic_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<boost::dynamic_bitset<>> reach_;  // component -> components reachable in >= 0 steps
};

// ---------------------------------------------------------------- verdicts

struct ReachVerdict {
  enum class Kind { Yes, No, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::string reason;                   // Inconclusive only: "cap-exceeded" or "unsupported"
  std::vector<std::string> witness;     // Yes: replayable firing sequence
  std::optional<Marking> marking;       // Yes: the marking the witness ends in

  bool yes() const { return kind == Kind::Yes; }
  bool no() const { return kind == Kind::No; }
  bool definitive() const { return kind != Kind::Inconclusive; }
};

const char* to_string(ReachVerdict::Kind k);

struct BoundednessResult {
  enum class Kind { Bounded, Unbounded, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::size_t reach_size = 0;  // Bounded only
  std::size_t nodes = 0;       // coverability nodes built
};

// Karp-Miller coverability construction; `node_budget` bounds distinct labels.
BoundednessResult is_bounded(const PetriNet& net, std::size_t node_budget = kDefaultCap);

// Backward fixpoint over minimal bases of upward-closed sets. Always definitive.
ReachVerdict coverable(const PetriNet& net, const Marking& target);

ReachVerdict reachable(const PetriNet& net, const Marking& target, std::size_t cap = kDefaultCap);

using MarkingSet = std::variant<Pres, SemilinearSet>;
ReachVerdict reach_semilinear(const PetriNet& net, const MarkingSet& target, std::size_t cap = kDefaultCap,
                              const QeOptions& opts = {});

// Generic capped search for a marking satisfying `pred`.
struct SearchResult {
  std::optional<Marking> found;
  std::vector<std::string> witness;
  bool complete = false;
  std::size_t explored = 0;
};
SearchResult search(const PetriNet& net, const std::function<bool(const Marking&)>& pred, std::size_t cap);

struct HackInstance {
  PetriNet net;
  Marking target;
};
// Two-phase reduction of semilinear-target reachability to plain reachability.
HackInstance hack_reduce(const PetriNet& net, const SemilinearSet& target);

// Caches one capped exploration and answers membership in Reach(net).
class ReachOracle {
 public:
  ReachOracle(const PetriNet& net, std::size_t cap);
  ReachVerdict contains(const Marking& m) const;
  const ReachGraph& graph() const { return graph_; }

 private:
  PetriNet net_;
  ReachGraph graph_;
};

// ---------------------------------------------------------------- audit

// Instrumentation for the definitive-verdict discipline. Every code path that
// concludes absence (No / Holds for a universal claim) from an exploration
// reports whether that exploration was complete.
struct AuditCounters {
  std::atomic<std::size_t> absence_claims{0};
  std::atomic<std::size_t> truncated_absence_claims{0};
  std::atomic<std::size_t> truncated_explorations{0};
};
AuditCounters& audit();
void reset_audit();
// Records an absence claim; returns `complete` for use in conditions.
bool note_absence_claim(bool complete);

}  // namespace pnmc
