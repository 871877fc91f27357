#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "compiled_fo.hpp"
#include "pnmc/engines.hpp"
#include "pnmc/errors.hpp"

namespace pnmc {

// ---------------------------------------------------------------- reachability between markings

namespace {

PetriNet started_at(const PetriNet& net, const Marking& m) {
  PetriNet copy = net;
  copy.set_initial(m);
  return copy;
}

}  // namespace

Truth reaches(const PetriNet& net, const Marking& from, const Marking& to, std::size_t cap) {
  if (from.size() != net.num_places() || to.size() != net.num_places())
    throw DimensionError("marking length differs from the place count");
  if (from == to) return Truth::True;
  // Bidirectional breadth-first search, always growing the smaller frontier.
  std::unordered_set<Marking, MarkingHash> seen_fwd{from}, seen_bwd{to};
  std::vector<Marking> front_fwd{from}, front_bwd{to};
  while (!front_fwd.empty() && !front_bwd.empty()) {
    if (seen_fwd.size() + seen_bwd.size() >= cap) break;
    // Ties go to the side explored less, so neither side starves.
    bool forward = front_fwd.size() < front_bwd.size() ||
                   (front_fwd.size() == front_bwd.size() && seen_fwd.size() <= seen_bwd.size());
    auto& front = forward ? front_fwd : front_bwd;
    auto& seen = forward ? seen_fwd : seen_bwd;
    const auto& other = forward ? seen_bwd : seen_fwd;
    std::vector<Marking> next;
    for (const auto& m : front)
      for (auto& s : forward ? successors(net, m) : predecessors(net, m)) {
        if (other.count(s)) return Truth::True;
        if (seen.insert(s).second) next.push_back(std::move(s));
      }
    front = std::move(next);
  }
  if (front_fwd.empty() || front_bwd.empty()) {
    note_absence_claim(true);
    return Truth::False;
  }
  ++audit().truncated_explorations;
  if (coverable(started_at(net, from), to).no()) return Truth::False;
  return Truth::Unknown;
}

// ---------------------------------------------------------------- guarded evaluation

namespace {

using detail::CNode;
using detail::CompiledFo;

struct Value {
  int outside = -1;     // >= 0: index of a symbolic value
  Marking m;
  Truth member = Truth::True;  // membership in the domain (reachable markings in Urg)
};

struct Exploration {
  std::vector<Marking> nodes;
  bool complete = false;
};

class Guarded {
 public:
  Guarded(const PetriNet& net, const CompiledFo& f, Structure s, std::size_t cap)
      : net_(net), f_(f), structure_(s), cap_(cap), env_(f.slots()), bound_(f.slots(), false) {
    if (s == Structure::Urg) {
      sample_ = explore(net, std::min<std::size_t>(cap, 4096));
      if (sample_.complete) closure_.emplace(sample_);
    }
  }

  void bind(int slot, Value v) {
    env_[slot] = std::move(v);
    bound_[slot] = true;
  }

  Truth eval(int i) {
    const CNode& n = f_.nodes[i];
    switch (n.kind) {
      case FoKind::True: return Truth::True;
      case FoKind::False: return Truth::False;
      case FoKind::Init:
      case FoKind::Eq:
      case FoKind::Edge:
      case FoKind::Star:
      case FoKind::Plus: return atom(i);
      case FoKind::Not: return truth_not(eval(n.lhs));
      case FoKind::And: {
        Truth a = eval(n.lhs);
        if (a == Truth::False) return a;
        return truth_and(a, eval(n.rhs));
      }
      case FoKind::Or: {
        Truth a = eval(n.lhs);
        if (a == Truth::True) return a;
        return truth_or(a, eval(n.rhs));
      }
      case FoKind::Implies: {
        Truth a = eval(n.lhs);
        if (a == Truth::False) return Truth::True;
        return truth_or(truth_not(a), eval(n.rhs));
      }
      case FoKind::Forall:
      case FoKind::Exists: return quantifier(i);
    }
    return Truth::Unknown;
  }

 private:
  const PetriNet& net_;
  const CompiledFo& f_;
  Structure structure_;
  std::size_t cap_;
  std::vector<Value> env_;
  std::vector<bool> bound_;
  std::vector<std::set<int>> outside_false_;  // atoms known false on each symbolic value
  ReachGraph sample_;
  std::optional<Closure> closure_;
  std::optional<PetriNet> inverse_;
  std::map<std::pair<Marking, Marking>, Truth> reach_memo_;
  std::unordered_map<Marking, Exploration, MarkingHash> forward_, backward_;
  std::unordered_map<Marking, Truth, MarkingHash> member_memo_;

  bool exhaustive() const {
    return structure_ == Structure::Urg ? sample_.complete : net_.num_places() == 0;
  }

  Truth reach(const Marking& a, const Marking& b) {
    auto key = std::make_pair(a, b);
    if (auto it = reach_memo_.find(key); it != reach_memo_.end()) return it->second;
    Truth r = reaches(net_, a, b, cap_);
    reach_memo_.emplace(std::move(key), r);
    return r;
  }

  Truth membership(const Marking& m) {
    if (structure_ == Structure::Ug) return Truth::True;
    if (auto it = member_memo_.find(m); it != member_memo_.end()) return it->second;
    Truth r = reach(net_.initial(), m);
    member_memo_.emplace(m, r);
    return r;
  }

  const Exploration& explored(const Marking& m, bool forward) {
    auto& cache = forward ? forward_ : backward_;
    if (auto it = cache.find(m); it != cache.end()) return it->second;
    if (!forward && !inverse_) inverse_ = inverse_net(net_);
    auto g = explore_from(forward ? net_ : *inverse_, m, cap_);
    Exploration e{std::move(g.nodes), g.complete};
    return cache.emplace(m, std::move(e)).first->second;
  }

  static bool is_edge(const PetriNet& net, const Marking& a, const Marking& b) {
    for (std::size_t t = 0; t < net.num_transitions(); ++t)
      if (enabled(net, a, t) && fire(net, a, t) == b) return true;
    return false;
  }

  Truth atom(int i) {
    const CNode& n = f_.nodes[i];
    const Value& a = env_[n.a];
    const Value* b = n.kind == FoKind::Init ? nullptr : &env_[n.b];
    if (n.kind == FoKind::Eq && n.a == n.b) return Truth::True;
    if (a.outside >= 0 || (b && b->outside >= 0)) {
      if (a.outside >= 0 && outside_false_[a.outside].count(i)) return Truth::False;
      if (b && b->outside >= 0 && outside_false_[b->outside].count(i)) return Truth::False;
      return Truth::Unknown;
    }
    switch (n.kind) {
      case FoKind::Init: return truth_of(a.m == net_.initial());
      case FoKind::Eq: return truth_of(a.m == b->m);
      case FoKind::Edge: return truth_of(is_edge(net_, a.m, b->m));
      case FoKind::Star:
        if (closure_) {
          auto u = sample_.find(a.m), v = sample_.find(b->m);
          if (u && v) return truth_of(closure_->star(*u, *v));
        }
        return reach(a.m, b->m);
      case FoKind::Plus: {
        Truth r = Truth::False;
        for (const auto& s : successors(net_, a.m)) {
          r = truth_or(r, reach(s, b->m));
          if (r == Truth::True) break;
        }
        return r;
      }
      default: return Truth::Unknown;
    }
  }

  void atoms_below(int i, std::vector<int>& out) const {
    const CNode& n = f_.nodes[i];
    if (is_atom(n.kind)) out.push_back(i);
    if (n.lhs >= 0) atoms_below(n.lhs, out);
    if (n.rhs >= 0) atoms_below(n.rhs, out);
  }

  // Candidate values for `slot` from atoms linking it to bound concrete
  // values; returns the atoms that were used.
  std::set<int> candidates(int slot, int body, bool expensive, std::vector<Value>& out) {
    std::vector<int> atoms;
    atoms_below(body, atoms);
    std::set<int> used;
    std::unordered_map<Marking, Truth, MarkingHash> found;
    auto add = [&](const Marking& m, Truth member) {
      auto [it, fresh] = found.emplace(m, member);
      if (!fresh && member == Truth::True) it->second = member;
    };
    for (int i : atoms) {
      const CNode& n = f_.nodes[i];
      if (n.kind == FoKind::Init) {
        if (n.a == slot) {
          used.insert(i);
          add(net_.initial(), Truth::True);
        }
        continue;
      }
      bool slot_first = n.a == slot && n.b != slot;
      bool slot_second = n.b == slot && n.a != slot;
      if (!slot_first && !slot_second) continue;
      int other = slot_first ? n.b : n.a;
      if (!bound_[other] || env_[other].outside >= 0) continue;
      const Value& u = env_[other];
      switch (n.kind) {
        case FoKind::Eq:
          used.insert(i);
          add(u.m, u.member);
          break;
        case FoKind::Edge:
          used.insert(i);
          if (slot_second) {
            for (const auto& s : successors(net_, u.m)) add(s, u.member == Truth::True ? Truth::True : Truth::Unknown);
          } else {
            for (const auto& s : predecessors(net_, u.m)) add(s, Truth::Unknown);
          }
          break;
        case FoKind::Star:
        case FoKind::Plus: {
          if (!expensive) break;
          const auto& e = explored(u.m, slot_second);
          if (!e.complete) break;
          used.insert(i);
          for (const auto& s : e.nodes)
            add(s, slot_second && u.member == Truth::True ? Truth::True : Truth::Unknown);
          break;
        }
        default: break;
      }
    }
    for (auto& [m, member] : found) {
      if (member == Truth::Unknown) member = membership(m);
      if (member != Truth::False) out.push_back(Value{-1, m, member});
    }
    std::sort(out.begin(), out.end(), [](const Value& x, const Value& y) { return x.m < y.m; });
    return used;
  }

  // Some domain element lies outside `values`.
  Truth outside_nonempty(const std::vector<Value>& values) {
    if (structure_ == Structure::Ug) return truth_of(net_.num_places() > 0);
    std::unordered_set<Marking, MarkingHash> in;
    for (const auto& v : values) in.insert(v.m);
    for (const auto& m : sample_.nodes)
      if (!in.count(m)) return Truth::True;
    return sample_.complete ? Truth::False : Truth::Unknown;
  }

  Truth quantifier(int i) {
    const CNode& n = f_.nodes[i];
    const bool exists = n.kind == FoKind::Exists;
    Value saved = env_[n.a];
    bool was_bound = bound_[n.a];
    bound_[n.a] = true;
    auto combine = [&](Truth acc, Truth member, Truth v) {
      return exists ? truth_or(acc, truth_and(member, v)) : truth_and(acc, truth_or(truth_not(member), v));
    };
    auto decided = [&](Truth acc) { return acc == (exists ? Truth::True : Truth::False); };
    Truth result = exists ? Truth::False : Truth::True;

    if (exhaustive()) {
      std::vector<Marking> domain = structure_ == Structure::Urg ? sample_.nodes : std::vector<Marking>{Marking{}};
      for (const auto& m : domain) {
        env_[n.a] = Value{-1, m, Truth::True};
        result = combine(result, Truth::True, eval(n.lhs));
        if (decided(result)) break;
      }
    } else {
      for (bool expensive : {false, true}) {
        std::vector<Value> values;
        auto used = candidates(n.a, n.lhs, expensive, values);
        Truth acc = exists ? Truth::False : Truth::True;
        for (auto& v : values) {
          Truth member = v.member;
          env_[n.a] = std::move(v);
          acc = combine(acc, member, eval(n.lhs));
          if (decided(acc)) break;
        }
        if (!decided(acc)) {
          outside_false_.push_back(used);
          env_[n.a] = Value{static_cast<int>(outside_false_.size()) - 1, {}, Truth::Unknown};
          Truth v = eval(n.lhs);
          acc = combine(acc, outside_nonempty(values), v);
          outside_false_.pop_back();
        }
        result = acc;
        if (result != Truth::Unknown) break;
      }
    }
    env_[n.a] = std::move(saved);
    bound_[n.a] = was_bound;
    return result;
  }
};

}  // namespace

Truth guarded_eval(const PetriNet& net, const Fo& f, const std::map<std::string, Marking>& valuation,
                   Structure structure, std::size_t cap) {
  for (const auto& v : free_vars(f))
    if (!valuation.count(v)) throw UnboundVariableError("unbound variable '" + v + "'");
  std::vector<std::string> order;
  for (const auto& [v, _] : valuation) order.push_back(v);
  auto compiled = detail::FoCompiler::run(f, order);
  Guarded ev(net, compiled, structure, cap);
  for (const auto& [v, m] : valuation) {
    if (m.size() != net.num_places()) throw DimensionError("marking length differs from the place count");
    ev.bind(compiled.free_slots.at(v), Value{-1, m, Truth::True});
  }
  if (structure == Structure::Urg)
    for (const auto& [v, m] : valuation) {
      Truth r = reaches(net, net.initial(), m, cap);
      if (r == Truth::False) throw PreconditionError("valuation of '" + v + "' is not reachable");
      if (r == Truth::Unknown) return Truth::Unknown;
    }
  return ev.eval(compiled.root);
}

bool is_forward_guarded(const Fo& f) {
  auto free = free_vars(f);
  auto c = detail::FoCompiler::run(f, std::vector<std::string>(free.begin(), free.end()));
  std::vector<bool> bound(c.slots(), false);
  for (const auto& [_, s] : c.free_slots) bound[s] = true;
  auto rec = [&](auto&& self, int i) -> bool {
    const CNode& n = c.nodes[i];
    switch (n.kind) {
      case FoKind::Star:
      case FoKind::Plus: return false;
      case FoKind::Forall:
      case FoKind::Exists: {
        std::vector<int> stack{n.lhs};
        bool guarded = false;
        while (!stack.empty() && !guarded) {
          const CNode& m = c.nodes[stack.back()];
          stack.pop_back();
          if (m.kind == FoKind::Edge && ((m.a == n.a && m.b != n.a && bound[m.b]) || (m.b == n.a && m.a != n.a && bound[m.a])))
            guarded = true;
          if (m.lhs >= 0) stack.push_back(m.lhs);
          if (m.rhs >= 0) stack.push_back(m.rhs);
        }
        if (!guarded) return false;
        bound[n.a] = true;
        bool ok = self(self, n.lhs);
        bound[n.a] = false;
        return ok;
      }
      default:
        return (n.lhs < 0 || self(self, n.lhs)) && (n.rhs < 0 || self(self, n.rhs));
    }
  };
  return rec(rec, c.root);
}

CheckVerdict ug_eval_guarded(const PetriNet& net, const Fo& f, const Marking& m, std::size_t cap) {
  const char* name = "ug_eval_guarded";
  if (!is_forward_guarded(f)) throw FragmentError("formula is not forward-guarded");
  auto free = free_vars(f);
  if (free.size() > 1) throw FragmentError("at most one free variable can be evaluated at a marking");
  std::map<std::string, Marking> valuation;
  if (!free.empty()) valuation.emplace(*free.begin(), m);
  Truth t = guarded_eval(net, f, valuation, Structure::Ug, cap);
  if (t == Truth::Unknown) return CheckVerdict::inconclusive(name, "undetermined");
  return CheckVerdict::of(t == Truth::True, name);
}

}  // namespace pnmc
