#include "pnmc/statespace.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "pnmc/errors.hpp"

namespace pnmc {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kMaxClosureComponents = 30000;

bool covers(std::span<const Tokens> big, std::span<const Tokens> small) {
  for (std::size_t p = 0; p < big.size(); ++p)
    if (big[p] < small[p]) return false;
  return true;
}

void require_dimension(const PetriNet& net, std::span<const Tokens> m) {
  if (m.size() != net.num_places())
    throw DimensionError("marking has " + std::to_string(m.size()) + " entries, net has " +
                         std::to_string(net.num_places()) + " places");
}

std::vector<std::string> replay_names(const PetriNet& net, const std::vector<std::size_t>& ts) {
  std::vector<std::string> out;
  out.reserve(ts.size());
  for (auto t : ts) out.push_back(net.transition_name(t));
  return out;
}

AuditCounters g_audit;

}  // namespace

AuditCounters& audit() { return g_audit; }

void reset_audit() {
  g_audit.absence_claims = 0;
  g_audit.truncated_absence_claims = 0;
  g_audit.truncated_explorations = 0;
}

bool note_absence_claim(bool complete) {
  ++g_audit.absence_claims;
  if (!complete) ++g_audit.truncated_absence_claims;
  return complete;
}

const char* to_string(ReachVerdict::Kind k) {
  switch (k) {
    case ReachVerdict::Kind::Yes: return "yes";
    case ReachVerdict::Kind::No: return "no";
    default: return "inconclusive";
  }
}

// ---------------------------------------------------------------- explicit graphs

std::optional<std::size_t> ReachGraph::find(const Marking& m) const {
  auto it = index.find(m);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> ReachGraph::path_to(std::size_t node, const PetriNet& net) const {
  std::vector<std::size_t> ts;
  while (node != initial) {
    ts.push_back(parent_transition[node]);
    node = parent[node];
  }
  std::reverse(ts.begin(), ts.end());
  return replay_names(net, ts);
}

ReachGraph explore(const PetriNet& net, std::size_t cap) { return explore_from(net, net.initial(), cap); }

ReachGraph explore_from(const PetriNet& net, const Marking& start, std::size_t cap) {
  if (cap == 0) throw PreconditionError("exploration cap must be at least 1");
  require_dimension(net, start);
  ReachGraph g;
  auto add = [&](Marking m, std::size_t parent, std::size_t via) {
    g.index.emplace(m, g.nodes.size());
    g.nodes.push_back(std::move(m));
    g.parent.push_back(parent);
    g.parent_transition.push_back(via);
    g.edges.emplace_back();
  };
  add(start, 0, kNone);
  bool truncated = false;
  for (std::size_t head = 0; head < g.nodes.size(); ++head) {
    const Marking m = g.nodes[head];
    std::vector<std::size_t> succ;
    for (std::size_t t = 0; t < net.num_transitions(); ++t) {
      if (!enabled(net, m, t)) continue;
      Marking n = fire(net, m, t);
      auto it = g.index.find(n);
      if (it != g.index.end()) {
        succ.push_back(it->second);
      } else if (g.nodes.size() < cap) {
        succ.push_back(g.nodes.size());
        add(std::move(n), head, t);
      } else {
        truncated = true;
      }
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    g.edges[head] = std::move(succ);
  }
  g.complete = !truncated;
  if (truncated) ++g_audit.truncated_explorations;
  g.preds.assign(g.nodes.size(), {});
  for (std::size_t u = 0; u < g.nodes.size(); ++u)
    for (auto v : g.edges[u]) g.preds[v].push_back(u);
  return g;
}

std::string to_dot(const ReachGraph& g, const PetriNet& net) {
  std::string out = "digraph \"" + net.name() + "\" {\n";
  if (!g.complete) out += "  label=\"incomplete exploration\";\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out += "  n" + std::to_string(i) + " [label=\"" + format_marking(g.nodes[i]) + "\", shape=" +
           (i == g.initial ? "doublecircle" : "circle") + "];\n";
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (auto j : g.edges[i]) out += "  n" + std::to_string(i) + " -> n" + std::to_string(j) + ";\n";
  out += "}\n";
  return out;
}

// ---------------------------------------------------------------- closure

Closure::Closure(const ReachGraph& g) {
  if (!g.complete) throw IncompleteGraphError("transitive closure needs a complete reachability graph");
  const std::size_t n = g.nodes.size();
  comp_.assign(n, kNone);
  // Iterative Tarjan; components come out in reverse topological order.
  std::vector<std::size_t> low(n), num(n, kNone), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next edge position)
  std::size_t counter = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (num[root] != kNone) continue;
    call.emplace_back(root, 0);
    num[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [u, pos] = call.back();
      if (pos < g.edges[u].size()) {
        std::size_t v = g.edges[u][pos++];
        if (num[v] == kNone) {
          num[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = true;
          call.emplace_back(v, 0);
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], num[v]);
        }
        continue;
      }
      std::size_t done = u;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == num[done]) {
        std::size_t c = members_.size();
        members_.emplace_back();
        while (true) {
          std::size_t w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp_[w] = c;
          members_[c].push_back(w);
          if (w == done) break;
        }
        std::sort(members_[c].begin(), members_[c].end());
      }
    }
  }
  const std::size_t nc = members_.size();
  if (nc > kMaxClosureComponents)
    throw ResourceExceeded("transitive closure over " + std::to_string(nc) + " components is too large");
  cyclic_.assign(nc, false);
  reach_.assign(nc, boost::dynamic_bitset<>(nc));
  for (std::size_t c = 0; c < nc; ++c) {
    reach_[c].set(c);
    if (members_[c].size() > 1) cyclic_[c] = true;
    for (auto u : members_[c])
      for (auto v : g.edges[u]) {
        if (comp_[v] == c) {
          cyclic_[c] = true;
        } else {
          reach_[c] |= reach_[comp_[v]];
        }
      }
  }
}

bool Closure::star(std::size_t u, std::size_t v) const { return reach_[comp_[u]].test(comp_[v]); }

bool Closure::plus(std::size_t u, std::size_t v) const {
  if (comp_[u] == comp_[v]) return cyclic_[comp_[u]];
  return reach_[comp_[u]].test(comp_[v]);
}

std::vector<std::size_t> Closure::star_successors(std::size_t u) const {
  std::vector<std::size_t> out;
  const auto& row = reach_[comp_[u]];
  for (auto c = row.find_first(); c != boost::dynamic_bitset<>::npos; c = row.find_next(c))
    out.insert(out.end(), members_[c].begin(), members_[c].end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> Closure::star_predecessors(std::size_t v) const {
  std::vector<std::size_t> out;
  std::size_t cv = comp_[v];
  for (std::size_t c = 0; c < reach_.size(); ++c)
    if (reach_[c].test(cv)) out.insert(out.end(), members_[c].begin(), members_[c].end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- boundedness

BoundednessResult is_bounded(const PetriNet& net, std::size_t node_budget) {
  struct Node {
    Marking label;
    std::size_t parent;
  };
  BoundednessResult result;
  std::vector<Node> nodes{{net.initial(), kNone}};
  std::unordered_map<Marking, std::size_t, MarkingHash> seen{{net.initial(), 0}};
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    for (std::size_t t = 0; t < net.num_transitions(); ++t) {
      const Marking& m = nodes[head].label;
      if (!enabled(net, m, t)) continue;
      Marking n = fire(net, m, t);
      // A strictly smaller ancestor means the path between them pumps.
      for (std::size_t a = head; a != kNone; a = nodes[a].parent) {
        const Marking& anc = nodes[a].label;
        if (anc != n && covers(n, anc)) {
          result.kind = BoundednessResult::Kind::Unbounded;
          result.nodes = nodes.size();
          return result;
        }
      }
      if (seen.count(n)) continue;
      if (nodes.size() >= node_budget) {
        result.kind = BoundednessResult::Kind::Inconclusive;
        result.nodes = nodes.size();
        return result;
      }
      seen.emplace(n, nodes.size());
      nodes.push_back({std::move(n), head});
    }
  }
  result.kind = BoundednessResult::Kind::Bounded;
  result.reach_size = nodes.size();
  result.nodes = nodes.size();
  return result;
}

// ---------------------------------------------------------------- coverability

ReachVerdict coverable(const PetriNet& net, const Marking& target) {
  require_dimension(net, target);
  ReachVerdict v;
  if (covers(net.initial(), target)) {
    v.kind = ReachVerdict::Kind::Yes;
    v.marking = net.initial();
    return v;
  }
  struct Rec {
    Marking m;
    std::size_t next;
    std::size_t via;
  };
  std::vector<Rec> recs{{target, kNone, kNone}};
  std::vector<bool> active{true};
  std::vector<std::size_t> basis{0};
  std::deque<std::size_t> work{0};
  const std::size_t np = net.num_places();
  while (!work.empty()) {
    std::size_t i = work.front();
    work.pop_front();
    if (!active[i]) continue;
    for (std::size_t t = 0; t < net.num_transitions(); ++t) {
      Marking pre(np);
      for (std::size_t p = 0; p < np; ++p) {
        Tokens need = recs[i].m[p];
        Tokens in = net.pre(t, p), out = net.post(t, p);
        pre[p] = need >= out ? checked_add(need - out, in) : in;
      }
      bool subsumed = std::any_of(basis.begin(), basis.end(), [&](std::size_t b) { return covers(pre, recs[b].m); });
      if (subsumed) continue;
      std::size_t j = recs.size();
      recs.push_back({pre, i, t});
      active.push_back(true);
      std::erase_if(basis, [&](std::size_t b) {
        if (covers(recs[b].m, recs[j].m)) {
          active[b] = false;
          return true;
        }
        return false;
      });
      basis.push_back(j);
      if (covers(net.initial(), recs[j].m)) {
        std::vector<std::size_t> ts;
        Marking cur = net.initial();
        for (std::size_t k = j; recs[k].next != kNone; k = recs[k].next) {
          ts.push_back(recs[k].via);
          cur = fire(net, cur, recs[k].via);
        }
        v.kind = ReachVerdict::Kind::Yes;
        v.witness = replay_names(net, ts);
        v.marking = std::move(cur);
        return v;
      }
      work.push_back(j);
    }
  }
  v.kind = ReachVerdict::Kind::No;
  return v;
}

// ---------------------------------------------------------------- reachability

SearchResult search(const PetriNet& net, const std::function<bool(const Marking&)>& pred, std::size_t cap) {
  if (cap == 0) throw PreconditionError("exploration cap must be at least 1");
  SearchResult r;
  std::vector<Marking> nodes{net.initial()};
  std::vector<std::size_t> parent{kNone}, via{kNone};
  std::unordered_map<Marking, std::size_t, MarkingHash> seen{{net.initial(), 0}};
  auto finish = [&](std::size_t k) {
    std::vector<std::size_t> ts;
    r.found = nodes[k];
    for (; parent[k] != kNone; k = parent[k]) ts.push_back(via[k]);
    std::reverse(ts.begin(), ts.end());
    r.witness = replay_names(net, ts);
    r.explored = nodes.size();
    return r;
  };
  if (pred(nodes[0])) return finish(0);
  bool truncated = false;
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    for (std::size_t t = 0; t < net.num_transitions(); ++t) {
      if (!enabled(net, nodes[head], t)) continue;
      Marking n = fire(net, nodes[head], t);
      if (seen.count(n)) continue;
      if (nodes.size() >= cap) {
        truncated = true;
        continue;
      }
      seen.emplace(n, nodes.size());
      nodes.push_back(std::move(n));
      parent.push_back(head);
      via.push_back(t);
      if (pred(nodes.back())) return finish(nodes.size() - 1);
    }
  }
  r.complete = !truncated;
  if (truncated) ++g_audit.truncated_explorations;
  r.explored = nodes.size();
  return r;
}

namespace {

ReachVerdict from_search(SearchResult s) {
  ReachVerdict v;
  if (s.found) {
    v.kind = ReachVerdict::Kind::Yes;
    v.witness = std::move(s.witness);
    v.marking = std::move(s.found);
  } else if (s.complete) {
    note_absence_claim(true);
    v.kind = ReachVerdict::Kind::No;
  } else {
    v.kind = ReachVerdict::Kind::Inconclusive;
    v.reason = "cap-exceeded";
  }
  return v;
}

ReachVerdict upward_reach(const PetriNet& net, const std::vector<Marking>& bases) {
  ReachVerdict v;
  v.kind = ReachVerdict::Kind::No;
  for (const auto& b : bases) {
    ReachVerdict c = coverable(net, b);
    if (c.yes()) return c;
  }
  return v;
}

}  // namespace

ReachVerdict reachable(const PetriNet& net, const Marking& target, std::size_t cap) {
  require_dimension(net, target);
  if (target == net.initial()) {
    ReachVerdict v;
    v.kind = ReachVerdict::Kind::Yes;
    v.marking = target;
    return v;
  }
  if (coverable(net, target).no()) {
    ReachVerdict v;
    v.kind = ReachVerdict::Kind::No;
    return v;
  }
  return from_search(search(net, [&](const Marking& m) { return m == target; }, cap));
}

ReachVerdict reach_semilinear(const PetriNet& net, const MarkingSet& target, std::size_t cap, const QeOptions& opts) {
  auto vars = place_vars(net);
  if (const auto* s = std::get_if<SemilinearSet>(&target)) {
    if (s->dimension != net.num_places()) throw DimensionError("semilinear set dimension differs from place count");
    if (s->components.empty()) return ReachVerdict{ReachVerdict::Kind::No, {}, {}, {}};
    if (auto bases = upward_bases(*s)) return upward_reach(net, *bases);
    return from_search(search(net, [&](const Marking& m) { return membership(*s, m, opts); }, cap));
  }
  const Pres& f = std::get<Pres>(target);
  for (const auto& v : free_vars(f))
    if (!net.place_index(v)) throw DimensionError("target formula has free variable '" + v + "' that is not a place");
  if (auto bases = upward_bases(f, vars)) return upward_reach(net, *bases);
  PointEvaluator pe(f, vars, opts);
  // An empty target is unreachable regardless of the exploration.
  try {
    if (!decide(pa::exists_nat(vars, pe.formula()), opts)) return ReachVerdict{ReachVerdict::Kind::No, {}, {}, {}};
  } catch (const ResourceExceeded&) {
  }
  return from_search(search(net, [&](const Marking& m) { return pe(m); }, cap));
}

HackInstance hack_reduce(const PetriNet& net, const SemilinearSet& target) {
  if (target.dimension != net.num_places()) throw DimensionError("semilinear set dimension differs from place count");
  PetriNet out = net;
  out.set_name(net.name() + "_hack");
  const std::size_t np = net.num_places();
  std::size_t run = out.add_place(unused_name(net, "run"), 1);
  for (std::size_t t = 0; t < net.num_transitions(); ++t) {
    out.set_pre(t, run, 1);
    out.set_post(t, run, 1);
  }
  std::size_t done = kNone;
  std::vector<std::size_t> ctl;
  for (std::size_t k = 0; k < target.components.size(); ++k) ctl.push_back(out.add_place(unused_name(out, "ctl" + std::to_string(k)), 0));
  done = out.add_place(unused_name(out, "done"), 0);
  for (std::size_t k = 0; k < target.components.size(); ++k) {
    const auto& l = target.components[k];
    std::size_t sw = out.add_transition(unused_name(out, "switch" + std::to_string(k)));
    out.set_pre(sw, run, 1);
    for (std::size_t p = 0; p < np; ++p) out.set_pre(sw, p, l.base[p]);
    out.set_post(sw, ctl[k], 1);
    for (std::size_t j = 0; j < l.periods.size(); ++j) {
      std::size_t per = out.add_transition(unused_name(out, "period" + std::to_string(k) + "_" + std::to_string(j)));
      out.set_pre(per, ctl[k], 1);
      out.set_post(per, ctl[k], 1);
      for (std::size_t p = 0; p < np; ++p) out.set_pre(per, p, l.periods[j][p]);
    }
    std::size_t fin = out.add_transition(unused_name(out, "finish" + std::to_string(k)));
    out.set_pre(fin, ctl[k], 1);
    out.set_post(fin, done, 1);
  }
  Marking goal(out.num_places(), 0);
  goal[done] = 1;
  return {std::move(out), std::move(goal)};
}

// ---------------------------------------------------------------- oracle

ReachOracle::ReachOracle(const PetriNet& net, std::size_t cap) : net_(net), graph_(explore(net, cap)) {}

ReachVerdict ReachOracle::contains(const Marking& m) const {
  require_dimension(net_, m);
  ReachVerdict v;
  if (auto i = graph_.find(m)) {
    v.kind = ReachVerdict::Kind::Yes;
    v.witness = graph_.path_to(*i, net_);
    v.marking = m;
    return v;
  }
  if (graph_.complete) {
    note_absence_claim(true);
    v.kind = ReachVerdict::Kind::No;
    return v;
  }
  if (coverable(net_, m).no()) {
    v.kind = ReachVerdict::Kind::No;
    return v;
  }
  v.kind = ReachVerdict::Kind::Inconclusive;
  v.reason = "cap-exceeded";
  return v;
}

}  // namespace pnmc
