#include <algorithm>
#include <deque>
#include <unordered_map>

#include "compiled_fo.hpp"
#include "pnmc/engines.hpp"
#include "pnmc/errors.hpp"

namespace pnmc {

// ---------------------------------------------------------------- verdicts

CheckVerdict CheckVerdict::holds(std::string engine, std::string witness) {
  return {Kind::Holds, std::move(engine), {}, std::move(witness)};
}

CheckVerdict CheckVerdict::fails(std::string engine, std::string witness) {
  return {Kind::Fails, std::move(engine), {}, std::move(witness)};
}

CheckVerdict CheckVerdict::inconclusive(std::string engine, std::string reason) {
  return {Kind::Inconclusive, std::move(engine), std::move(reason), {}};
}

CheckVerdict CheckVerdict::of(bool value, std::string engine, std::string witness) {
  return value ? holds(std::move(engine), std::move(witness)) : fails(std::move(engine), std::move(witness));
}

CheckVerdict CheckVerdict::negated() const {
  CheckVerdict v = *this;
  if (kind == Kind::Holds) v.kind = Kind::Fails;
  else if (kind == Kind::Fails) v.kind = Kind::Holds;
  return v;
}

const char* to_string(CheckVerdict::Kind k) {
  switch (k) {
    case CheckVerdict::Kind::Holds: return "HOLDS";
    case CheckVerdict::Kind::Fails: return "FAILS";
    case CheckVerdict::Kind::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

namespace {
std::string field(const char* key, const std::string& value) {
  bool quote = value.find(' ') != std::string::npos;
  return std::string(" ") + key + "=" + (quote ? "\"" + value + "\"" : value);
}
}  // namespace

std::string CheckVerdict::line() const {
  std::string s = std::string(to_string(kind)) + " " + (engine.empty() ? "none" : engine);
  if (!reason.empty()) s += field("reason", reason);
  if (!witness.empty()) s += field("witness", witness);
  return s;
}

int exit_code(const CheckVerdict& v) {
  switch (v.kind) {
    case CheckVerdict::Kind::Holds: return 0;
    case CheckVerdict::Kind::Fails: return 1;
    case CheckVerdict::Kind::Inconclusive: return 2;
  }
  return 2;
}

Truth truth_not(Truth a) {
  if (a == Truth::Unknown) return a;
  return a == Truth::True ? Truth::False : Truth::True;
}

Truth truth_and(Truth a, Truth b) {
  if (a == Truth::False || b == Truth::False) return Truth::False;
  if (a == Truth::True && b == Truth::True) return Truth::True;
  return Truth::Unknown;
}

Truth truth_or(Truth a, Truth b) { return truth_not(truth_and(truth_not(a), truth_not(b))); }

// ---------------------------------------------------------------- explicit FO

namespace {

using detail::CNode;
using detail::CompiledFo;

class ExplicitFo {
 public:
  ExplicitFo(const ReachGraph& g, const Closure& c, const CompiledFo& f) : g_(g), c_(c), f_(f), env_(f.slots(), 0) {}

  std::vector<std::size_t>& env() { return env_; }

  bool eval(int i) {
    const CNode& n = f_.nodes[i];
    switch (n.kind) {
      case FoKind::True: return true;
      case FoKind::False: return false;
      case FoKind::Init: return env_[n.a] == g_.initial;
      case FoKind::Eq: return env_[n.a] == env_[n.b];
      case FoKind::Edge: {
        const auto& out = g_.edges[env_[n.a]];
        return std::binary_search(out.begin(), out.end(), env_[n.b]);
      }
      case FoKind::Star: return c_.star(env_[n.a], env_[n.b]);
      case FoKind::Plus: return c_.plus(env_[n.a], env_[n.b]);
      case FoKind::Not: return !eval(n.lhs);
      case FoKind::And: return eval(n.lhs) && eval(n.rhs);
      case FoKind::Or: return eval(n.lhs) || eval(n.rhs);
      case FoKind::Implies: return !eval(n.lhs) || eval(n.rhs);
      case FoKind::Forall:
      case FoKind::Exists: {
        bool want = n.kind == FoKind::Exists;
        std::size_t saved = env_[n.a];
        bool result = !want;
        for (std::size_t v = 0; v < g_.size(); ++v) {
          env_[n.a] = v;
          if (eval(n.lhs) == want) {
            result = want;
            break;
          }
        }
        env_[n.a] = saved;
        return result;
      }
    }
    return false;
  }

  // For a leading block of quantifiers of one kind whose value is decided by
  // a single valuation, report that valuation.
  std::string witness(bool value) {
    std::string out;
    int i = f_.root;
    auto want = value ? FoKind::Exists : FoKind::Forall;
    while (f_.nodes[i].kind == want) {
      const CNode& n = f_.nodes[i];
      bool found = false;
      for (std::size_t v = 0; v < g_.size(); ++v) {
        env_[n.a] = v;
        if (eval(n.lhs) == value) {
          found = true;
          break;
        }
      }
      if (!found) break;
      if (!out.empty()) out += ';';
      out += f_.slot_names[n.a] + "=" + format_marking(g_.nodes[env_[n.a]]);
      i = n.lhs;
    }
    return out;
  }

 private:
  const ReachGraph& g_;
  const Closure& c_;
  const CompiledFo& f_;
  std::vector<std::size_t> env_;
};

void require_complete(const ReachGraph& g) {
  if (!g.complete) throw IncompleteGraphError("reachability graph is incomplete (cap reached)");
}

}  // namespace

CheckVerdict explicit_fo(const ReachGraph& g, const Fo& f) {
  require_complete(g);
  Closure c(g);
  return explicit_fo(g, c, f);
}

CheckVerdict explicit_fo(const ReachGraph& g, const Closure& closure, const Fo& f) {
  require_complete(g);
  if (!is_sentence(f)) throw UnboundVariableError("unbound variable '" + *free_vars(f).begin() + "'");
  auto compiled = detail::FoCompiler::run(f, {});
  ExplicitFo ev(g, closure, compiled);
  bool value = ev.eval(compiled.root);
  if (!value) note_absence_claim(true);
  return CheckVerdict::of(value, "explicit_fo", ev.witness(value));
}

bool explicit_fo_at(const ReachGraph& g, const Closure& closure, const Fo& f,
                    const std::map<std::string, std::size_t>& valuation) {
  require_complete(g);
  std::vector<std::string> order;
  for (const auto& [v, _] : valuation) order.push_back(v);
  auto compiled = detail::FoCompiler::run(f, order);
  ExplicitFo ev(g, closure, compiled);
  for (const auto& [v, node] : valuation) {
    if (node >= g.size()) throw PreconditionError("valuation of '" + v + "' is not a graph node");
    ev.env()[compiled.free_slots.at(v)] = node;
  }
  return ev.eval(compiled.root);
}

// ---------------------------------------------------------------- PAML atoms

namespace {

__int128 paml_term(const PamlTerm& t, const PetriNet& net, std::span<const Tokens> m) {
  __int128 v = t.constant;
  for (const auto& [place, k] : t.coeffs) {
    auto p = net.place_index(place);
    if (!p) throw SemanticError("unknown place", place);
    v += static_cast<__int128>(k) * static_cast<__int128>(m[*p]);
  }
  return v;
}

}  // namespace

bool eval_paml(const Paml& c, const PetriNet& net, std::span<const Tokens> m) {
  switch (c->kind) {
    case PamlKind::True: return true;
    case PamlKind::False: return false;
    case PamlKind::Not: return !eval_paml(c->lhs, net, m);
    case PamlKind::And: return eval_paml(c->lhs, net, m) && eval_paml(c->rhs, net, m);
    case PamlKind::Or: return eval_paml(c->lhs, net, m) || eval_paml(c->rhs, net, m);
    case PamlKind::Atom: {
      __int128 t = paml_term(c->term, net, m);
      __int128 b = c->bound;
      switch (c->rel) {
        case PamlRel::Le: return t <= b;
        case PamlRel::Ge: return t >= b;
        case PamlRel::Lt: return t < b;
        case PamlRel::Gt: return t > b;
        case PamlRel::Eq: return t == b;
        case PamlRel::Ne: return t != b;
        case PamlRel::Mod: return (t - b) % c->modulus == 0;
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------- explicit ML

std::vector<bool> explicit_ml_all(const ReachGraph& g, const PetriNet& net, const Ml& f) {
  require_complete(g);
  check_places(f, net);
  const std::size_t n = g.size();
  auto rec = [&](auto&& self, const Ml& h) -> std::vector<bool> {
    std::vector<bool> out(n);
    switch (h->kind) {
      case MlKind::Top: out.assign(n, true); break;
      case MlKind::Bot: break;
      case MlKind::Atom:
        for (std::size_t i = 0; i < n; ++i) out[i] = eval_paml(h->atom, net, g.nodes[i]);
        break;
      case MlKind::Not: {
        auto a = self(self, h->lhs);
        for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
        break;
      }
      case MlKind::And:
      case MlKind::Or:
      case MlKind::Implies: {
        auto a = self(self, h->lhs);
        auto b = self(self, h->rhs);
        for (std::size_t i = 0; i < n; ++i)
          out[i] = h->kind == MlKind::And ? (a[i] && b[i]) : h->kind == MlKind::Or ? (a[i] || b[i]) : (!a[i] || b[i]);
        break;
      }
      case MlKind::Box:
      case MlKind::Dia:
      case MlKind::BoxInv:
      case MlKind::DiaInv: {
        auto a = self(self, h->lhs);
        bool forward = h->kind == MlKind::Box || h->kind == MlKind::Dia;
        bool universal = h->kind == MlKind::Box || h->kind == MlKind::BoxInv;
        const auto& adj = forward ? g.edges : g.preds;
        for (std::size_t i = 0; i < n; ++i) {
          bool r = universal;
          for (auto j : adj[i])
            if (a[j] != universal) {
              r = !universal;
              break;
            }
          out[i] = r;
        }
        break;
      }
    }
    return out;
  };
  return rec(rec, f);
}

CheckVerdict explicit_ml(const ReachGraph& g, const PetriNet& net, const Ml& f, std::size_t node) {
  if (node >= g.size()) throw PreconditionError("node index out of range");
  auto sat = explicit_ml_all(g, net, f);
  if (!sat[node]) note_absence_claim(true);
  return CheckVerdict::of(sat[node], "explicit_ml");
}

CheckVerdict explicit_ml_valid(const ReachGraph& g, const PetriNet& net, const Ml& f) {
  auto sat = explicit_ml_all(g, net, f);
  for (std::size_t i = 0; i < sat.size(); ++i)
    if (!sat[i]) return CheckVerdict::fails("explicit_ml", format_marking(g.nodes[i]));
  note_absence_claim(true);
  return CheckVerdict::holds("explicit_ml");
}

// ---------------------------------------------------------------- forward ML

namespace {

void require_forward(const Ml& f) {
  if (has_inverse(f)) throw FragmentError("inverse modalities are not supported by this engine");
}

class ForwardMl {
 public:
  explicit ForwardMl(const PetriNet& net) : net_(net) {}

  bool eval(const Ml& f, const Marking& m) {
    switch (f->kind) {
      case MlKind::Top: return true;
      case MlKind::Bot: return false;
      case MlKind::Atom: return eval_paml(f->atom, net_, m);
      case MlKind::Not: return !eval(f->lhs, m);
      case MlKind::And: return eval(f->lhs, m) && eval(f->rhs, m);
      case MlKind::Or: return eval(f->lhs, m) || eval(f->rhs, m);
      case MlKind::Implies: return !eval(f->lhs, m) || eval(f->rhs, m);
      case MlKind::Box:
      case MlKind::Dia: {
        Key key{f.get(), m};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        bool universal = f->kind == MlKind::Box;
        bool r = universal;
        for (const auto& s : successors(net_, m))
          if (eval(f->lhs, s) != universal) {
            r = !universal;
            break;
          }
        memo_.emplace(std::move(key), r);
        return r;
      }
      default: throw FragmentError("inverse modalities are not supported by this engine");
    }
  }

 private:
  struct Key {
    const MlNode* f;
    Marking m;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return MarkingHash{}(k.m) ^ (std::hash<const void*>{}(k.f) * 0x9e3779b97f4a7c15ULL);
    }
  };
  const PetriNet& net_;
  std::unordered_map<Key, bool, KeyHash> memo_;
};

}  // namespace

bool ml_forward_at(const PetriNet& net, const Ml& f, std::span<const Tokens> m) {
  require_forward(f);
  check_places(f, net);
  if (m.size() != net.num_places()) throw DimensionError("marking length differs from the place count");
  ForwardMl ev(net);
  return ev.eval(f, Marking(m.begin(), m.end()));
}

CheckVerdict mc_ml_forward(const PetriNet& net, const Ml& f) {
  return CheckVerdict::of(ml_forward_at(net, f, net.initial()), "mc_ml_forward");
}

ReachGraph ml_unrolling(const PetriNet& net, std::size_t depth, std::size_t cap) {
  ReachGraph g;
  g.nodes.push_back(net.initial());
  g.edges.emplace_back();
  g.preds.emplace_back();
  g.parent.push_back(0);
  g.parent_transition.push_back(0);
  std::vector<std::size_t> level{0};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::size_t> next;
    for (auto u : level) {
      for (const auto& s : successors(net, g.nodes[u])) {
        if (g.nodes.size() >= cap) throw ResourceExceeded("unrolling exceeds the node cap");
        std::size_t v = g.nodes.size();
        g.nodes.push_back(s);
        g.edges.emplace_back();
        g.preds.push_back({u});
        g.parent.push_back(u);
        g.parent_transition.push_back(0);
        g.edges[u].push_back(v);
        next.push_back(v);
      }
    }
    level = std::move(next);
  }
  g.complete = true;
  return g;
}

// ---------------------------------------------------------------- backward ML

CheckVerdict mc_ml_backward(const PetriNet& net, const Ml& f, const EngineOptions& opts) {
  const char* name = "mc_ml_backward";
  check_places(f, net);
  const std::size_t radius = modal_degree(f);

  // Ball around M0 in the graph with both edge directions.
  std::unordered_map<Marking, std::size_t, MarkingHash> index;
  std::vector<Marking> nodes{net.initial()};
  std::vector<bool> forward_reached{true};
  index.emplace(net.initial(), 0);
  std::vector<std::size_t> level{0};
  auto add = [&](const Marking& m, bool fwd, std::vector<std::size_t>& next) -> bool {
    auto [it, fresh] = index.emplace(m, nodes.size());
    if (fresh) {
      if (nodes.size() >= opts.cap) return false;
      nodes.push_back(m);
      forward_reached.push_back(fwd);
      next.push_back(it->second);
    }
    return true;
  };
  for (std::size_t d = 0; d < radius; ++d) {
    std::vector<std::size_t> next;
    for (auto u : level) {
      Marking m = nodes[u];
      for (const auto& s : successors(net, m))
        if (!add(s, forward_reached[u], next)) return CheckVerdict::inconclusive(name, "cap-exceeded");
      for (const auto& s : predecessors(net, m))
        if (!add(s, false, next)) return CheckVerdict::inconclusive(name, "cap-exceeded");
    }
    level = std::move(next);
  }

  // Keep only reachable markings.
  std::optional<ReachOracle> oracle;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (forward_reached[i]) {
      kept.push_back(i);
      continue;
    }
    if (!oracle) oracle.emplace(net, opts.cap);
    auto v = oracle->contains(nodes[i]);
    bool member = v.yes();
    if (!v.definitive()) {
      // A backward search from the candidate often dies out quickly.
      Truth t = reaches(net, net.initial(), nodes[i], opts.cap);
      if (t == Truth::Unknown) return CheckVerdict::inconclusive(name, "reachability-unknown");
      member = t == Truth::True;
    }
    if (member) kept.push_back(i);
  }

  ReachGraph g;
  for (auto i : kept) {
    g.index.emplace(nodes[i], g.nodes.size());
    g.nodes.push_back(nodes[i]);
  }
  g.edges.resize(g.nodes.size());
  g.preds.resize(g.nodes.size());
  for (std::size_t u = 0; u < g.nodes.size(); ++u)
    for (const auto& s : successors(net, g.nodes[u]))
      if (auto v = g.find(s)) {
        g.edges[u].push_back(*v);
        g.preds[*v].push_back(u);
      }
  for (auto& e : g.edges) std::sort(e.begin(), e.end());
  for (auto& p : g.preds) std::sort(p.begin(), p.end());
  g.initial = 0;
  g.complete = true;
  auto sat = explicit_ml_all(g, net, f);
  return CheckVerdict::of(sat[0], name);
}

}  // namespace pnmc
