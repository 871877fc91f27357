#pragma once

// Slot-resolved form of a first-order formula: every variable occurrence is
// replaced by the index of the binder (or free variable) it refers to.

#include <map>
#include <string>
#include <vector>

#include "pnmc/errors.hpp"
#include "pnmc/logic.hpp"

namespace pnmc::detail {

struct CNode {
  FoKind kind;
  int a = -1;  // slot of the first variable, or the bound slot for quantifiers
  int b = -1;
  int lhs = -1;
  int rhs = -1;
};

struct CompiledFo {
  std::vector<CNode> nodes;
  int root = -1;
  std::vector<std::string> slot_names;
  std::map<std::string, int> free_slots;

  std::size_t slots() const { return slot_names.size(); }
};

class FoCompiler {
 public:
  static CompiledFo run(const Fo& f, const std::vector<std::string>& free_order) {
    FoCompiler c;
    for (const auto& v : free_order) {
      int s = c.new_slot(v);
      c.out_.free_slots[v] = s;
      c.scope_.emplace_back(v, s);
    }
    c.out_.root = c.compile(f);
    return std::move(c.out_);
  }

 private:
  CompiledFo out_;
  std::vector<std::pair<std::string, int>> scope_;

  int new_slot(const std::string& name) {
    out_.slot_names.push_back(name);
    return static_cast<int>(out_.slot_names.size()) - 1;
  }

  int lookup(const std::string& v) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == v) return it->second;
    throw UnboundVariableError("unbound variable '" + v + "'");
  }

  int compile(const Fo& f) {
    CNode n{f->kind};
    switch (f->kind) {
      case FoKind::True:
      case FoKind::False: break;
      case FoKind::Init: n.a = lookup(f->x); break;
      case FoKind::Edge:
      case FoKind::Star:
      case FoKind::Plus:
      case FoKind::Eq:
        n.a = lookup(f->x);
        n.b = lookup(f->y);
        break;
      case FoKind::Not: n.lhs = compile(f->lhs); break;
      case FoKind::And:
      case FoKind::Or:
      case FoKind::Implies:
        n.lhs = compile(f->lhs);
        n.rhs = compile(f->rhs);
        break;
      case FoKind::Forall:
      case FoKind::Exists:
        n.a = new_slot(f->x);
        scope_.emplace_back(f->x, n.a);
        n.lhs = compile(f->lhs);
        scope_.pop_back();
        break;
    }
    out_.nodes.push_back(n);
    return static_cast<int>(out_.nodes.size()) - 1;
  }
};

}  // namespace pnmc::detail
