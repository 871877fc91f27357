#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pnmc {

// Token counts are checked 64-bit naturals; arithmetic that would leave the
// range throws OverflowError instead of wrapping.
using Tokens = std::uint64_t;
using Weight = std::uint64_t;
using Marking = std::vector<Tokens>;

struct MarkingHash {
  std::size_t operator()(const Marking& m) const noexcept;
};

struct TransitionEffect {
  std::vector<Weight> guard;
  std::vector<std::int64_t> delta;
};

class PetriNet {
 public:
  explicit PetriNet(std::string name = "net") : name_(std::move(name)) {}

  std::size_t add_place(std::string name, Tokens initial = 0);
  std::size_t add_transition(std::string name);
  void set_pre(std::size_t t, std::size_t p, Weight w) { pre_.at(t).at(p) = w; }
  void set_post(std::size_t t, std::size_t p, Weight w) { post_.at(t).at(p) = w; }
  void set_initial(Marking m);
  void set_initial(std::size_t p, Tokens v) { initial_.at(p) = v; }
  void set_name(std::string name) { name_ = std::move(name); }

  const std::string& name() const noexcept { return name_; }
  std::size_t num_places() const noexcept { return places_.size(); }
  std::size_t num_transitions() const noexcept { return transitions_.size(); }
  const std::vector<std::string>& places() const noexcept { return places_; }
  const std::vector<std::string>& transitions() const noexcept { return transitions_; }
  const std::string& place_name(std::size_t p) const { return places_.at(p); }
  const std::string& transition_name(std::size_t t) const { return transitions_.at(t); }
  std::optional<std::size_t> place_index(std::string_view name) const;
  std::optional<std::size_t> transition_index(std::string_view name) const;
  std::size_t require_transition(std::string_view name) const;

  Weight pre(std::size_t t, std::size_t p) const { return pre_[t][p]; }
  Weight post(std::size_t t, std::size_t p) const { return post_[t][p]; }
  std::span<const Weight> pre(std::size_t t) const { return pre_[t]; }
  std::span<const Weight> post(std::size_t t) const { return post_[t]; }
  const Marking& initial() const noexcept { return initial_; }

  friend bool operator==(const PetriNet&, const PetriNet&) = default;

 private:
  std::string name_;
  std::vector<std::string> places_;
  std::vector<std::string> transitions_;
  std::vector<std::vector<Weight>> pre_;   // [transition][place]
  std::vector<std::vector<Weight>> post_;  // [transition][place]
  Marking initial_;
};

TransitionEffect effect(const PetriNet& net, std::size_t t);
std::int64_t delta(const PetriNet& net, std::size_t t, std::size_t p);

bool enabled(const PetriNet& net, std::span<const Tokens> m, std::size_t t);
bool enabled(const PetriNet& net, std::span<const Tokens> m, std::string_view t);
Marking fire(const PetriNet& net, std::span<const Tokens> m, std::size_t t);
Marking fire(const PetriNet& net, std::span<const Tokens> m, std::string_view t);
// Sorted, duplicate-free.
std::vector<Marking> successors(const PetriNet& net, std::span<const Tokens> m);
// Markings from which one firing leads to `m`; sorted, duplicate-free.
std::vector<Marking> predecessors(const PetriNet& net, std::span<const Tokens> m);
bool is_deadlock(const PetriNet& net, std::span<const Tokens> m);

std::vector<std::size_t> neutral_transitions(const PetriNet& net);
std::vector<std::pair<std::size_t, std::size_t>> self_loop_pairs(const PetriNet& net);

PetriNet parse_net(std::string_view text);
std::string serialize(const PetriNet& net);

bool is_identifier(std::string_view s);
std::string format_marking(std::span<const Tokens> m);
// Accepts "1,0,2" or "(1,0,2)"; length must equal `places`.
Marking parse_marking(std::string_view text, std::size_t places);

// `stem`, or `stem` followed by the smallest number that makes it unused by
// any place or transition of the net.
std::string unused_name(const PetriNet& net, const std::string& stem);
// Every arc reversed: F(p, t) and F(t, p) swap.
PetriNet inverse_net(const PetriNet& net);

Tokens checked_add(Tokens a, Tokens b);
Tokens checked_mul(Tokens a, Tokens b);

}  // namespace pnmc
