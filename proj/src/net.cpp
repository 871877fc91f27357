#include "pnmc/net.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "pnmc/errors.hpp"

namespace pnmc {

std::size_t MarkingHash::operator()(const Marking& m) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ m.size();
  for (Tokens v : m) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 33));
}

Tokens checked_add(Tokens a, Tokens b) {
  if (a > std::numeric_limits<Tokens>::max() - b) throw OverflowError("token count overflow");
  return a + b;
}

Tokens checked_mul(Tokens a, Tokens b) {
  if (a != 0 && b > std::numeric_limits<Tokens>::max() / a) throw OverflowError("token count overflow");
  return a * b;
}

std::size_t PetriNet::add_place(std::string name, Tokens initial) {
  places_.push_back(std::move(name));
  initial_.push_back(initial);
  for (auto& row : pre_) row.push_back(0);
  for (auto& row : post_) row.push_back(0);
  return places_.size() - 1;
}

std::size_t PetriNet::add_transition(std::string name) {
  transitions_.push_back(std::move(name));
  pre_.emplace_back(places_.size(), 0);
  post_.emplace_back(places_.size(), 0);
  return transitions_.size() - 1;
}

void PetriNet::set_initial(Marking m) {
  if (m.size() != places_.size()) throw DimensionError("initial marking has wrong length");
  initial_ = std::move(m);
}

std::optional<std::size_t> PetriNet::place_index(std::string_view name) const {
  auto it = std::find(places_.begin(), places_.end(), name);
  if (it == places_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - places_.begin());
}

std::optional<std::size_t> PetriNet::transition_index(std::string_view name) const {
  auto it = std::find(transitions_.begin(), transitions_.end(), name);
  if (it == transitions_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - transitions_.begin());
}

std::size_t PetriNet::require_transition(std::string_view name) const {
  auto t = transition_index(name);
  if (!t) throw SemanticError("unknown transition", std::string(name));
  return *t;
}

std::int64_t delta(const PetriNet& net, std::size_t t, std::size_t p) {
  return static_cast<std::int64_t>(net.post(t, p)) - static_cast<std::int64_t>(net.pre(t, p));
}

TransitionEffect effect(const PetriNet& net, std::size_t t) {
  TransitionEffect e;
  e.guard.assign(net.pre(t).begin(), net.pre(t).end());
  e.delta.resize(net.num_places());
  for (std::size_t p = 0; p < net.num_places(); ++p) e.delta[p] = delta(net, t, p);
  return e;
}

bool enabled(const PetriNet& net, std::span<const Tokens> m, std::size_t t) {
  auto pre = net.pre(t);
  for (std::size_t p = 0; p < pre.size(); ++p)
    if (m[p] < pre[p]) return false;
  return true;
}

bool enabled(const PetriNet& net, std::span<const Tokens> m, std::string_view t) {
  return enabled(net, m, net.require_transition(t));
}

Marking fire(const PetriNet& net, std::span<const Tokens> m, std::size_t t) {
  if (!enabled(net, m, t)) throw FiringError("transition " + net.transition_name(t) + " is not enabled");
  Marking out(m.begin(), m.end());
  auto pre = net.pre(t);
  auto post = net.post(t);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = checked_add(out[p] - pre[p], post[p]);
  return out;
}

Marking fire(const PetriNet& net, std::span<const Tokens> m, std::string_view t) {
  return fire(net, m, net.require_transition(t));
}

std::vector<Marking> successors(const PetriNet& net, std::span<const Tokens> m) {
  std::vector<Marking> out;
  for (std::size_t t = 0; t < net.num_transitions(); ++t)
    if (enabled(net, m, t)) out.push_back(fire(net, m, t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Marking> predecessors(const PetriNet& net, std::span<const Tokens> m) {
  std::vector<Marking> out;
  for (std::size_t t = 0; t < net.num_transitions(); ++t) {
    Marking p(m.begin(), m.end());
    bool ok = true;
    for (std::size_t i = 0; i < p.size() && ok; ++i) {
      if (p[i] < net.post(t, i)) ok = false;
      else p[i] = checked_add(p[i] - net.post(t, i), net.pre(t, i));
    }
    if (ok) out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool is_deadlock(const PetriNet& net, std::span<const Tokens> m) {
  for (std::size_t t = 0; t < net.num_transitions(); ++t)
    if (enabled(net, m, t)) return false;
  return true;
}

std::vector<std::size_t> neutral_transitions(const PetriNet& net) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < net.num_transitions(); ++t)
    if (std::equal(net.pre(t).begin(), net.pre(t).end(), net.post(t).begin())) out.push_back(t);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> self_loop_pairs(const PetriNet& net) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = 0; p < net.num_places(); ++p)
    for (std::size_t t = 0; t < net.num_transitions(); ++t)
      if (net.pre(t, p) > 0 && net.pre(t, p) == net.post(t, p)) out.emplace_back(p, t);
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!std::isalpha(head) && s[0] != '_') return false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '_') return false;
  }
  return true;
}

namespace {

struct Word {
  std::string_view text;
  std::size_t column;
};

std::vector<Word> split_words(std::string_view line) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    words.push_back({line.substr(start, i - start), start + 1});
  }
  return words;
}

std::uint64_t parse_nat(std::string_view s, std::size_t line, std::size_t col, const char* what) {
  if (!s.empty() && s[0] == '-') throw ParseError(std::string("negative ") + what, line, col);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc::result_out_of_range) throw ParseError(std::string(what) + " out of range", line, col);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(std::string("expected natural number for ") + what, line, col);
  return v;
}

}  // namespace

PetriNet parse_net(std::string_view text) {
  PetriNet net;
  bool have_header = false;
  std::optional<std::size_t> current;
  std::unordered_set<std::string> ids;
  std::vector<std::vector<bool>> seen_in, seen_out;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto words = split_words(line);
    if (words.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto& kw = words[0];
    auto expect_ident = [&](std::size_t i) -> std::string {
      if (i >= words.size()) throw ParseError("expected identifier", line_no, line.size() + 1);
      if (!is_identifier(words[i].text)) throw ParseError("invalid identifier '" + std::string(words[i].text) + "'", line_no, words[i].column);
      return std::string(words[i].text);
    };
    auto expect_end = [&](std::size_t i) {
      if (i < words.size()) throw ParseError("unexpected '" + std::string(words[i].text) + "'", line_no, words[i].column);
    };
    if (!have_header) {
      if (kw.text != "net") throw ParseError("expected 'net' header", line_no, kw.column);
      net.set_name(expect_ident(1));
      expect_end(2);
      have_header = true;
    } else if (kw.text == "place") {
      if (net.num_transitions() > 0) throw ParseError("place declared after transitions", line_no, kw.column);
      std::string id = expect_ident(1);
      if (words.size() < 3 || words[2].text != "init")
        throw ParseError("expected 'init'", line_no, words.size() > 2 ? words[2].column : line.size() + 1);
      if (words.size() < 4) throw ParseError("expected initial token count", line_no, line.size() + 1);
      Tokens init = parse_nat(words[3].text, line_no, words[3].column, "token count");
      expect_end(4);
      if (!ids.insert(id).second) throw SemanticError("duplicate identifier", id);
      net.add_place(id, init);
    } else if (kw.text == "trans") {
      std::string id = expect_ident(1);
      expect_end(2);
      if (!ids.insert(id).second) throw SemanticError("duplicate identifier", id);
      current = net.add_transition(id);
      seen_in.emplace_back(net.num_places(), false);
      seen_out.emplace_back(net.num_places(), false);
    } else if (kw.text == "in" || kw.text == "out") {
      if (!current) throw ParseError("'" + std::string(kw.text) + "' outside a transition block", line_no, kw.column);
      bool is_in = kw.text == "in";
      for (std::size_t i = 1; i < words.size(); ++i) {
        auto arc = words[i].text;
        auto colon = arc.find(':');
        if (colon == std::string_view::npos) throw ParseError("expected place:weight", line_no, words[i].column);
        auto pname = arc.substr(0, colon);
        if (!is_identifier(pname)) throw ParseError("invalid identifier '" + std::string(pname) + "'", line_no, words[i].column);
        Weight w = parse_nat(arc.substr(colon + 1), line_no, words[i].column + colon + 1, "weight");
        auto p = net.place_index(pname);
        if (!p) throw SemanticError("unknown place", std::string(pname));
        auto& seen = is_in ? seen_in[*current] : seen_out[*current];
        if (seen[*p]) throw SemanticError("duplicate arc", std::string(pname));
        seen[*p] = true;
        if (is_in) net.set_pre(*current, *p, w);
        else net.set_post(*current, *p, w);
      }
    } else if (kw.text == "net") {
      throw ParseError("duplicate 'net' header", line_no, kw.column);
    } else {
      throw ParseError("unknown keyword '" + std::string(kw.text) + "'", line_no, kw.column);
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError("missing 'net' header", line_no == 0 ? 1 : line_no, 1);
  return net;
}

std::string serialize(const PetriNet& net) {
  std::ostringstream out;
  out << "net " << net.name() << '\n';
  for (std::size_t p = 0; p < net.num_places(); ++p)
    out << "place " << net.place_name(p) << " init " << net.initial()[p] << '\n';
  for (std::size_t t = 0; t < net.num_transitions(); ++t) {
    out << "trans " << net.transition_name(t) << '\n';
    auto arcs = [&](const char* kw, std::span<const Weight> w) {
      bool any = std::any_of(w.begin(), w.end(), [](Weight x) { return x > 0; });
      if (!any) return;
      out << kw;
      for (std::size_t p = 0; p < w.size(); ++p)
        if (w[p] > 0) out << ' ' << net.place_name(p) << ':' << w[p];
      out << '\n';
    };
    arcs("in", net.pre(t));
    arcs("out", net.post(t));
  }
  return out.str();
}

std::string format_marking(std::span<const Tokens> m) {
  std::string s = "(";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(m[i]);
  }
  return s + ")";
}

Marking parse_marking(std::string_view text, std::size_t places) {
  std::string s;
  for (char c : text)
    if (c != '(' && c != ')' && !std::isspace(static_cast<unsigned char>(c))) s += c;
  Marking m;
  if (!s.empty()) {
    std::size_t start = 0;
    while (true) {
      auto comma = s.find(',', start);
      auto part = std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      m.push_back(parse_nat(part, 1, start + 1, "token count"));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (m.size() != places)
    throw DimensionError("marking has " + std::to_string(m.size()) + " entries, net has " + std::to_string(places) + " places");
  return m;
}

std::string unused_name(const PetriNet& net, const std::string& stem) {
  auto taken = [&](const std::string& n) { return net.place_index(n) || net.transition_index(n); };
  if (!taken(stem)) return stem;
  for (std::size_t k = 1;; ++k) {
    std::string candidate = stem + std::to_string(k);
    if (!taken(candidate)) return candidate;
  }
}

PetriNet inverse_net(const PetriNet& net) {
  PetriNet inv(net.name());
  for (std::size_t p = 0; p < net.num_places(); ++p) inv.add_place(net.place_name(p), net.initial()[p]);
  for (std::size_t t = 0; t < net.num_transitions(); ++t) {
    std::size_t u = inv.add_transition(net.transition_name(t));
    for (std::size_t p = 0; p < net.num_places(); ++p) {
      inv.set_pre(u, p, net.post(t, p));
      inv.set_post(u, p, net.pre(t, p));
    }
  }
  return inv;
}

}  // namespace pnmc
