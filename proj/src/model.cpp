#include "emdp/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace emdp {

Emdp::Emdp(std::vector<State> states, std::vector<Transition> transitions)
    : states_(std::move(states)),
      transitions_(std::move(transitions)),
      out_(states_.size()),
      in_(states_.size()) {
  for (StateId s = 0; s < states_.size(); ++s) {
    if (!index_.emplace(states_[s].id, s).second) {
      throw ValidationError("unique-ids", "state " + states_[s].id, "declared more than once");
    }
  }
  for (TransitionId t = 0; t < transitions_.size(); ++t) {
    const auto& tr = transitions_[t];
    if (tr.src >= states_.size() || tr.dst >= states_.size()) {
      throw ValidationError("known-endpoint", "transition #" + std::to_string(t),
                            "endpoint index out of range");
    }
    out_[tr.src].push_back(t);
    in_[tr.dst].push_back(t);
  }
}

std::optional<StateId> Emdp::find_state(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StateId Emdp::state_id(std::string_view id) const {
  if (auto s = find_state(id)) return *s;
  throw std::out_of_range("unknown state '" + std::string(id) + "'");
}

StateId EmdpBuilder::add_state(std::string id, StateKind kind) {
  const StateId s = states_.size();
  if (!index_.emplace(id, s).second) {
    throw ValidationError("unique-ids", "state " + id, "declared more than once");
  }
  states_.push_back({std::move(id), kind});
  return s;
}

TransitionId EmdpBuilder::add_transition(std::string_view src, std::string_view dst,
                                         std::int64_t update, Rational reward,
                                         std::optional<Rational> prob) {
  const auto lookup = [&](std::string_view name) {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) {
      throw ValidationError("known-endpoint",
                            "transition " + std::string(src) + " -> " + std::string(dst),
                            "undeclared state '" + std::string(name) + "'");
    }
    return it->second;
  };
  const StateId s = lookup(src);
  const StateId d = lookup(dst);
  transitions_.push_back({s, d, update, std::move(reward), std::move(prob)});
  return transitions_.size() - 1;
}

Emdp EmdpBuilder::build() const { return Emdp(states_, transitions_); }

namespace {

struct Token {
  std::string_view text;
  std::size_t column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

bool valid_identifier(std::string_view id) {
  if (id.empty() || id == "->") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'' ||
           c == '-';
  });
}

std::optional<std::int64_t> parse_int64(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

struct PendingTransition {
  std::string src, dst;
  std::int64_t update;
  Rational reward;
  std::optional<Rational> prob;
  std::size_t line;
};

}  // namespace

Emdp parse_emdp(std::string_view text) {
  EmdpBuilder builder;
  std::vector<PendingTransition> pending;
  bool any_state = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const auto fail = [&](const Token& tok, const std::string& msg) -> SyntaxError {
      return SyntaxError(line_no, tok.column, msg);
    };
    const auto& head = tokens[0];
    if (head.text == "state") {
      if (tokens.size() != 3) throw fail(head, "expected: state <id> controllable|stochastic");
      if (!valid_identifier(tokens[1].text)) throw fail(tokens[1], "invalid state id");
      StateKind kind;
      if (tokens[2].text == "controllable") {
        kind = StateKind::Controllable;
      } else if (tokens[2].text == "stochastic") {
        kind = StateKind::Stochastic;
      } else {
        throw fail(tokens[2], "expected 'controllable' or 'stochastic'");
      }
      builder.add_state(std::string(tokens[1].text), kind);
      any_state = true;
    } else if (head.text == "trans") {
      if (tokens.size() < 6) {
        throw fail(head, "expected: trans <src> -> <dst> update=<int> reward=<rational>");
      }
      if (!valid_identifier(tokens[1].text)) throw fail(tokens[1], "invalid state id");
      if (tokens[2].text != "->") throw fail(tokens[2], "expected '->'");
      if (!valid_identifier(tokens[3].text)) throw fail(tokens[3], "invalid state id");
      PendingTransition tr{std::string(tokens[1].text), std::string(tokens[3].text), 0, 0,
                           std::nullopt, line_no};
      bool have_update = false, have_reward = false;
      for (std::size_t i = 4; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        const auto eq = tok.text.find('=');
        if (eq == std::string_view::npos) throw fail(tok, "expected key=value");
        const auto key = tok.text.substr(0, eq);
        const auto value = tok.text.substr(eq + 1);
        if (key == "update") {
          if (have_update) throw fail(tok, "duplicate 'update'");
          const auto v = parse_int64(value);
          if (!v) throw fail(tok, "update must be a 64-bit integer");
          tr.update = *v;
          have_update = true;
        } else if (key == "reward") {
          if (have_reward) throw fail(tok, "duplicate 'reward'");
          auto v = parse_rational(value);
          if (!v) throw fail(tok, "reward must be a rational");
          tr.reward = std::move(*v);
          have_reward = true;
        } else if (key == "prob") {
          if (tr.prob) throw fail(tok, "duplicate 'prob'");
          auto v = parse_rational(value);
          if (!v) throw fail(tok, "prob must be a rational");
          tr.prob = std::move(*v);
        } else {
          throw fail(tok, "unknown attribute '" + std::string(key) + "'");
        }
      }
      if (!have_update) throw fail(head, "missing update=");
      if (!have_reward) throw fail(head, "missing reward=");
      pending.push_back(std::move(tr));
    } else {
      throw fail(head, "expected 'state' or 'trans'");
    }
  }
  if (!any_state) throw SyntaxError(1, 1, "empty model: no states declared");
  for (auto& tr : pending) {
    builder.add_transition(tr.src, tr.dst, tr.update, std::move(tr.reward), std::move(tr.prob));
  }
  Emdp e = builder.build();
  validate(e);
  return e;
}

std::string print_emdp(const Emdp& e) {
  std::ostringstream os;
  for (const auto& s : e.states()) {
    os << "state " << s.id << ' '
       << (s.kind == StateKind::Controllable ? "controllable" : "stochastic") << '\n';
  }
  for (const auto& t : e.transitions()) {
    os << "trans " << e.state(t.src).id << " -> " << e.state(t.dst).id << " update=" << t.update
       << " reward=" << to_string(t.reward);
    if (t.prob) os << " prob=" << to_string(*t.prob);
    os << '\n';
  }
  return os.str();
}

void validate(const Emdp& e) {
  const auto describe = [&](TransitionId t) {
    const auto& tr = e.transition(t);
    return "transition #" + std::to_string(t) + " (" + e.state(tr.src).id + " -> " +
           e.state(tr.dst).id + ")";
  };
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    const auto& tr = e.transition(t);
    if (e.is_stochastic(tr.src) && !tr.prob) {
      throw ValidationError("prob-iff-stochastic", describe(t),
                            "stochastic source requires prob=");
    }
    if (e.is_controllable(tr.src) && tr.prob) {
      throw ValidationError("prob-iff-stochastic", describe(t),
                            "controllable source must not carry prob=");
    }
    if (tr.prob && *tr.prob <= 0) {
      throw ValidationError("prob-positive", describe(t),
                            "probability " + to_string(*tr.prob) + " is not positive");
    }
  }
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (e.out(s).empty()) {
      throw ValidationError("totality", "state " + e.state(s).id, "no outgoing transition");
    }
    if (e.is_stochastic(s)) {
      Rational sum = 0;
      for (TransitionId t : e.out(s)) sum += *e.transition(t).prob;
      if (sum != 1) {
        throw ValidationError("prob-sum", "state " + e.state(s).id,
                              "outgoing probabilities sum to " + to_string(sum));
      }
    }
  }
}

std::int64_t max_update(const Emdp& e) {
  std::int64_t m = 0;
  for (const auto& t : e.transitions()) m = std::max(m, t.update < 0 ? -t.update : t.update);
  return m;
}

Rational min_reward(const Emdp& e) {
  if (e.num_transitions() == 0) return 0;
  Rational m = e.transition(0).reward;
  for (const auto& t : e.transitions()) m = std::min(m, t.reward);
  return m;
}

Rational max_reward(const Emdp& e) {
  if (e.num_transitions() == 0) return 0;
  Rational m = e.transition(0).reward;
  for (const auto& t : e.transitions()) m = std::max(m, t.reward);
  return m;
}

std::vector<std::int64_t> energy_level(const Emdp& e, std::span<const TransitionId> path,
                                       std::int64_t n0) {
  std::vector<std::int64_t> levels{n0};
  levels.reserve(path.size() + 1);
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] >= e.num_transitions()) {
      throw InvalidPath("transition index " + std::to_string(path[i]) + " out of range");
    }
    const auto& tr = e.transition(path[i]);
    if (i > 0 && e.transition(path[i - 1]).dst != tr.src) {
      throw InvalidPath("transitions " + std::to_string(path[i - 1]) + " and " +
                        std::to_string(path[i]) + " do not chain");
    }
    levels.push_back(levels.back() + tr.update);
  }
  return levels;
}

std::vector<std::int64_t> energy_level_of_states(const Emdp& e, std::span<const StateId> path,
                                                 std::int64_t n0) {
  std::vector<TransitionId> transitions;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    std::optional<TransitionId> chosen;
    for (TransitionId t : e.out(path[i])) {
      if (e.transition(t).dst != path[i + 1]) continue;
      if (chosen && e.transition(*chosen).update != e.transition(t).update) {
        throw InvalidPath("ambiguous step " + e.state(path[i]).id + " -> " +
                          e.state(path[i + 1]).id + ": name the transition explicitly");
      }
      if (!chosen) chosen = t;
    }
    if (!chosen) {
      throw InvalidPath("no transition " + e.state(path[i]).id + " -> " +
                        e.state(path[i + 1]).id);
    }
    transitions.push_back(*chosen);
  }
  return energy_level(e, transitions, n0);
}

Configuration parse_configuration(const Emdp& e, std::string_view text) {
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.empty() || text.back() != ')') {
    throw SyntaxError(1, 1, "configuration must look like state(n)");
  }
  const auto name = text.substr(0, open);
  const auto number = text.substr(open + 1, text.size() - open - 2);
  const auto s = e.find_state(name);
  if (!s) throw SyntaxError(1, 1, "unknown state '" + std::string(name) + "'");
  const auto n = parse_int64(number);
  if (!n) throw SyntaxError(1, open + 2, "counter must be an integer");
  return {*s, *n};
}

std::string format_configuration(const Emdp& e, const Configuration& c) {
  return e.state(c.state).id + "(" + std::to_string(c.counter) + ")";
}

SubModel restrict_model(const Emdp& e, const std::vector<bool>& keep_state,
                        const std::vector<bool>& keep_transition) {
  SubModel sub;
  sub.parent_states = e.num_states();
  sub.parent_transitions = e.num_transitions();
  sub.parent_to_state.assign(e.num_states(), std::nullopt);
  std::vector<State> states;
  for (StateId s = 0; s < e.num_states(); ++s) {
    if (!keep_state[s]) continue;
    sub.parent_to_state[s] = states.size();
    sub.state_to_parent.push_back(s);
    states.push_back(e.state(s));
  }
  std::vector<Transition> transitions;
  for (TransitionId t = 0; t < e.num_transitions(); ++t) {
    if (!keep_transition[t]) continue;
    const auto& tr = e.transition(t);
    if (!sub.parent_to_state[tr.src] || !sub.parent_to_state[tr.dst]) {
      throw std::invalid_argument("restrict_model: kept transition leaves the kept states");
    }
    Transition copy = tr;
    copy.src = *sub.parent_to_state[tr.src];
    copy.dst = *sub.parent_to_state[tr.dst];
    transitions.push_back(std::move(copy));
    sub.transition_to_parent.push_back(t);
  }
  sub.model = Emdp(std::move(states), std::move(transitions));
  return sub;
}

}  // namespace emdp
